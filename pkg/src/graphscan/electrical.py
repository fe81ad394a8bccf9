"""Effective resistances, null thresholds for GSS/LESS, and Wilson's UST sampler.

Resistances use the symmetrised weights ``(W + W^T) / 2``; for undirected
encodings this is the graph itself.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .graph import Cluster, DirectedGraph, GraphError

RESIDUAL_TOL = 1e-9
DENSE_LIMIT = 5000


def symmetrized_weights(G: DirectedGraph) -> np.ndarray:
    W = np.zeros((G.p, G.p))
    np.add.at(W, (G.tails, G.heads), G.weights)
    return (W + W.T) / 2.0


def laplacian(G: DirectedGraph) -> np.ndarray:
    W = symmetrized_weights(G)
    return np.diag(W.sum(axis=1)) - W


def _require_connected(G: DirectedGraph) -> None:
    if not G.connected:
        raise GraphError("effective resistance needs a connected graph")


@dataclass(frozen=True)
class ResistanceTable:
    """Effective resistance per arc, aligned with ``G.tails``/``G.heads``."""

    G: DirectedGraph
    resistance: np.ndarray
    residual: float
    symmetrized: bool
    grounded_inverse: np.ndarray = field(repr=False, compare=False, default=None)

    def edge_sum(self) -> float:
        """``sum_e r_e`` over undirected edges (Foster's sum for unit weights)."""
        return float(sum(self.pair(u, v) for u, v, _ in self.G.edges()))

    def pair(self, u: int, v: int) -> float:
        Z = self.grounded_inverse
        return float(Z[u, u] + Z[v, v] - 2 * Z[u, v])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tail", "head", "weight", "resistance"])
            for u, v, wt, r in zip(self.G.tails, self.G.heads, self.G.weights, self.resistance):
                w.writerow([int(u), int(v), repr(float(wt)), repr(float(r))])


def _grounded_inverse(G: DirectedGraph) -> tuple[np.ndarray, float]:
    """Inverse of the Laplacian with vertex 0 grounded, padded back to ``p x p``."""
    _require_connected(G)
    if G.p > DENSE_LIMIT:
        raise GraphError(f"dense Laplacian solve limited to p <= {DENSE_LIMIT}")
    p = G.p
    Z = np.zeros((p, p))
    if p == 1:
        return Z, 0.0
    L = laplacian(G)[1:, 1:]
    fac = cho_factor(L, lower=True)
    inv = cho_solve(fac, np.eye(p - 1))
    residual = float(np.linalg.norm(L @ inv - np.eye(p - 1)) / math.sqrt(p - 1))
    if residual > RESIDUAL_TOL:
        raise GraphError(f"Laplacian solve residual {residual:.3g} above {RESIDUAL_TOL}")
    Z[1:, 1:] = inv
    return Z, residual


def effective_resistance(G: DirectedGraph, u: int, v: int) -> float:
    """Resistance between ``u`` and ``v`` with conductance ``W_e`` on every edge."""
    if not (0 <= u < G.p and 0 <= v < G.p):
        raise GraphError("vertex out of range")
    if u == v:
        return 0.0
    _require_connected(G)
    L = laplacian(G)
    keep = [i for i in range(G.p) if i != v]
    b = np.zeros(G.p)
    b[u] = 1.0
    # ground v; the potential at u is then the resistance
    Lg = L[np.ix_(keep, keep)]
    phi = cho_solve(cho_factor(Lg, lower=True), b[keep])
    res = np.linalg.norm(Lg @ phi - b[keep])
    if res > RESIDUAL_TOL * max(1.0, np.linalg.norm(phi)):
        raise GraphError(f"Laplacian solve residual {res:.3g} too large")
    return float(phi[keep.index(u)])


def resistance_table(G: DirectedGraph) -> ResistanceTable:
    Z, residual = _grounded_inverse(G)
    d = np.diag(Z)
    r = d[G.tails] + d[G.heads] - 2 * Z[G.tails, G.heads]
    return ResistanceTable(G, r, residual, symmetrized=not G.undirected, grounded_inverse=Z)


def boundary_resistance(G: DirectedGraph, C, table: ResistanceTable | None = None) -> float:
    """``sum W_uv r_uv`` over arcs leaving ``C``."""
    table = table or resistance_table(G)
    members = C.members if isinstance(C, Cluster) else C
    x = np.zeros(G.p, dtype=bool)
    idx = np.asarray(list(members), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= G.p):
        raise GraphError("cluster has vertex ids out of range")
    x[idx] = True
    leaving = x[G.tails] & ~x[G.heads]
    return float((G.weights[leaving] * table.resistance[leaving]).sum())


def r_class_bound(G: DirectedGraph, rho: float, table: ResistanceTable | None = None) -> float:
    """``rho * max_e r_e``, an upper bound on the boundary resistance of any ``C`` with ``out(C) <= rho``."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if rho == 0 or G.m == 0:
        return 0.0
    table = table or resistance_table(G)
    return float(rho * table.resistance.max())


def r_class_exact(G: DirectedGraph, rho: float, table: ResistanceTable | None = None,
                  guard: int = 20) -> float:
    """Exact max of the boundary resistance over ``{C : out(C) <= rho}`` by enumeration."""
    if G.p > guard:
        raise GraphError(f"exact r_class enumeration refused for p={G.p} > {guard}")
    table = table or resistance_table(G)
    p = G.p
    masks = np.arange(1 << p, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(p)) & 1).astype(bool)
    leaving = bits[:, G.tails] & ~bits[:, G.heads]
    out = leaving @ G.weights
    rb = leaving @ (G.weights * table.resistance)
    return float(rb[out <= rho + 1e-12].max())


# ---------------------------------------------------------------------------
# null thresholds


def _check(p: int, r_class: float, alpha: float) -> None:
    if p < 2:
        raise ValueError("p must be at least 2")
    if r_class < 0:
        raise ValueError("r_class must be nonnegative")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")


def gss_threshold(p: int, r_class: float, alpha: float) -> float:
    """Level-alpha null bound for the graph scan statistic."""
    _check(p, r_class, alpha)
    return ((math.sqrt(r_class) + math.sqrt(0.5 * math.log(p))) * math.sqrt(2 * math.log(p - 1))
            + math.sqrt(2 * math.log(2)) + math.sqrt(2 * math.log(1 / alpha)))


def less_threshold(p: int, r_class: float, alpha: float) -> float:
    """Level-alpha null bound for LESS."""
    _check(p, r_class, alpha)
    logp = math.log(p)
    r = (math.sqrt(r_class) + math.sqrt(0.5 * logp)) ** 2
    root = math.sqrt(r * logp)
    return ((math.log(2 * p) + 1) / root + 2 * root
            + math.sqrt(2 * logp) + math.sqrt(2 * math.log(1 / alpha)))


@dataclass(frozen=True)
class ThresholdReport:
    p: int
    r_class: float
    alpha: float
    gss_threshold: float
    less_threshold: float
    rho: float | None = None

    @classmethod
    def build(cls, p: int, r_class: float, alpha: float, rho: float | None = None):
        return cls(p, r_class, alpha, gss_threshold(p, r_class, alpha),
                   less_threshold(p, r_class, alpha), rho)

    def render(self) -> str:
        lines = [f"p = {self.p}"]
        if self.rho is not None:
            lines.append(f"rho = {self.rho:.6g}")
        lines += [
            f"r_class = {self.r_class:.6g}",
            f"alpha = {self.alpha:.6g}",
            f"gss_threshold = {self.gss_threshold:.6g}",
            f"less_threshold = {self.less_threshold:.6g}",
        ]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# uniform spanning trees


class WilsonSampler:
    """Loop-erased random walks rooted at vertex 0; tree law proportional to product of weights."""

    def __init__(self, G: DirectedGraph):
        _require_connected(G)
        W = symmetrized_weights(G)
        self.p = G.p
        self.nbrs = [np.flatnonzero(W[v]) for v in range(G.p)]
        self.cum = []
        for v in range(G.p):
            c = np.cumsum(W[v, self.nbrs[v]])
            self.cum.append((c / c[-1]).tolist() if len(c) else [])
        self.nbrs = [n.tolist() for n in self.nbrs]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        p = self.p
        in_tree = [False] * p
        nxt = [-1] * p
        in_tree[0] = True
        u_buf = rng.random(64)
        k = 0
        for i in range(1, p):
            u = i
            while not in_tree[u]:
                if k == len(u_buf):
                    u_buf = rng.random(64)
                    k = 0
                j = bisect.bisect_right(self.cum[u], u_buf[k])
                k += 1
                nxt[u] = self.nbrs[u][min(j, len(self.nbrs[u]) - 1)]
                u = nxt[u]
            u = i
            while not in_tree[u]:
                in_tree[u] = True
                u = nxt[u]
        edges = [(min(v, nxt[v]), max(v, nxt[v])) for v in range(1, p)]
        return np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)


def wilson_ust(G: DirectedGraph, rng: np.random.Generator) -> np.ndarray:
    """One random spanning tree as an ``(p-1, 2)`` array of undirected edges ``u < v``."""
    return WilsonSampler(G).sample(rng)
