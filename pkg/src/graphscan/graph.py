"""Weighted directed graphs, the cut functional ``out`` and its Lovasz extension.

Undirected graphs are stored as pairs of opposite arcs with equal weight, so
``out_weight`` coincides with the classical undirected cut.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    """Raised for malformed graph input."""


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable weighted arc structure.

    ``tails``, ``heads`` and ``weights`` are parallel arrays indexed by arc id.
    ``undirected`` records that every arc has an opposite twin of equal weight.
    """

    p: int
    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray
    connected: bool
    undirected: bool = False
    _adjacency: tuple = field(default=(), repr=False)

    @property
    def m(self) -> int:
        """Number of arcs."""
        return len(self.tails)

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (arc pairs) for undirected encodings."""
        return self.m // 2 if self.undirected else self.m

    @property
    def w_min(self) -> float:
        return float(self.weights.min()) if self.m else 1.0

    def arcs(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(w)) for u, v, w in zip(self.tails, self.heads, self.weights)]

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbours of ``v`` in the undirected skeleton, sorted by id."""
        return self._adjacency[v]

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges ``(u, v, w)`` with ``u < v``; weights symmetrised."""
        acc: dict[tuple[int, int], float] = {}
        for u, v, w in self.arcs():
            key = (min(u, v), max(u, v))
            acc[key] = acc.get(key, 0.0) + w / 2.0
        return [(u, v, w) for (u, v), w in sorted(acc.items())]

    def degree_weights(self) -> np.ndarray:
        """``out({v})`` for every vertex."""
        return np.bincount(self.tails, weights=self.weights, minlength=self.p)


@dataclass(frozen=True)
class Cluster:
    """A vertex subset with its cached boundary weight ``out(C)``."""

    members: tuple[int, ...]
    boundary_weight: float | None = None

    @classmethod
    def of(cls, G: DirectedGraph, members: Iterable[int]) -> "Cluster":
        mem = tuple(sorted(set(int(v) for v in members)))
        return cls(mem, out_weight(G, mem))

    def __len__(self) -> int:
        return len(self.members)

    def indicator(self, p: int) -> np.ndarray:
        x = np.zeros(p)
        x[list(self.members)] = 1.0
        return x


def _skeleton_components(p: int, tails: np.ndarray, heads: np.ndarray) -> int:
    if p == 0:
        return 0
    adj = coo_matrix((np.ones(len(tails)), (tails, heads)), shape=(p, p))
    n_comp, _ = connected_components(adj, directed=True, connection="weak")
    return int(n_comp)


def build_graph(p: int, arcs: Sequence[tuple[int, int, float]], *, undirected: bool = False) -> DirectedGraph:
    """Validate an arc list and freeze it into a :class:`DirectedGraph`.

    Duplicate arcs are rejected, not merged, so arc ids stay deterministic.
    """
    if int(p) != p or p < 1:
        raise GraphError(f"vertex count must be a positive integer, got {p}")
    p = int(p)
    seen: set[tuple[int, int]] = set()
    tails, heads, weights = [], [], []
    for arc in arcs:
        u, v, w = int(arc[0]), int(arc[1]), float(arc[2])
        if not (0 <= u < p and 0 <= v < p):
            raise GraphError(f"arc ({u}, {v}) has a vertex id outside [0, {p})")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        if not np.isfinite(w) or w <= 0:
            raise GraphError(f"arc ({u}, {v}) has nonpositive weight {w}")
        if (u, v) in seen:
            raise GraphError(f"duplicate arc ({u}, {v})")
        seen.add((u, v))
        tails.append(u)
        heads.append(v)
        weights.append(w)
    t = np.asarray(tails, dtype=np.int64)
    h = np.asarray(heads, dtype=np.int64)
    wt = np.asarray(weights, dtype=float)
    for a in (t, h, wt):
        a.setflags(write=False)
    nbrs: list[set[int]] = [set() for _ in range(p)]
    for u, v in zip(tails, heads):
        nbrs[u].add(v)
        nbrs[v].add(u)
    adjacency = tuple(np.array(sorted(s), dtype=np.int64) for s in nbrs)
    connected = _skeleton_components(p, t, h) == 1
    return DirectedGraph(p, t, h, wt, connected, undirected, adjacency)


def from_undirected(p: int, edges: Sequence[tuple[int, int, float]]) -> DirectedGraph:
    """Encode undirected edges as opposite arc pairs of equal weight."""
    arcs = []
    for u, v, *rest in edges:
        w = rest[0] if rest else 1.0
        arcs.append((u, v, w))
        arcs.append((v, u, w))
    return build_graph(p, arcs, undirected=True)


def _as_index(G: DirectedGraph, C) -> np.ndarray:
    x = np.zeros(G.p, dtype=bool)
    idx = np.asarray(list(C), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= G.p):
        raise GraphError(f"cluster has vertex ids outside [0, {G.p})")
    x[idx] = True
    return x


def out_weight(G: DirectedGraph, C) -> float:
    """Total weight of arcs with tail in ``C`` and head outside ``C``."""
    x = C if isinstance(C, np.ndarray) and C.dtype == bool and C.shape == (G.p,) else _as_index(G, C)
    leaving = x[G.tails] & ~x[G.heads]
    return float(G.weights[leaving].sum())


def incidence_image(G: DirectedGraph, x) -> np.ndarray:
    """Signed incidence image ``z_e = W_e (x_tail - x_head)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (G.p,):
        raise GraphError(f"expected a vector of length {G.p}, got shape {x.shape}")
    return G.weights * (x[G.tails] - x[G.heads])


def lovasz_out(G: DirectedGraph, x) -> float:
    """Lovasz extension of ``out``: the sum of positive parts of the incidence image."""
    z = incidence_image(G, x)
    # sum positive entries in arc order so indicators reproduce out_weight bit for bit
    return float(z[z > 0].sum())


def lovasz_extension_generic(F: Callable[[frozenset], float], x) -> float:
    """Lovasz extension of an arbitrary set function by the sorted-prefix formula.

    Coordinates are visited in decreasing order; ties go to the smaller index.
    ``F`` receives frozensets of vertex ids.
    """
    x = np.asarray(x, dtype=float)
    order = sorted(range(len(x)), key=lambda i: (-x[i], i))
    total = 0.0
    prefix: set[int] = set()
    prev = F(frozenset())
    for j in order:
        prefix.add(j)
        cur = F(frozenset(prefix))
        total += (cur - prev) * x[j]
        prev = cur
    return total


def undirected_cut(p: int, edges, C) -> float:
    """Plain undirected cut weight, independent of the arc encoding."""
    inside = set(C)
    return float(sum(w for u, v, w in edges if (u in inside) != (v in inside)))


def all_subsets(p: int):
    for r in range(p + 1):
        yield from combinations(range(p), r)


# ---------------------------------------------------------------------------
# edge-list text format: "p m directed|undirected" then "tail head weight" rows


def write_edgelist(G: DirectedGraph, path) -> None:
    lines = []
    if G.undirected:
        rows = [(u, v, w) for u, v, w in G.arcs() if u < v]
        lines.append(f"{G.p} {len(rows)} undirected")
    else:
        rows = G.arcs()
        lines.append(f"{G.p} {len(rows)} directed")
    lines += [f"{u} {v} {w!r}" for u, v, w in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path) -> DirectedGraph:
    text = Path(path).read_text().split("\n")
    rows = [ln.split() for ln in text if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3 or rows[0][2] not in ("directed", "undirected"):
        raise GraphError(f"{path}: header must be 'p m directed|undirected'")
    p, m, kind = int(rows[0][0]), int(rows[0][1]), rows[0][2]
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"{path}: header announces {m} rows, found {len(body)}")
    triples = []
    for r in body:
        if len(r) != 3:
            raise GraphError(f"{path}: malformed row {' '.join(r)!r}")
        triples.append((int(r[0]), int(r[1]), float(r[2])))
    if kind == "undirected":
        return from_undirected(p, triples)
    return build_graph(p, triples)
