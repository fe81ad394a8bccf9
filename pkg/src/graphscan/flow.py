"""Exact s-t max-flow / min-cut and the binary MRF MAP solver.

The push-relabel kernel is compiled with Cython when available; otherwise the
pure-Python twin is used. ``GRAPHSCAN_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _flowkernel_py
from .graph import DirectedGraph

try:
    from . import _flowkernel as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNELS = {"python": _flowkernel_py.push_relabel}
if _compiled is not None:
    KERNELS["cython"] = _compiled.push_relabel

if _compiled is not None and not os.environ.get("GRAPHSCAN_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

EPS_REL = 1e-12


def available_backends() -> list[str]:
    return sorted(KERNELS)


@dataclass(frozen=True)
class FlowNetwork:
    """Capacitated arcs on nodes ``0..n_nodes-1`` with distinguished source and sink."""

    n_nodes: int
    arcs: Sequence[tuple[int, int, float]]
    source: int
    sink: int

    def __post_init__(self):
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        for a, b, c in self.arcs:
            if not (0 <= a < self.n_nodes and 0 <= b < self.n_nodes):
                raise ValueError(f"arc ({a}, {b}) outside node range")
            if not np.isfinite(c) or c < 0:
                raise ValueError(f"arc ({a}, {b}) has invalid capacity {c}")


class _Topology:
    """CSR layout of residual arc pairs; arc ``2k`` is pair k forward, ``2k+1`` backward."""

    def __init__(self, n: int, pairs: Sequence[tuple[int, int]]):
        self.n = n
        k = len(pairs)
        tail = np.empty(2 * k, dtype=np.int32)
        head = np.empty(2 * k, dtype=np.int32)
        for i, (a, b) in enumerate(pairs):
            tail[2 * i], head[2 * i] = a, b
            tail[2 * i + 1], head[2 * i + 1] = b, a
        order = np.argsort(tail, kind="stable").astype(np.int32)
        first = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(np.bincount(tail, minlength=n), out=first[1:])
        # kernels take &x[0]; keep every buffer non-empty
        self.first = first
        self.arcs_of = order if len(order) else np.zeros(1, dtype=np.int32)
        self.head = head if len(head) else np.zeros(1, dtype=np.int32)
        self.n_arcs = 2 * k

    def run(self, s: int, t: int, cap: np.ndarray, backend: str):
        kernel = KERNELS[backend]
        total = float(cap.sum())
        eps = EPS_REL * max(total, 1.0)
        buf = cap if len(cap) else np.zeros(1)
        reach = np.zeros(self.n, dtype=np.uint8)
        flow, pushes, relabels = kernel(self.n, s, t, self.first, self.arcs_of, self.head,
                                        buf, eps, reach)
        return float(flow), reach.astype(bool), int(pushes), int(relabels)


def max_flow(net: FlowNetwork, backend: str | None = None) -> tuple[float, list[int]]:
    """Maximum s-t flow value and the smallest source side of a minimum cut.

    The kernel reports nodes that reach its sink in the residual graph, so it
    is run on the reversed network (arcs flipped, source and sink swapped).
    """
    backend = backend or BACKEND
    topo = _Topology(net.n_nodes, [(b, a) for a, b, _ in net.arcs])
    cap = np.zeros(topo.n_arcs)
    cap[0::2] = [c for _, _, c in net.arcs]
    flow, reach, _, _ = topo.run(net.sink, net.source, cap, backend)
    return flow, [int(v) for v in np.flatnonzero(reach)]


@dataclass(frozen=True)
class CutSolution:
    """Minimiser ``x`` of ``sum(theta * x) + eta1 * out(x)`` over binary vectors."""

    x: np.ndarray
    objective: float
    flow_value: float
    pushes: int
    relabels: int
    out: float

    @property
    def size(self) -> int:
        return int(self.x.sum())


class CutSolver:
    """Reusable min-cut machinery for one graph; capacities change per call.

    Network (vertices ``0..p-1``, source ``p``, sink ``p+1``): ``s -> i`` with
    capacity ``-theta_i`` when negative, ``i -> t`` with ``theta_i`` when
    positive, and ``u -> v`` with ``eta1 * W_uv`` per graph arc. The vertices
    on the source side of the minimum cut form ``x``. Among several minimisers
    the smallest one is returned, which is unique for a submodular energy.
    """

    def __init__(self, G: DirectedGraph, backend: str | None = None):
        self.G = G
        self.backend = backend or BACKEND
        if self.backend not in KERNELS:
            raise ValueError(f"unknown flow backend {self.backend!r}; have {available_backends()}")
        p = G.p
        self.source, self.sink = p, p + 1
        # reversed network: graph arc u->v becomes v->u; opposite arcs share a pair
        pair_of: dict[tuple[int, int], int] = {}
        pairs: list[tuple[int, int]] = []
        self._arc_slot = np.empty(G.m, dtype=np.int64)
        for e, (u, v) in enumerate(zip(G.tails.tolist(), G.heads.tolist())):
            ra, rb = v, u
            key = (min(ra, rb), max(ra, rb))
            if key not in pair_of:
                pair_of[key] = len(pairs)
                pairs.append(key)
            k = pair_of[key]
            self._arc_slot[e] = 2 * k if (ra, rb) == pairs[k] else 2 * k + 1
        n_graph_pairs = len(pairs)
        # reversed terminals: t -> i carries theta_i > 0, i -> s carries -theta_i > 0
        pairs += [(self.sink, i) for i in range(p)]
        pairs += [(i, self.source) for i in range(p)]
        self._pos_slot = 2 * (n_graph_pairs + np.arange(p))
        self._neg_slot = 2 * (n_graph_pairs + p + np.arange(p))
        self._topo = _Topology(p + 2, pairs)
        self.calls = 0

    def energy(self, theta: np.ndarray, eta1: float, x: np.ndarray) -> float:
        G = self.G
        xb = x.astype(bool)
        cut = float(G.weights[xb[G.tails] & ~xb[G.heads]].sum())
        return float(theta[xb].sum()) + eta1 * cut

    def solve(self, theta, eta1: float) -> CutSolution:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.G.p,):
            raise ValueError(f"theta must have length {self.G.p}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        if eta1 < 0:
            raise ValueError("eta1 must be nonnegative")
        cap = np.zeros(self._topo.n_arcs)
        cap[self._arc_slot] = eta1 * self.G.weights
        cap[self._pos_slot] = np.maximum(theta, 0.0)
        cap[self._neg_slot] = np.maximum(-theta, 0.0)
        flow, reach, pushes, relabels = self._topo.run(self.sink, self.source, cap, self.backend)
        self.calls += 1
        x = reach[: self.G.p].astype(np.int8)
        xb = x.astype(bool)
        G = self.G
        out = float(G.weights[xb[G.tails] & ~xb[G.heads]].sum())
        objective = float(theta[xb].sum()) + eta1 * out
        return CutSolution(x, objective, flow, pushes, relabels, out)


def mrf_map(G: DirectedGraph, theta, eta1: float, backend: str | None = None) -> CutSolution:
    """Minimise ``sum_i theta_i x_i + eta1 * out(x)`` over ``x`` in ``{0,1}^p``."""
    return CutSolver(G, backend).solve(theta, eta1)


def g_dual(G: DirectedGraph, y, eta0: float, eta1: float, solver: CutSolver | None = None):
    """Dual function ``max_x y.x - eta0 * |x| - eta1 * out(x)`` and its maximiser."""
    if eta0 < 0 or eta1 < 0:
        raise ValueError("dual variables must be nonnegative")
    y = np.asarray(y, dtype=float)
    solver = solver or CutSolver(G)
    sol = solver.solve(eta0 - y, eta1)
    return -sol.objective, sol.x
