"""Graph families and alternative-hypothesis generators."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .graph import Cluster, DirectedGraph, GraphError, from_undirected, out_weight

MAX_REGENERATE = 20


def stream(*key: int) -> np.random.Generator:
    """Counter-based generator keyed by a tuple of integers, e.g. ``(seed, arm, trial)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


# ---------------------------------------------------------------------------
# deterministic families


def torus_graph(side: int) -> DirectedGraph:
    """Square 2-D torus with ``side**2`` vertices and unit weights.

    For ``side == 2`` the two wraparound edges between a pair coincide and are
    collapsed into a single edge of weight 2.
    """
    if int(side) != side or side < 2:
        raise GraphError(f"torus side must be an integer >= 2, got {side}")
    acc: dict[tuple[int, int], float] = {}
    for r in range(side):
        for c in range(side):
            v = r * side + c
            for w in (r * side + (c + 1) % side, ((r + 1) % side) * side + c):
                key = (min(v, w), max(v, w))
                acc[key] = acc.get(key, 0.0) + 1.0
    return from_undirected(side * side, [(u, v, w) for (u, v), w in sorted(acc.items())])


def cycle_graph(p: int) -> DirectedGraph:
    if p < 3:
        raise GraphError("cycle needs p >= 3")
    return from_undirected(p, [(i, (i + 1) % p, 1.0) for i in range(p)])


def complete_graph(p: int) -> DirectedGraph:
    if p < 2:
        raise GraphError("complete graph needs p >= 2")
    return from_undirected(p, [(i, j, 1.0) for i in range(p) for j in range(i + 1, p)])


def grid_graph(rows: int, cols: int) -> DirectedGraph:
    """Planar rows x cols lattice (no wraparound)."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return from_undirected(rows * cols, edges)


# ---------------------------------------------------------------------------
# random geometric graphs


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    density: str = "uniform"
    seed: int | None = None

    def __post_init__(self):
        if self.points.ndim != 2 or len(self.points) < 2:
            raise ValueError("point cloud needs at least two points in R^D")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")

    @property
    def n(self) -> int:
        return len(self.points)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{i}" for i in range(self.points.shape[1])])
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])


def sample_points(n: int, dim: int = 2, seed: int = 0) -> PointCloud:
    """``n`` i.i.d. uniform points on the unit cube."""
    rng = stream(seed)
    return PointCloud(rng.random((n, dim)), "uniform", seed)


def knn_graph(pts: PointCloud, k: int) -> DirectedGraph:
    """Symmetric k-nearest-neighbour graph; equal distances are broken by index."""
    n = pts.n
    if not 1 <= k < n:
        raise GraphError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    D = cdist(pts.points, pts.points)
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1, kind="stable")[:, :k]
    pairs = {(min(i, int(j)), max(i, int(j))) for i in range(n) for j in nn[i]}
    return from_undirected(n, [(u, v, 1.0) for u, v in sorted(pairs)])


def epsilon_graph(pts: PointCloud, eps: float) -> DirectedGraph:
    if eps <= 0:
        raise GraphError("eps must be positive")
    D = cdist(pts.points, pts.points)
    iu, ju = np.nonzero(np.triu(D <= eps, k=1))
    return from_undirected(pts.n, [(int(u), int(v), 1.0) for u, v in zip(iu, ju)])


def connected_geometric(kind: str, n: int, param: float, seed: int, dim: int = 2):
    """Draw point clouds with seeds ``seed, seed+1, ...`` until the graph is connected."""
    for attempt in range(MAX_REGENERATE):
        pts = sample_points(n, dim, seed + attempt)
        if kind == "knn":
            G = knn_graph(pts, int(param))
        elif kind == "epsilon":
            G = epsilon_graph(pts, float(param))
        else:
            raise GraphError(f"unknown geometric family {kind!r}")
        if G.connected:
            return G, pts
    raise GraphError(f"no connected {kind} graph after {MAX_REGENERATE} point clouds")


# ---------------------------------------------------------------------------
# clusters and signals


def ball_cluster(G: DirectedGraph, seed_vertex: int, target_size: int) -> Cluster:
    """Breadth-first ball around ``seed_vertex`` cut to ``target_size`` vertices.

    The last BFS layer is truncated by vertex id.
    """
    if not 0 <= seed_vertex < G.p:
        raise GraphError(f"seed vertex {seed_vertex} out of range")
    if not 1 <= target_size <= G.p:
        raise GraphError(f"target size must lie in [1, {G.p}]")
    chosen = [seed_vertex]
    seen = {seed_vertex}
    layer = [seed_vertex]
    while len(chosen) < target_size and layer:
        nxt = sorted({int(w) for v in layer for w in G.neighbors(v)} - seen)
        take = nxt[: target_size - len(chosen)]
        chosen += take
        seen.update(nxt)
        layer = take
    return Cluster.of(G, chosen)


@dataclass(frozen=True)
class SignalSpec:
    mu: float
    cluster: Cluster
    x: np.ndarray


def make_signal(C: Cluster, mu: float, p: int) -> SignalSpec:
    """Mean vector ``mu / sqrt(|C|)`` on ``C`` and zero elsewhere."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    x = np.zeros(p)
    x[list(C.members)] = mu / np.sqrt(len(C))
    return SignalSpec(float(mu), C, x)


def observe(signal: SignalSpec | None, rng: np.random.Generator, p: int | None = None) -> np.ndarray:
    """One draw of ``y = x + N(0, I)``; ``signal=None`` means the null."""
    if signal is None:
        if p is None:
            raise ValueError("p is required under the null")
        return rng.standard_normal(p)
    return signal.x + rng.standard_normal(len(signal.x))


def is_connected_subset(G: DirectedGraph, members) -> bool:
    members = set(members)
    if not members:
        return True
    start = next(iter(members))
    seen = {start}
    q = deque([start])
    while q:
        v = q.popleft()
        for w in G.neighbors(v):
            w = int(w)
            if w in members and w not in seen:
                seen.add(w)
                q.append(w)
    return seen == members


__all__ = [
    "PointCloud", "SignalSpec", "ball_cluster", "complete_graph", "connected_geometric",
    "cycle_graph", "epsilon_graph", "grid_graph", "is_connected_subset", "knn_graph",
    "make_signal", "observe", "out_weight", "sample_points", "stream", "torus_graph",
]
