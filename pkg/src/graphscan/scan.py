"""Scan detectors: brute-force GSS, LESS through its cut dual, and naive baselines.

LESS at scan size ``t`` is the value of

    h_t = min_{eta0, eta1 >= 0}  g(eta0, eta1) + eta0 * t + eta1 * rho,

where ``g`` is evaluated by one minimum cut. Write ``chi(eta0)`` for the
minimum over ``eta1`` alone. Both ``g(eta0, .) + eta1 * rho`` and ``chi`` are
convex and piecewise linear, so each one-dimensional minimisation is done by
intersecting supporting lines (an exact cutting-plane line search): the cut
solution supplies the slope, and the search stops once the function value at
the intersection matches the lines within tolerance.

Since ``h_t = min_eta0 chi(eta0) + eta0 * t``, tracing the breakpoints of
``chi`` once gives every ``h_t`` at the same time (the default ``sweep``
method). ``per-t`` minimises each ``t`` separately with warm starts.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .flow import CutSolver
from .graph import Cluster, DirectedGraph

GSS_GUARD = 25


class ScanError(ValueError):
    pass


@dataclass(frozen=True)
class DualPoint:
    eta0: float
    eta1: float

    def __post_init__(self):
        if not (np.isfinite(self.eta0) and np.isfinite(self.eta1)) or self.eta0 < 0 or self.eta1 < 0:
            raise ValueError(f"dual point must be finite and nonnegative, got {self}")


@dataclass
class LessOptions:
    """Tuning knobs for LESS.

    ``tol`` bounds the absolute error of every ``h_t``; ``max_calls_per_t``
    caps cut calls (the sweep's budget is this times ``p``).
    """

    tol: float = 1e-6
    max_calls_per_t: int = 500
    method: str = "sweep"
    parallel: bool = False
    workers: int = 4
    two_sided: bool = False
    backend: str | None = None


@dataclass(frozen=True)
class TraceRow:
    t: int
    value: float
    eta0: float
    eta1: float
    calls: int


@dataclass
class DetectionResult:
    statistic: float
    method: str
    best_t: int | None = None
    best_dual: DualPoint | None = None
    best_x: np.ndarray | None = None
    argmax_cluster: Cluster | None = None
    trace: list[TraceRow] = field(default_factory=list)
    approximate: bool = False
    gap: float = 0.0
    flow_calls: int = 0
    threshold: float | None = None
    note: str = ""

    @property
    def reject(self) -> bool | None:
        if self.threshold is None:
            return None
        return self.statistic > self.threshold

    def with_threshold(self, threshold: float) -> "DetectionResult":
        self.threshold = float(threshold)
        return self


def write_trace_csv(result: DetectionResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value", "eta0", "eta1", "calls"])
        for r in result.trace:
            w.writerow([r.t, repr(r.value), repr(r.eta0), repr(r.eta1), r.calls])


# ---------------------------------------------------------------------------
# naive baselines


def max_test(y) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.abs(y).max()) if y.size else 0.0


def sum_test(y) -> float:
    return float(np.asarray(y, dtype=float).sum())


# ---------------------------------------------------------------------------
# brute-force graph scan statistic


def _subset_chunks(G: DirectedGraph, chunk: int = 1 << 15):
    p = G.p
    shifts = np.arange(p, dtype=np.int64)
    total = 1 << p
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        out = (bits[:, G.tails] & ~bits[:, G.heads]) @ G.weights
        yield masks, bits, out


class GSSScanner:
    """Enumerates the feasible class ``{C nonempty : out(C) <= rho}`` once.

    Useful when the same graph and ``rho`` are scanned for many signals.
    """

    def __init__(self, G: DirectedGraph, rho: float, guard: int = GSS_GUARD):
        if G.p > guard:
            raise ScanError(f"brute-force GSS refused: p={G.p} exceeds enumeration guard {guard}")
        if rho < 0:
            raise ScanError("rho must be nonnegative")
        self.G, self.rho = G, float(rho)
        masks, members = [], []
        for m, bits, out in _subset_chunks(G):
            ok = out <= self.rho + 1e-12
            masks.append(m[ok])
            members.append(bits[ok])
        self.masks = np.concatenate(masks)
        if self.masks.size == 0:
            raise ScanError("empty feasible class")
        self.members = np.concatenate(members).astype(float)
        self.sqrt_size = np.sqrt(self.members.sum(axis=1))

    def values(self, y) -> np.ndarray:
        return (self.members @ np.asarray(y, dtype=float)) / self.sqrt_size

    def scan(self, y, two_sided: bool = False) -> DetectionResult:
        y = np.asarray(y, dtype=float)
        vals = self.values(y)
        if two_sided:
            vals = np.maximum(vals, -vals)
        best = vals.max()
        tied = self.masks[vals == best]
        cands = [tuple(int(i) for i in range(self.G.p) if (mk >> i) & 1) for mk in tied.tolist()]
        arg = min(cands)
        cluster = Cluster.of(self.G, arg)
        x = cluster.indicator(self.G.p).astype(np.int8)
        return DetectionResult(float(best), "gss", best_t=len(arg), best_x=x, argmax_cluster=cluster)

    def statistic(self, y) -> float:
        return float(self.values(y).max())


def gss_bruteforce(G: DirectedGraph, y, rho: float, *, guard: int = GSS_GUARD,
                   two_sided: bool = False) -> DetectionResult:
    """Exact GSS: max of ``sum(y[C]) / sqrt(|C|)`` over nonempty ``C`` with ``out(C) <= rho``.

    Ties go to the lexicographically smallest member tuple. The value may be
    negative (the empty set is not a candidate).
    """
    if G.p > guard:
        raise ScanError(f"brute-force GSS refused: p={G.p} exceeds enumeration guard {guard}")
    if rho < 0:
        raise ScanError("rho must be nonnegative")
    y = np.asarray(y, dtype=float)
    if y.shape != (G.p,):
        raise ScanError(f"y must have length {G.p}")
    best, best_masks = -np.inf, []
    for masks, bits, out in _subset_chunks(G):
        ok = out <= rho + 1e-12
        if not ok.any():
            continue
        b = bits[ok]
        vals = (b @ y) / np.sqrt(b.sum(axis=1))
        if two_sided:
            vals = np.maximum(vals, -vals)
        cmax = vals.max()
        if cmax > best:
            best, best_masks = cmax, list(masks[ok][vals == cmax])
        elif cmax == best:
            best_masks += list(masks[ok][vals == cmax])
    if not best_masks:
        raise ScanError("empty feasible class")
    cands = [tuple(i for i in range(G.p) if (int(mk) >> i) & 1) for mk in best_masks]
    arg = min(cands)
    cluster = Cluster.of(G, arg)
    return DetectionResult(float(best), "gss", best_t=len(arg),
                           best_x=cluster.indicator(G.p).astype(np.int8), argmax_cluster=cluster)


# ---------------------------------------------------------------------------
# LESS


@dataclass
class _ChiPoint:
    """``chi`` evaluated at one ``eta0``: dual value, primal line, and cut data."""

    eta0: float
    upper: float  # g(eta0, eta1) + eta1 * rho, a valid upper bound on chi(eta0)
    lower: float  # value of a feasible fractional primal point, a lower bound
    slope: float  # -|x_mix|: slope of the supporting primal line
    eta1: float
    x: np.ndarray
    calls: int

    def line(self, eta0: float) -> float:
        return self.lower + self.slope * (eta0 - self.eta0)


class _DualEngine:
    def __init__(self, G: DirectedGraph, y: np.ndarray, rho: float, solver: CutSolver, tol: float,
                 max_inner: int = 200):
        self.G, self.y, self.rho = G, y, float(rho)
        self.solver = solver
        self.tol = tol
        self.max_inner = max_inner
        self.calls = 0

    def _eval(self, z: np.ndarray, eta1: float):
        sol = self.solver.solve(-z, eta1)
        self.calls += 1
        g = -sol.objective
        return g + eta1 * self.rho, self.rho - sol.out, sol.x, sol.out

    def chi(self, eta0: float) -> _ChiPoint:
        """Minimise ``g(eta0, eta1) + eta1 * rho`` over ``eta1 >= 0``."""
        start = self.calls
        G, rho = self.G, self.rho
        z = self.y - eta0
        pos = z > 0
        out0 = float(G.weights[pos[G.tails] & ~pos[G.heads]].sum())
        v0 = float(z[pos].sum())
        x0 = pos.astype(np.int8)
        if out0 <= rho:
            return _ChiPoint(eta0, v0, v0, -float(pos.sum()), 0.0, x0, 0)
        # beyond eta1_max every set with out > 0 loses to the empty set
        eta1_max = v0 / G.w_min * (1.0 + 1e-9) + 1e-12
        L = (0.0, v0, rho - out0, x0, out0)
        FR, sR, xR, oR = self._eval(z, eta1_max)
        R = (eta1_max, FR, sR, xR, oR)
        best = (FR, eta1_max, xR) if FR < v0 else (v0, 0.0, x0)
        if sR < 0:
            # numerically degenerate; treat the right end as optimal
            return _ChiPoint(eta0, FR, float(z @ xR), -float(xR.sum()), eta1_max, xR,
                             self.calls - start)
        mix = None
        for _ in range(self.max_inner):
            e_l, F_l, s_l = L[0], L[1], L[2]
            e_r, F_r, s_r = R[0], R[1], R[2]
            ec = (F_r - F_l + s_l * e_l - s_r * e_r) / (s_l - s_r)
            ec = min(max(ec, e_l), e_r)
            lc = F_l + s_l * (ec - e_l)
            Fc, sc, xc, oc = self._eval(z, ec)
            if Fc < best[0]:
                best = (Fc, ec, xc)
            if sc == 0.0:
                mix = xc.astype(float)
                break
            if Fc - lc <= self.tol:
                break
            if sc < 0:
                L = (ec, Fc, sc, xc, oc)
            else:
                R = (ec, Fc, sc, xc, oc)
        if mix is None:
            oA, oB = L[4], R[4]
            lam = (rho - oB) / (oA - oB) if oA > oB else 0.0
            mix = lam * L[3] + (1.0 - lam) * R[3]
        return _ChiPoint(eta0, best[0], float(z @ mix), -float(mix.sum()), best[1], best[2],
                         self.calls - start)

    def right_end(self, Y: float) -> _ChiPoint:
        # chi vanishes for eta0 >= max(y): the empty set is optimal at eta1 = 0
        return _ChiPoint(Y, 0.0, 0.0, 0.0, 0.0, np.zeros(self.G.p, dtype=np.int8), 0)


def _intersect(a: _ChiPoint, b: _ChiPoint) -> float | None:
    """Where the supporting lines at ``a`` and ``b`` cross, if strictly between them."""
    if b.slope - a.slope <= 1e-15:
        return None
    ec = ((b.lower - b.slope * b.eta0) - (a.lower - a.slope * a.eta0)) / (a.slope - b.slope)
    if not (a.eta0 < ec < b.eta0):
        return None
    return ec


def _sweep(engine: _DualEngine, Y: float, tol: float, budget: int):
    """Trace ``chi`` over ``[0, Y]`` until the envelope is within ``tol``."""
    left = engine.chi(0.0)
    right = engine.right_end(Y)
    points = [left, right]
    stack = [(left, right)]
    intervals = []
    exhausted = False
    while stack:
        a, b = stack.pop()
        ec = _intersect(a, b)
        if ec is None:
            intervals.append((a, b, None))
            continue
        lc = a.line(ec)
        chord = a.upper + (b.upper - a.upper) * (ec - a.eta0) / (b.eta0 - a.eta0)
        if chord - lc <= tol:
            intervals.append((a, b, ec))
            continue
        if engine.calls >= budget:
            exhausted = True
            intervals.append((a, b, ec))
            continue
        c = engine.chi(ec)
        points.append(c)
        if c.upper - lc <= tol:
            intervals.append((a, b, ec))
        else:
            stack.append((c, b))
            stack.append((a, c))
    points.sort(key=lambda q: q.eta0)
    return points, intervals, exhausted


def _lower_bounds(intervals, ts: np.ndarray) -> np.ndarray:
    """Lower bound on ``h_t`` from the primal supporting lines."""
    lb = np.full(ts.shape, np.inf)
    for a, b, ec in intervals:
        cands = [a.eta0, b.eta0] + ([ec] if ec is not None else [])
        for e in cands:
            env = max(a.line(e), b.line(e))
            lb = np.minimum(lb, env + e * ts)
    return lb


def minimize_dual(G: DirectedGraph, y, t: int, rho: float, warm: DualPoint | None = None,
                  opts: LessOptions | None = None, solver: CutSolver | None = None):
    """Minimise ``g(eta0, eta1) + eta0 * t + eta1 * rho`` over the nonnegative quadrant.

    Returns ``(value, DualPoint, x_star, calls)``; ``value`` is an upper bound
    within ``opts.tol`` of the minimum.
    """
    opts = opts or LessOptions()
    y = np.asarray(y, dtype=float)
    if not 1 <= t <= G.p:
        raise ScanError(f"t must lie in [1, {G.p}], got {t}")
    solver = solver or CutSolver(G, opts.backend)
    engine = _DualEngine(G, y, rho, solver, opts.tol / 4)
    Y = max(float(y.max()), 0.0)
    zero = np.zeros(G.p, dtype=np.int8)
    if Y == 0.0:
        return 0.0, DualPoint(0.0, 0.0), zero, 0
    budget = opts.max_calls_per_t
    a = engine.chi(0.0)
    b = engine.right_end(Y)
    evaluated = [a, b]

    def phi(q: _ChiPoint) -> float:
        return q.upper + q.eta0 * t

    if a.slope + t < 0 and warm is not None and 0.0 < warm.eta0 < Y:
        w = engine.chi(warm.eta0)
        evaluated.append(w)
        if w.slope + t < 0:
            a = w
        else:
            b = w
    if a.slope + t < 0:
        while engine.calls < budget:
            ec = _intersect(a, b)
            if ec is None:
                break
            lc = a.line(ec) + ec * t
            c = engine.chi(ec)
            evaluated.append(c)
            if phi(c) - lc <= opts.tol / 2 or c.slope + t == 0.0:
                break
            if c.slope + t < 0:
                a = c
            else:
                b = c
    best = min(evaluated, key=phi)
    return phi(best), DualPoint(best.eta0, best.eta1), best.x, engine.calls


def _less_sweep(G, y, rho, opts, solver):
    p = G.p
    ts = np.arange(1, p + 1, dtype=float)
    Y = max(float(y.max()), 0.0)
    engine = _DualEngine(G, y, rho, solver, opts.tol / 4)
    if Y == 0.0:
        zero = np.zeros(p, dtype=np.int8)
        rows = [TraceRow(int(t), 0.0, 0.0, 0.0, 0) for t in ts]
        return rows, [zero] * p, 0, False, 0.0
    points, intervals, exhausted = _sweep(engine, Y, opts.tol / 2, opts.max_calls_per_t * p)
    U = np.array([q.upper for q in points])
    E = np.array([q.eta0 for q in points])
    H = U[:, None] + E[:, None] * ts[None, :]
    k_best = np.argmin(H, axis=0)
    h = H[k_best, np.arange(p)]
    gap = float(np.max((h - _lower_bounds(intervals, ts)) / np.sqrt(ts)))
    rows = [TraceRow(i + 1, float(h[i]), points[k].eta0, points[k].eta1, points[k].calls)
            for i, k in enumerate(k_best)]
    xs = [points[k].x for k in k_best]
    return rows, xs, engine.calls, exhausted, max(gap, 0.0)


def _less_per_t(G, y, rho, opts):
    p = G.p
    rows, xs = [], []
    calls_total = 0
    exhausted = False
    if opts.parallel:
        def job(t):
            return minimize_dual(G, y, t, rho, None, opts, CutSolver(G, opts.backend))
        with ThreadPoolExecutor(max_workers=opts.workers) as ex:
            results = list(ex.map(job, range(1, p + 1)))
    else:
        solver = CutSolver(G, opts.backend)
        results, warm = [], None
        for t in range(1, p + 1):
            r = minimize_dual(G, y, t, rho, warm, opts, solver)
            warm = r[1]
            results.append(r)
    for t, (val, dp, x, calls) in enumerate(results, start=1):
        rows.append(TraceRow(t, float(val), dp.eta0, dp.eta1, calls))
        xs.append(x)
        calls_total += calls
        exhausted |= calls >= opts.max_calls_per_t
    return rows, xs, calls_total, exhausted, float("nan") if exhausted else 0.0


def less(G: DirectedGraph, y, rho: float, opts: LessOptions | None = None,
         solver: CutSolver | None = None) -> DetectionResult:
    """Lovasz extended scan statistic, ``max_t h_t / sqrt(t)`` clamped at zero."""
    opts = opts or LessOptions()
    y = np.asarray(y, dtype=float)
    if y.shape != (G.p,):
        raise ScanError(f"y must have length {G.p}")
    if not np.all(np.isfinite(y)):
        raise ScanError("y must be finite")
    if rho < 0:
        raise ScanError("rho must be nonnegative")
    if opts.two_sided:
        one = replace_opts(opts, two_sided=False)
        r_pos, r_neg = less(G, y, rho, one, solver), less(G, -y, rho, one, solver)
        best = r_pos if r_pos.statistic >= r_neg.statistic else r_neg
        best.note = "two-sided"
        best.flow_calls = r_pos.flow_calls + r_neg.flow_calls
        return best
    if opts.method == "sweep":
        solver = solver or CutSolver(G, opts.backend)
        rows, xs, calls, exhausted, gap = _less_sweep(G, y, rho, opts, solver)
    elif opts.method == "per-t":
        rows, xs, calls, exhausted, gap = _less_per_t(G, y, rho, opts)
    else:
        raise ScanError(f"unknown LESS method {opts.method!r}")
    scaled = np.array([r.value / math.sqrt(r.t) for r in rows])
    i = int(np.argmax(scaled))
    stat = max(float(scaled[i]), 0.0)
    return DetectionResult(
        statistic=stat,
        method="less",
        best_t=rows[i].t,
        best_dual=DualPoint(rows[i].eta0, rows[i].eta1),
        best_x=xs[i],
        trace=rows,
        approximate=exhausted,
        gap=gap,
        flow_calls=calls,
    )


def replace_opts(opts: LessOptions, **kw) -> LessOptions:
    return replace(opts, **kw)


def less_statistic(G: DirectedGraph, y, rho: float, opts: LessOptions | None = None,
                   solver: CutSolver | None = None) -> float:
    return less(G, y, rho, opts, solver).statistic
