"""Monte Carlo null/alternative simulation, ROC/AUC and the three-panel experiment.

Every trial draws from its own counter-based stream keyed by
``(seed, arm, trial)``, so results do not depend on how trials are scheduled.
"""
from __future__ import annotations

import configparser
import csv
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .electrical import gss_threshold, less_threshold, r_class_bound, resistance_table
from .flow import CutSolver
from .graph import Cluster, DirectedGraph
from .models import (ball_cluster, connected_geometric, cycle_graph, complete_graph, grid_graph,
                     make_signal, observe, stream, torus_graph)
from .scan import GSSScanner, LessOptions, less, max_test, sum_test

NULL_ARM, ALT_ARM, CLUSTER_ARM = 0, 1, 2
DETECTORS = ("less", "max", "sum", "gss")
BASELINE_NOTE = ("published spectral-scan and UST-wavelet baselines are not implemented; "
                 "max and sum tests are reported in their place")

PANELS = {
    "torus": {"family": "torus", "side": 15, "mu": 4.0},
    "knn": {"family": "knn", "n": 225, "k": 4, "mu": 4.0},
    "epsilon": {"family": "epsilon", "n": 225, "eps": 225 ** (-1 / 3), "mu": 3.0},
}


class ExperimentError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    family: str = "torus"
    side: int = 15
    n: int = 225
    k: int = 4
    eps: float = 225 ** (-1 / 3)
    dim: int = 2
    graph_seed: int | None = None
    mu: float = 4.0
    cluster_size: int = 15
    fixed_cluster: bool = False
    rho: str | float = "oracle"
    detectors: tuple[str, ...] = ("less", "max", "sum")
    trials: int = 200
    alpha: float = 0.05
    seed: int = 0
    tol: float = 1e-6
    panel: str = ""
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.rho != "oracle":
            self.rho = float(self.rho)
            if self.rho < 0:
                raise ValueError("fixed rho must be nonnegative")
        bad = [d for d in self.detectors if d not in DETECTORS]
        if bad:
            raise ValueError(f"unknown detectors {bad}; choose from {DETECTORS}")
        self.detectors = tuple(self.detectors)

    @classmethod
    def for_panel(cls, panel: str, **overrides) -> "ExperimentConfig":
        if panel not in PANELS:
            raise ValueError(f"unknown panel {panel!r}; choose from {sorted(PANELS)}")
        base = dict(PANELS[panel], panel=panel)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    @classmethod
    def from_ini(cls, path) -> "ExperimentConfig":
        """Read ``[graph]``, ``[signal]``, ``[experiment]`` and ``[less]`` sections."""
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        if not cp.read(path):
            raise FileNotFoundError(path)
        known = {"graph", "signal", "experiment", "less"}
        unknown = set(cp.sections()) - known
        if unknown:
            raise ValueError(f"{path}: unknown sections {sorted(unknown)}")
        kw: dict = {}
        g = cp["graph"] if cp.has_section("graph") else {}
        for key, conv in (("family", str), ("side", int), ("n", int), ("k", int),
                          ("eps", float), ("dim", int), ("graph_seed", int)):
            if key in g:
                kw[key] = conv(g[key])
        s = cp["signal"] if cp.has_section("signal") else {}
        if "mu" in s:
            kw["mu"] = float(s["mu"])
        if "cluster_size" in s:
            kw["cluster_size"] = int(s["cluster_size"])
        if "fixed_cluster" in s:
            kw["fixed_cluster"] = cp.getboolean("signal", "fixed_cluster")
        if "rho" in s:
            kw["rho"] = s["rho"].strip()
        e = cp["experiment"] if cp.has_section("experiment") else {}
        for key, conv in (("trials", int), ("alpha", float), ("seed", int), ("panel", str),
                          ("threads", int)):
            if key in e:
                kw[key] = conv(e[key])
        if "detectors" in e:
            kw["detectors"] = tuple(d.strip() for d in e["detectors"].split(",") if d.strip())
        if cp.has_section("less") and "tol" in cp["less"]:
            kw["tol"] = float(cp["less"]["tol"])
        return cls(**kw)


def build_graph_for(cfg: ExperimentConfig) -> DirectedGraph:
    gseed = cfg.seed if cfg.graph_seed is None else cfg.graph_seed
    if cfg.family == "torus":
        return torus_graph(cfg.side)
    if cfg.family == "knn":
        return connected_geometric("knn", cfg.n, cfg.k, gseed, cfg.dim)[0]
    if cfg.family == "epsilon":
        return connected_geometric("epsilon", cfg.n, cfg.eps, gseed, cfg.dim)[0]
    if cfg.family == "cycle":
        return cycle_graph(cfg.n)
    if cfg.family == "complete":
        return complete_graph(cfg.n)
    if cfg.family == "grid":
        return grid_graph(cfg.side, cfg.side)
    raise ValueError(f"unknown graph family {cfg.family!r}")


# ---------------------------------------------------------------------------
# simulation


@dataclass
class SimulationResult:
    config: ExperimentConfig
    null: dict[str, np.ndarray]
    alt: dict[str, np.ndarray]
    rho: np.ndarray
    note: str = BASELINE_NOTE


class _Worker:
    """Per-thread detector state (cut solver and cached GSS scanners)."""

    def __init__(self, G: DirectedGraph, cfg: ExperimentConfig):
        self.G, self.cfg = G, cfg
        self._local = threading.local()
        self.opts = LessOptions(tol=cfg.tol)
        self.fixed = ball_cluster(G, 0, cfg.cluster_size) if cfg.fixed_cluster else None

    def _solver(self) -> CutSolver:
        s = getattr(self._local, "solver", None)
        if s is None:
            s = self._local.solver = CutSolver(self.G)
            self._local.gss = {}
        return s

    def cluster(self, trial: int) -> Cluster:
        if self.fixed is not None:
            return self.fixed
        rng = stream(self.cfg.seed, CLUSTER_ARM, trial)
        return ball_cluster(self.G, int(rng.integers(self.G.p)), self.cfg.cluster_size)

    def stats(self, y: np.ndarray, rho: float) -> list[float]:
        solver = self._solver()
        out = []
        for d in self.cfg.detectors:
            if d == "less":
                out.append(less(self.G, y, rho, self.opts, solver).statistic)
            elif d == "max":
                out.append(max_test(y))
            elif d == "sum":
                out.append(sum_test(y))
            else:
                cache = self._local.gss
                if rho not in cache:
                    cache[rho] = GSSScanner(self.G, rho)
                out.append(cache[rho].statistic(y))
        return out

    def __call__(self, job: tuple[int, int]):
        arm, trial = job
        try:
            C = self.cluster(trial)
            rho = C.boundary_weight if self.cfg.rho == "oracle" else float(self.cfg.rho)
            signal = make_signal(C, self.cfg.mu, self.G.p) if arm == ALT_ARM else None
            y = observe(signal, stream(self.cfg.seed, arm, trial), self.G.p)
            return rho, self.stats(y, rho)
        except Exception as exc:
            raise ExperimentError(f"{'alt' if arm else 'null'} trial {trial} failed: {exc}") from exc


def _run_jobs(fn: Callable, jobs: Sequence, threads: int) -> list:
    if threads <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, jobs))


def simulate(cfg: ExperimentConfig, G: DirectedGraph | None = None) -> SimulationResult:
    """Detector statistics on ``cfg.trials`` null and ``cfg.trials`` alternative draws.

    Null trial ``i`` uses the same cluster (hence the same oracle ``rho``) as
    alternative trial ``i``, so both arms see identical detector settings.
    """
    G = G or build_graph_for(cfg)
    worker = _Worker(G, cfg)
    jobs = [(arm, i) for arm in (NULL_ARM, ALT_ARM) for i in range(cfg.trials)]
    res = _run_jobs(worker, jobs, cfg.threads)
    T = cfg.trials
    stats = np.array([r[1] for r in res]).reshape(2, T, len(cfg.detectors))
    rho = np.array([r[0] for r in res[T:]])
    null = {d: stats[0, :, j] for j, d in enumerate(cfg.detectors)}
    alt = {d: stats[1, :, j] for j, d in enumerate(cfg.detectors)}
    return SimulationResult(cfg, null, alt, rho)


# ---------------------------------------------------------------------------
# ROC and risk


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float
    n_null: int
    n_alt: int

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fpr", "tpr"])
            for a, b in self.points():
                w.writerow([repr(a), repr(b)])


def roc(null, alt) -> RocCurve:
    """Reject when ``stat >= threshold``; thresholds sweep the pooled distinct values."""
    null = np.asarray(null, dtype=float)
    alt = np.asarray(alt, dtype=float)
    if null.size == 0 or alt.size == 0:
        raise ValueError("roc needs nonempty null and alternative samples")
    pooled = np.unique(np.concatenate([null, alt]))[::-1]
    ns, as_ = np.sort(null), np.sort(alt)
    fp = null.size - np.searchsorted(ns, pooled, side="left")
    tp = alt.size - np.searchsorted(as_, pooled, side="left")
    fpr = np.concatenate([[0.0], fp / null.size])
    tpr = np.concatenate([[0.0], tp / alt.size])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocCurve(fpr, tpr, auc, int(null.size), int(alt.size))


def empirical_risk(null, alt, threshold: float) -> float:
    """Type-1 rate (null above threshold) plus type-2 rate (alt at or below it)."""
    if math.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    null = np.asarray(null, dtype=float)
    alt = np.asarray(alt, dtype=float)
    return float(np.mean(null > threshold) + np.mean(alt <= threshold))


def type1_calibration(G: DirectedGraph, detector: Callable[[np.ndarray], float],
                      threshold: float | Callable[[], float], alpha: float, trials: int,
                      seed: int, threads: int = 1) -> float:
    """Fraction of ``trials`` pure-noise draws with ``detector(y) > threshold``.

    ``alpha`` is only validated here; it is already baked into ``threshold``.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    thr = threshold() if callable(threshold) else float(threshold)
    values = _run_jobs(lambda i: detector(observe(None, stream(seed, NULL_ARM, i), G.p)),
                       range(trials), threads)
    return float(np.mean(np.asarray(values) > thr))


def default_thresholds(G: DirectedGraph, rho: float, alpha: float) -> dict[str, float]:
    """Level-alpha bounds using ``r_class = rho * max_e r_e``."""
    r_cls = r_class_bound(G, rho, resistance_table(G))
    return {"gss": gss_threshold(G.p, r_cls, alpha), "less": less_threshold(G.p, r_cls, alpha)}


# ---------------------------------------------------------------------------
# three-panel experiment


@dataclass
class PanelResult:
    panel: str
    config: ExperimentConfig
    curves: dict[str, RocCurve] = field(default_factory=dict)
    simulation: SimulationResult | None = None

    @property
    def auc(self) -> dict[str, float]:
        return {d: c.auc for d, c in self.curves.items()}


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> PanelResult:
    sim = simulate(cfg)
    name = cfg.panel or cfg.family
    res = PanelResult(name, cfg, {d: roc(sim.null[d], sim.alt[d]) for d in cfg.detectors}, sim)
    if out_dir is not None:
        write_outputs([res], out_dir)
    return res


def fig1_experiment(panel: str, seed: int = 0, trials: int = 200, mu: float | None = None,
                    out_dir=None, threads: int = 1) -> PanelResult:
    """LESS against the max and sum tests on one of the torus, kNN or epsilon panels."""
    cfg = ExperimentConfig.for_panel(panel, seed=seed, trials=trials, mu=mu, threads=threads)
    return run_experiment(cfg, out_dir)


def write_outputs(results: Sequence[PanelResult], out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        for d, c in r.curves.items():
            c.write_csv(out / f"roc_{r.panel}_{d}.csv")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["panel", "detector", "auc", "trials", "seed"])
        for r in results:
            for d, c in r.curves.items():
                w.writerow([r.panel, d, repr(c.auc), r.config.trials, r.config.seed])
    (out / "NOTE.txt").write_text(BASELINE_NOTE + "\n")


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
