"""``graphscan`` command-line interface."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import electrical, harness, models, scan
from .graph import GraphError, read_edgelist, write_edgelist
from .oracles import less_lp


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("LESS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"LESS_SEED must be an integer, got {env!r}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not np.isfinite(v) or v < 0:
        raise argparse.ArgumentTypeError(f"expected a finite nonnegative number, got {text}")
    return v


def _read_y(path: str, p: int) -> np.ndarray:
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    vals = [float(ln) for ln in Path(path).read_text().split() if ln.strip()]
    if len(vals) != p:
        raise UsageError(f"{path}: expected {p} values, found {len(vals)}")
    return np.array(vals)


# ---------------------------------------------------------------------------
# subcommands


def cmd_graphgen(args) -> int:
    fam = args.family
    seed = _seed(args)
    if fam == "torus":
        if args.side is None or args.side < 2:
            raise UsageError("--family torus needs --side >= 2")
        G = models.torus_graph(args.side)
    elif fam in ("knn", "epsilon"):
        if args.n is None:
            raise UsageError(f"--family {fam} needs --n")
        if fam == "knn":
            if args.k is None:
                raise UsageError("--family knn needs --k")
            pts = models.sample_points(args.n, args.dim, seed)
            G = models.knn_graph(pts, args.k)
        else:
            if args.eps is None or args.eps <= 0:
                raise UsageError("--family epsilon needs --eps > 0")
            pts = models.sample_points(args.n, args.dim, seed)
            G = models.epsilon_graph(pts, args.eps)
        if args.points:
            pts.write_csv(args.points)
    elif fam in ("cycle", "complete"):
        if args.n is None:
            raise UsageError(f"--family {fam} needs --n")
        G = models.cycle_graph(args.n) if fam == "cycle" else models.complete_graph(args.n)
    else:
        if args.side is None or args.side < 1:
            raise UsageError("--family grid needs --side >= 1")
        G = models.grid_graph(args.side, args.side)
    if args.output:
        write_edgelist(G, args.output)
    print(f"p = {G.p}")
    print(f"m = {G.n_edges if G.undirected else G.m}")
    print(f"connected = {str(G.connected).lower()}")
    return 0


def cmd_detect(args) -> int:
    G = read_edgelist(args.graph)
    y = _read_y(args.y, G.p)
    if args.method == "less":
        opts = scan.LessOptions(tol=args.tol, two_sided=args.two_sided)
        res = scan.less(G, y, args.rho, opts)
    elif args.method == "gss":
        res = scan.gss_bruteforce(G, y, args.rho, two_sided=args.two_sided)
    elif args.method == "max":
        res = scan.DetectionResult(scan.max_test(y), "max")
    else:
        res = scan.DetectionResult(scan.sum_test(y), "sum")
    print(_fmt(res.statistic))
    if args.trace:
        scan.write_trace_csv(res, args.trace)
    return 0


def cmd_resistance(args) -> int:
    G = read_edgelist(args.graph)
    table = electrical.resistance_table(G)
    for u, v, _ in G.edges():
        print(f"{u} {v} {_fmt(table.pair(u, v))}")
    if args.csv:
        table.write_csv(args.csv)
    return 0


def cmd_threshold(args) -> int:
    if args.r_class is not None:
        r_cls = args.r_class
    elif args.graph:
        if args.rho is None:
            raise UsageError("--graph needs --rho")
        G = read_edgelist(args.graph)
        if G.p != args.p:
            raise UsageError(f"--p {args.p} disagrees with graph size {G.p}")
        r_cls = electrical.r_class_bound(G, args.rho)
    else:
        raise UsageError("threshold needs --r-class or --graph with --rho")
    rep = electrical.ThresholdReport.build(args.p, r_cls, args.alpha, args.rho)
    print(rep.render())
    return 0


def cmd_simulate(args) -> int:
    seed = _seed(args)
    if args.config:
        cfg = harness.ExperimentConfig.from_ini(args.config)
        cfg = harness.with_overrides(cfg, seed=args.seed if args.seed is not None else None,
                                     trials=args.trials, mu=args.mu, threads=args.threads)
        results = [harness.run_experiment(cfg)]
    else:
        panels = list(harness.PANELS) if args.panel == "all" else [args.panel]
        results = [harness.fig1_experiment(pn, seed=seed, trials=args.trials or 200, mu=args.mu,
                                           threads=args.threads or 1) for pn in panels]
    harness.write_outputs(results, args.out)
    for r in results:
        for d, a in r.auc.items():
            print(f"{r.panel} {d} auc = {_fmt(a)}")
    print(f"note: {harness.BASELINE_NOTE}")
    return 0


def cmd_scan_oracle(args) -> int:
    G = read_edgelist(args.graph)
    if G.p > scan.GSS_GUARD:
        raise UsageError(f"scan-oracle enumerates subsets; refused for p={G.p} > {scan.GSS_GUARD}")
    y = _read_y(args.y, G.p)
    gss = scan.gss_bruteforce(G, y, args.rho)
    dual = scan.less(G, y, args.rho)
    print(f"gss = {_fmt(gss.statistic)}")
    print(f"less_dual = {_fmt(dual.statistic)}")
    print(f"less_lp = {_fmt(less_lp(G, y, args.rho))}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphscan", description="Graph-structured anomaly scan tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (fallback: $LESS_SEED, then 0)")

    g = sub.add_parser("graphgen", help="generate a graph edge list")
    g.add_argument("--family", required=True, choices=["torus", "knn", "epsilon", "cycle", "complete", "grid"])
    g.add_argument("--side", type=int)
    g.add_argument("--n", type=_positive_int)
    g.add_argument("--k", type=_positive_int)
    g.add_argument("--eps", type=float)
    g.add_argument("--dim", type=_positive_int, default=2)
    g.add_argument("--points", help="also write the point cloud CSV")
    g.add_argument("-o", "--output")
    add_seed(g)
    g.set_defaults(func=cmd_graphgen)

    d = sub.add_parser("detect", help="compute a detection statistic")
    d.add_argument("--graph", required=True)
    d.add_argument("--y", required=True, help="one value per line")
    d.add_argument("--rho", type=_nonneg_float, default=0.0)
    d.add_argument("--method", choices=["gss", "less", "max", "sum"], default="less")
    d.add_argument("--trace", help="write the per-size trace CSV")
    d.add_argument("--tol", type=float, default=1e-6)
    d.add_argument("--two-sided", action="store_true")
    d.set_defaults(func=cmd_detect)

    r = sub.add_parser("resistance", help="effective resistance of every edge")
    r.add_argument("--graph", required=True)
    r.add_argument("--csv")
    r.set_defaults(func=cmd_resistance)

    t = sub.add_parser("threshold", help="level-alpha null thresholds")
    t.add_argument("--p", type=_positive_int, required=True)
    t.add_argument("--rho", type=_nonneg_float)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--graph")
    t.add_argument("--r-class", type=_nonneg_float)
    t.set_defaults(func=cmd_threshold)

    s = sub.add_parser("simulate", help="run the ROC experiment")
    s.add_argument("--config", help="INI experiment file")
    s.add_argument("--panel", choices=[*harness.PANELS, "all"], default="all")
    s.add_argument("--trials", type=_positive_int)
    s.add_argument("--mu", type=_nonneg_float)
    s.add_argument("--threads", type=_positive_int)
    s.add_argument("--out", default="results")
    add_seed(s)
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("scan-oracle", help="brute-force GSS against LESS (dual and LP)")
    o.add_argument("--graph", required=True)
    o.add_argument("--y", required=True)
    o.add_argument("--rho", type=_nonneg_float, default=0.0)
    o.set_defaults(func=cmd_scan_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"graphscan: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except (UsageError, GraphError, scan.ScanError, ValueError) as exc:
        print(f"graphscan: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    except harness.ExperimentError as exc:
        print(f"graphscan: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
