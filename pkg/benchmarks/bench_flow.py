"""Compare the compiled and pure-Python push-relabel kernels.

Usage: python3 benchmarks/bench_flow.py [--sides 8 15 25] [--repeats 20]
"""
import argparse
import time

import numpy as np

from graphscan.flow import CutSolver, available_backends
from graphscan.models import stream, torus_graph
from graphscan.scan import LessOptions, less


def time_cuts(G, backend, repeats, seed=0):
    solver = CutSolver(G, backend)
    rng = stream(seed)
    thetas = [0.5 - rng.standard_normal(G.p) for _ in range(repeats)]
    start = time.perf_counter()
    xs = [solver.solve(th, 0.8).x for th in thetas]
    return (time.perf_counter() - start) / repeats, xs


def time_less(G, backend, seed=0):
    y = stream(seed, 1).standard_normal(G.p)
    start = time.perf_counter()
    res = less(G, y, 16.0, LessOptions(backend=backend))
    return time.perf_counter() - start, res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sides", type=int, nargs="+", default=[8, 15, 25])
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args(argv)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'graph':>10} {'p':>5} {'backend':>8} {'cut ms':>9} {'LESS ms':>9} {'calls':>6}")
    for side in args.sides:
        G = torus_graph(side)
        ref = None
        for b in backends:
            per_cut, xs = time_cuts(G, b, args.repeats)
            t_less, res = time_less(G, b)
            if ref is None:
                ref = (xs, res.statistic)
            else:
                assert all(np.array_equal(a, c) for a, c in zip(ref[0], xs)), "cuts differ"
                assert ref[1] == res.statistic, "LESS differs"
            print(f"{'torus' + str(side):>10} {G.p:>5} {b:>8} {1e3 * per_cut:>9.3f} "
                  f"{1e3 * t_less:>9.1f} {res.flow_calls:>6}")


if __name__ == "__main__":
    main()
