"""Independent reference computations for small instances.

These never touch the cut machinery: exhaustive enumeration over
``{0,1}^p`` and a linear program for the continuous LESS primal.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from .graph import DirectedGraph


def binary_cube(p: int) -> np.ndarray:
    return np.array(list(itertools.product([0, 1], repeat=p)), dtype=float)


def cube_cuts(G: DirectedGraph, X: np.ndarray) -> np.ndarray:
    return (X[:, G.tails] * (1 - X[:, G.heads])) @ G.weights


def g_bruteforce(G: DirectedGraph, y, eta0: float, eta1: float) -> float:
    X = binary_cube(G.p)
    vals = X @ (np.asarray(y, dtype=float) - eta0) - eta1 * cube_cuts(G, X)
    return float(vals.max())


def integral_primal(G: DirectedGraph, y, t: int, rho: float) -> float:
    """``max y.1_C`` over ``|C| <= t`` and ``out(C) <= rho`` (empty set allowed)."""
    X = binary_cube(G.p)
    ok = (X.sum(axis=1) <= t) & (cube_cuts(G, X) <= rho + 1e-12)
    return float((X[ok] @ np.asarray(y, dtype=float)).max())


def less_primal_lp(G: DirectedGraph, y, t: float, rho: float) -> float:
    """``max y.x`` over ``x`` in ``[0,1]^p`` with ``sum(x) <= t`` and Lovasz cut ``<= rho``.

    The positive parts are linearised with one slack per arc.
    """
    y = np.asarray(y, dtype=float)
    p, m = G.p, G.m
    c = np.concatenate([-y, np.zeros(m)])
    rows, rhs = [], []
    for e in range(m):
        r = np.zeros(p + m)
        r[G.tails[e]] += 1.0
        r[G.heads[e]] -= 1.0
        r[p + e] = -1.0
        rows.append(r)
        rhs.append(0.0)
    r = np.zeros(p + m)
    r[p:] = G.weights
    rows.append(r)
    rhs.append(rho)
    r = np.zeros(p + m)
    r[:p] = 1.0
    rows.append(r)
    rhs.append(t)
    bounds = [(0.0, 1.0)] * p + [(0.0, None)] * m
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    return float(-res.fun)


def less_lp(G: DirectedGraph, y, rho: float) -> float:
    return max(0.0, max(less_primal_lp(G, y, t, rho) / math.sqrt(t) for t in range(1, G.p + 1)))
