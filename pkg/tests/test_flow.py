import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphscan.flow import (CutSolver, FlowNetwork, available_backends, g_dual, max_flow,
                            mrf_map)
from graphscan.graph import build_graph, from_undirected
from graphscan.oracles import binary_cube, cube_cuts, g_bruteforce

BACKENDS = available_backends()


def random_graph(rng, p, density=0.5, directed=True):
    if directed:
        arcs = [(u, v, float(rng.uniform(0.1, 2))) for u in range(p) for v in range(p)
                if u != v and rng.random() < density]
        return build_graph(p, arcs)
    edges = [(u, v, float(rng.uniform(0.1, 2))) for u in range(p) for v in range(u + 1, p)
             if rng.random() < density]
    return from_undirected(p, edges)


def energies(G, theta, eta1):
    X = binary_cube(G.p)
    return X @ theta + eta1 * cube_cuts(G, X), X


def test_cython_backend_is_built():
    assert "cython" in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
def test_max_flow_matches_networkx(backend):
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(2, 12))
        arcs = {}
        for a in range(n):
            for b in range(n):
                if a != b and rng.random() < 0.35:
                    arcs[(a, b)] = float(rng.uniform(0, 5))
        net = FlowNetwork(n, [(a, b, c) for (a, b), c in arcs.items()], 0, n - 1)
        D = nx.DiGraph()
        D.add_nodes_from(range(n))
        for (a, b), c in arcs.items():
            D.add_edge(a, b, capacity=c)
        ref = nx.maximum_flow_value(D, 0, n - 1)
        val, side = max_flow(net, backend)
        assert val == pytest.approx(ref, abs=1e-9)
        assert 0 in side and n - 1 not in side
        cut = sum(c for (a, b), c in arcs.items() if a in side and b not in side)
        assert cut == pytest.approx(ref, abs=1e-9)


def test_max_flow_source_side_is_minimal():
    # two parallel unit paths with a tie: any cut of capacity 1 on each path is optimal
    net = FlowNetwork(4, [(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)], 0, 3)
    val, side = max_flow(net)
    assert val == 2.0
    assert side == [0]


def test_flow_network_validation():
    with pytest.raises(ValueError):
        FlowNetwork(2, [], 0, 0)
    with pytest.raises(ValueError):
        FlowNetwork(2, [(0, 1, -1.0)], 0, 1)
    with pytest.raises(ValueError):
        FlowNetwork(2, [(0, 2, 1.0)], 0, 1)


@pytest.mark.parametrize("backend", BACKENDS)
def test_mrf_map_is_minimal_minimiser(backend):
    rng = np.random.default_rng(5)
    for trial in range(120):
        p = int(rng.integers(1, 9))
        G = random_graph(rng, p, directed=bool(trial % 2))
        theta = rng.normal(size=p)
        if trial % 5 == 0:
            theta = np.round(theta)  # provoke ties
        eta1 = float(rng.choice([0.0, rng.uniform(0, 2)]))
        sol = mrf_map(G, theta, eta1, backend)
        E, X = energies(G, theta, eta1)
        best = E.min()
        assert sol.objective == pytest.approx(best, abs=1e-9)
        # every minimiser contains the returned one
        for row in X[E <= best + 1e-9]:
            assert np.all(row >= sol.x)


def test_backends_agree_bitwise():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernel unavailable")
    rng = np.random.default_rng(8)
    G = random_graph(rng, 30, 0.15, directed=False)
    a, b = CutSolver(G, "python"), CutSolver(G, "cython")
    for _ in range(20):
        theta = rng.normal(size=G.p)
        sa, sb = a.solve(theta, 0.7), b.solve(theta, 0.7)
        assert np.array_equal(sa.x, sb.x)
        assert sa.flow_value == sb.flow_value
        assert (sa.pushes, sa.relabels) == (sb.pushes, sb.relabels)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.floats(0, 3), st.floats(0, 3))
def test_g_dual_matches_enumeration(p, seed, eta0, eta1):
    rng = np.random.default_rng(seed)
    G = random_graph(rng, p)
    y = rng.normal(size=p)
    val, x = g_dual(G, y, eta0, eta1)
    assert val == pytest.approx(g_bruteforce(G, y, eta0, eta1), abs=1e-9)
    assert val == pytest.approx(y @ x - eta0 * x.sum() - eta1 * cube_cuts(G, x[None].astype(float))[0],
                                abs=1e-12)


def test_g_dual_rejects_negative_duals():
    G = from_undirected(2, [(0, 1, 1.0)])
    with pytest.raises(ValueError):
        g_dual(G, [1.0, 1.0], -0.1, 0.0)


def test_solver_input_validation():
    S = CutSolver(from_undirected(2, [(0, 1, 1.0)]))
    with pytest.raises(ValueError):
        S.solve([1.0], 0.0)
    with pytest.raises(ValueError):
        S.solve([np.nan, 0.0], 0.0)
    with pytest.raises(ValueError):
        S.solve([1.0, 0.0], -1.0)
    with pytest.raises(ValueError):
        CutSolver(from_undirected(2, [(0, 1, 1.0)]), backend="fortran")


def test_solver_counts_calls_and_energy():
    G = from_undirected(3, [(0, 1, 1.0), (1, 2, 1.0)])
    S = CutSolver(G)
    sol = S.solve(np.array([-2.0, -2.0, 1.0]), 0.5)
    assert S.calls == 1
    assert sol.x.tolist() == [1, 1, 0]
    assert sol.out == 1.0
    assert sol.objective == S.energy(np.array([-2.0, -2.0, 1.0]), 0.5, sol.x) == -3.5
