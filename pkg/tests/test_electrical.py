import math

import mpmath
import networkx as nx
import numpy as np
import pytest

from graphscan.electrical import (ThresholdReport, WilsonSampler, boundary_resistance,
                                  effective_resistance, gss_threshold, laplacian, less_threshold,
                                  r_class_bound, r_class_exact, resistance_table)
from graphscan.graph import GraphError, build_graph, from_undirected
from graphscan.models import complete_graph, cycle_graph, stream, torus_graph


def random_connected(rng, p, extra=0.2, weighted=False):
    edges = {(int(rng.integers(i)), i) for i in range(1, p)}  # random tree
    for u in range(p):
        for v in range(u + 1, p):
            if rng.random() < extra:
                edges.add((u, v))
    return from_undirected(p, [(u, v, float(rng.uniform(0.2, 3)) if weighted else 1.0)
                               for u, v in sorted(edges)])


def pinv_resistance(G, u, v):
    Lp = np.linalg.pinv(laplacian(G))
    return Lp[u, u] + Lp[v, v] - 2 * Lp[u, v]


def test_triangle():
    G = cycle_graph(3)
    tab = resistance_table(G)
    assert np.allclose(tab.resistance, 2 / 3, atol=1e-12)
    assert tab.edge_sum() == pytest.approx(2.0, abs=1e-12)


def test_path_resistance_is_series_sum():
    G = from_undirected(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 4.0)])
    assert effective_resistance(G, 0, 3) == pytest.approx(1 + 2 + 0.25, abs=1e-12)
    assert effective_resistance(G, 2, 2) == 0.0


def test_matches_networkx_and_pinv():
    rng = np.random.default_rng(4)
    for _ in range(10):
        G = random_connected(rng, int(rng.integers(3, 20)), weighted=True)
        tab = resistance_table(G)
        H = nx.Graph()
        H.add_weighted_edges_from(G.edges())
        for e, (u, v) in enumerate(zip(G.tails.tolist(), G.heads.tolist())):
            ref = nx.resistance_distance(H, u, v, weight="weight", invert_weight=False)
            assert tab.resistance[e] == pytest.approx(ref, abs=1e-8)
            assert tab.resistance[e] == pytest.approx(pinv_resistance(G, u, v), abs=1e-10)
        u, v = 0, G.p - 1
        assert effective_resistance(G, u, v) == pytest.approx(tab.pair(u, v), abs=1e-10)


@pytest.mark.parametrize("p", [5, 17, 40])
def test_foster(p):
    G = random_connected(np.random.default_rng(p), p)
    assert resistance_table(G).edge_sum() == pytest.approx(p - 1, abs=1e-8)


def test_complete_graph_resistance():
    tab = resistance_table(complete_graph(6))
    assert np.allclose(tab.resistance, 2 / 6, atol=1e-12)


def test_torus_edge_transitive():
    tab = resistance_table(torus_graph(15))
    assert np.allclose(tab.resistance, 224 / 450, atol=1e-8)


def test_directed_graph_uses_symmetrised_weights():
    G = build_graph(3, [(0, 1, 2.0), (1, 2, 2.0)])
    tab = resistance_table(G)
    assert tab.symmetrized
    # each edge has conductance (2 + 0) / 2 = 1
    assert np.allclose(tab.resistance, 1.0)


def test_disconnected_rejected():
    with pytest.raises(GraphError, match="connected"):
        resistance_table(from_undirected(3, [(0, 1, 1.0)]))


def test_resistance_csv(tmp_path):
    tab = resistance_table(cycle_graph(3))
    tab.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "tail,head,weight,resistance"
    assert len(lines) == 1 + 6


def test_boundary_resistance_and_class_bounds():
    G = cycle_graph(6)
    tab = resistance_table(G)
    r_e = 5 / 6
    assert boundary_resistance(G, [0, 1, 2], tab) == pytest.approx(2 * r_e)
    assert r_class_exact(G, 2.0, tab) == pytest.approx(2 * r_e)
    assert r_class_bound(G, 2.0, tab) == pytest.approx(2 * r_e)
    assert r_class_bound(G, 0.0, tab) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(5):
        H = random_connected(rng, 8, weighted=True)
        rho = float(rng.uniform(0.5, 4))
        assert r_class_exact(H, rho) <= r_class_bound(H, rho) + 1e-12


def _gss_ref(p, r, a):
    p, r, a = mpmath.mpf(p), mpmath.mpf(r), mpmath.mpf(a)
    return ((mpmath.sqrt(r) + mpmath.sqrt(mpmath.log(p) / 2)) * mpmath.sqrt(2 * mpmath.log(p - 1))
            + mpmath.sqrt(2 * mpmath.log(2)) + mpmath.sqrt(2 * mpmath.log(1 / a)))


def _less_ref(p, r, a):
    p, r, a = mpmath.mpf(p), mpmath.mpf(r), mpmath.mpf(a)
    lp = mpmath.log(p)
    R = (mpmath.sqrt(r) + mpmath.sqrt(lp / 2)) ** 2
    return ((mpmath.log(2 * p) + 1) / mpmath.sqrt(R * lp) + 2 * mpmath.sqrt(R * lp)
            + mpmath.sqrt(2 * lp) + mpmath.sqrt(2 * mpmath.log(1 / a)))


@pytest.mark.parametrize("p, r, a", [(2, 0.0, 0.05), (225, 7.97, 0.05), (16, 3.2, 0.01), (1000, 50.0, 0.2)])
def test_thresholds_against_high_precision(p, r, a):
    assert gss_threshold(p, r, a) == pytest.approx(float(_gss_ref(p, r, a)), rel=1e-13)
    assert less_threshold(p, r, a) == pytest.approx(float(_less_ref(p, r, a)), rel=1e-13)


def test_threshold_regression_values():
    assert gss_threshold(2, 0.0, 0.05) == pytest.approx(3.625156853196291, rel=1e-14)
    assert less_threshold(225, 7.97, 0.05) == pytest.approx(27.222306615549858, rel=1e-14)


def test_threshold_alpha_one_drops_last_term():
    full = less_threshold(100, 4.0, 0.05)
    assert less_threshold(100, 4.0, 1.0) == pytest.approx(full - math.sqrt(2 * math.log(20)))


@pytest.mark.parametrize("args", [(1, 1.0, 0.05), (10, -1.0, 0.05), (10, 1.0, 0.0), (10, 1.0, 1.5)])
def test_threshold_domain(args):
    with pytest.raises(ValueError):
        gss_threshold(*args)
    with pytest.raises(ValueError):
        less_threshold(*args)


def test_threshold_report_render():
    rep = ThresholdReport.build(225, 7.97, 0.05, rho=16)
    text = rep.render()
    assert "less_threshold = 27.2223" in text
    assert "rho = 16" in text


def test_wilson_tree_shape():
    G = torus_graph(4)
    S = WilsonSampler(G)
    rng = stream(1)
    for _ in range(20):
        T = S.sample(rng)
        assert T.shape == (15, 2)
        H = nx.Graph(T.tolist())
        assert nx.is_tree(H) and H.number_of_nodes() == 16
        assert all(G.weights[(G.tails == u) & (G.heads == v)].size == 1 for u, v in T)


def test_wilson_triangle_uniform():
    S = WilsonSampler(cycle_graph(3))
    rng = stream(9)
    counts = {}
    n = 6000
    for _ in range(n):
        key = tuple(map(tuple, S.sample(rng)))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 3
    se = math.sqrt(n * (1 / 3) * (2 / 3))
    assert all(abs(c - n / 3) < 4 * se for c in counts.values())


def test_wilson_reproducible():
    S = WilsonSampler(torus_graph(3))
    assert np.array_equal(S.sample(stream(5)), S.sample(stream(5)))
