import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphscan.graph import (Cluster, GraphError, all_subsets, build_graph, from_undirected,
                             incidence_image, lovasz_extension_generic, lovasz_out, out_weight,
                             read_edgelist, undirected_cut, write_edgelist)


@st.composite
def digraphs(draw, max_p=7):
    p = draw(st.integers(2, max_p))
    pairs = [(u, v) for u in range(p) for v in range(p) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    ws = draw(st.lists(st.floats(0.1, 2.0), min_size=len(chosen), max_size=len(chosen)))
    return build_graph(p, [(u, v, w) for (u, v), w in zip(chosen, ws)])


def test_path_out_weight():
    G = from_undirected(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert out_weight(G, [0, 1]) == 1.0
    assert out_weight(G, [1]) == 2.0
    assert out_weight(G, []) == 0.0
    assert out_weight(G, [0, 1, 2]) == 0.0


def test_directed_out_is_one_sided():
    G = build_graph(2, [(0, 1, 3.0)])
    assert out_weight(G, [0]) == 3.0
    assert out_weight(G, [1]) == 0.0


@pytest.mark.parametrize("arcs, msg", [
    ([(0, 0, 1.0)], "self-loop"),
    ([(0, 1, 0.0)], "nonpositive"),
    ([(0, 1, -1.0)], "nonpositive"),
    ([(0, 5, 1.0)], "outside"),
    ([(0, 1, 1.0), (0, 1, 2.0)], "duplicate"),
])
def test_build_graph_rejects(arcs, msg):
    with pytest.raises(GraphError, match=msg):
        build_graph(3, arcs)


def test_connectivity_flag():
    assert from_undirected(3, [(0, 1, 1.0), (1, 2, 1.0)]).connected
    assert not from_undirected(3, [(0, 1, 1.0)]).connected
    # weak connectivity for directed graphs
    assert build_graph(3, [(0, 1, 1.0), (2, 1, 1.0)]).connected


def test_cluster_records_boundary():
    G = from_undirected(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0)])
    C = Cluster.of(G, [2, 1, 1])
    assert C.members == (1, 2)
    assert C.boundary_weight == 2.0
    assert len(C) == 2
    assert C.indicator(4).tolist() == [0, 1, 1, 0]


def test_undirected_out_matches_plain_cut():
    edges = [(0, 1, 1.5), (1, 2, 0.5), (0, 3, 2.0), (2, 3, 1.0)]
    G = from_undirected(4, edges)
    for C in all_subsets(4):
        assert out_weight(G, C) == pytest.approx(undirected_cut(4, edges, C), abs=0)


@settings(max_examples=60, deadline=None)
@given(digraphs())
def test_lovasz_on_indicators_equals_cut(G):
    for C in all_subsets(G.p):
        x = np.zeros(G.p)
        x[list(C)] = 1.0
        assert lovasz_out(G, x) == out_weight(G, C)


@settings(max_examples=60, deadline=None)
@given(digraphs(), st.data())
def test_lovasz_generic_matches_arc_sum(G, data):
    x = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=G.p, max_size=G.p)))
    F = lambda S: out_weight(G, sorted(S))  # noqa: E731
    assert lovasz_extension_generic(F, x) == pytest.approx(lovasz_out(G, x), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(digraphs(), st.data())
def test_out_is_submodular(G, data):
    A = set(data.draw(st.lists(st.integers(0, G.p - 1), unique=True)))
    B = set(data.draw(st.lists(st.integers(0, G.p - 1), unique=True)))
    lhs = out_weight(G, A) + out_weight(G, B)
    rhs = out_weight(G, A | B) + out_weight(G, A & B)
    assert lhs >= rhs - 1e-12


def test_incidence_sign_convention():
    G = build_graph(2, [(0, 1, 2.0)])
    assert incidence_image(G, [1.0, 0.25]).tolist() == [1.5]
    assert lovasz_out(G, [0.25, 1.0]) == 0.0


def test_lovasz_generic_tie_break_is_irrelevant_for_value():
    G = from_undirected(3, [(0, 1, 1.0), (1, 2, 1.0)])
    F = lambda S: out_weight(G, sorted(S))  # noqa: E731
    x = np.array([0.5, 0.5, 0.5])
    assert lovasz_extension_generic(F, x) == 0.0


@pytest.mark.parametrize("undirected", [True, False])
def test_edgelist_round_trip(tmp_path, undirected):
    rng = np.random.default_rng(3)
    if undirected:
        G = from_undirected(5, [(u, v, float(rng.uniform(0.1, 2))) for u, v in
                                itertools.combinations(range(5), 2) if rng.random() < 0.6])
    else:
        G = build_graph(5, [(u, v, float(rng.uniform(0.1, 2))) for u in range(5) for v in range(5)
                            if u != v and rng.random() < 0.4])
    path = tmp_path / "g.txt"
    write_edgelist(G, path)
    H = read_edgelist(path)
    assert H.p == G.p and H.undirected == G.undirected
    assert sorted(H.arcs()) == sorted(G.arcs())


def test_edgelist_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 1\n0 1 1.0\n")
    with pytest.raises(GraphError, match="header"):
        read_edgelist(path)
    path.write_text("3 2 undirected\n0 1 1.0\n")
    with pytest.raises(GraphError, match="announces"):
        read_edgelist(path)
