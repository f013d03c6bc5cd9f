import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairassign.errors import DegenerateMixing, EmptyMixingScope, GraphError
from fairassign.netcore import (
    AttributedGraph,
    Position,
    assortativity,
    build_mixing_matrix,
    graph_assortativity,
    hop_distances,
    neighbor_class_counts,
)

from conftest import make_graph


def test_path_of_three_mixed():
    # U = [[1/2, 1/4], [1/4, 0]] -> r = (1/2 - 5/8) / (3/8)
    g = make_graph([0, 0, 1], [(0, 1), (1, 2)])
    mix = build_mixing_matrix(g)
    np.testing.assert_allclose(mix.entries, [[0.5, 0.25], [0.25, 0.0]])
    assert graph_assortativity(g) == pytest.approx(-1 / 3, abs=1e-12)


def test_segregated_and_bipartite_extremes():
    seg = make_graph([0, 0, 1, 1], [(0, 1), (2, 3)])
    assert graph_assortativity(seg) == 1.0
    cross = make_graph([0, 1, 0, 1], [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert graph_assortativity(cross) == -1.0


def test_single_class_is_degenerate():
    g = make_graph([0, 0, 0], [(0, 1), (1, 2)])
    with pytest.raises(DegenerateMixing):
        graph_assortativity(g)


def test_open_nodes_excluded_when_restricted():
    g = make_graph([0, None, 1], [(0, 1), (1, 2)])
    with pytest.raises(EmptyMixingScope):
        build_mixing_matrix(g, restrict_to_filled=True)


def test_graph_validation():
    with pytest.raises(GraphError):
        make_graph([0, 0], [(0, 0)])
    with pytest.raises(GraphError):
        make_graph([0, 0], [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        make_graph([0, 2], [(0, 1)])
    with pytest.raises(GraphError):
        AttributedGraph([Position("a", "filled", None)], [], 2)
    with pytest.raises(GraphError):
        AttributedGraph([Position("a", "filled", 0)], [("a", "b")], 2)


def test_neighbor_counts_and_distances():
    g = make_graph([0, None, 1, 1], [(0, 1), (1, 2), (1, 3), (2, 3)])
    assert neighbor_class_counts(g, "n1") == [1, 2]
    assert hop_distances(g, "n0") == {"n0": 0, "n1": 1, "n2": 2, "n3": 2}


def test_with_classes_fills_open_position():
    g = make_graph([0, None], [(0, 1)])
    filled = g.with_classes({"n1": 1})
    assert filled.position("n1").class_index == 1 and not filled.position("n1").is_open
    assert graph_assortativity(filled) == -1.0


@st.composite
def attributed_graphs(draw):
    n = draw(st.integers(3, 25))
    k = draw(st.integers(2, 4))
    classes = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=60, unique=True))
    return make_graph(classes, edges, k), classes, edges


@settings(max_examples=150, deadline=None)
@given(attributed_graphs())
def test_matches_networkx(data):
    g, classes, edges = data
    nxg = nx.Graph()
    nxg.add_nodes_from((i, {"c": c}) for i, c in enumerate(classes))
    nxg.add_edges_from(edges)
    try:
        ours = graph_assortativity(g)
    except DegenerateMixing:
        used = {classes[a] for e in edges for a in e}
        assert len(used) == 1
        return
    assert ours == pytest.approx(nx.attribute_assortativity_coefficient(nxg, "c"), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(attributed_graphs())
def test_mixing_matrix_is_symmetric_distribution(data):
    g, _, _ = data
    u = build_mixing_matrix(g).entries
    assert u.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(u, u.T)
    try:
        assert -1 - 1e-12 <= assortativity(build_mixing_matrix(g)) <= 1 + 1e-12
    except DegenerateMixing:
        pass
