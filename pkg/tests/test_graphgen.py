import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import to_nx
from percolab.estimators import center
from percolab.graphgen import (
    CombinatorialMap, Graph, GraphFormatError, ball, bfs_distances, build_grid, build_tiling, build_tree,
    dual, from_edges, from_text, growth_rate, to_text,
)


def test_tree_sizes():
    t = build_tree(3, 1)
    assert (t.vertex_count, t.edge_count, t.degrees[0]) == (4, 3, 3)
    assert build_tree(3, 2).vertex_count == 10
    assert build_tree(3, 2).edge_count == 9
    t4 = build_tree(4, 1)
    assert t4.vertex_count == 5 and t4.degrees[0] == 4


@pytest.mark.parametrize("k,depth", [(3, 5), (4, 3), (5, 2)])
def test_tree_level_counts(k, depth):
    t = build_tree(k, depth)
    levels = np.bincount(t.distances_from(0))
    expected = [1] + [k * (k - 1) ** (n - 1) for n in range(1, depth + 1)]
    assert levels.tolist() == expected
    assert nx.is_tree(to_nx(t))
    assert set(t.boundary_vertices.tolist()) == set(np.flatnonzero(t.distances_from(0) == depth).tolist())


def test_grid_shape():
    g = build_grid(4, 5)
    assert g.vertex_count == 20 and g.edge_count == 4 * 4 + 3 * 5
    assert nx.is_isomorphic(to_nx(g), nx.grid_2d_graph(4, 5))


@pytest.mark.parametrize("pq", [(3, 7), (7, 3), (4, 5), (5, 4), (4, 4), (6, 3), (3, 6)])
def test_tiling_degrees_faces_euler(pq):
    p, q = pq
    m = build_tiling(p, q, 2)
    m.validate()
    g = m.graph
    inner = ~g.boundary
    assert set(g.degrees[inner].tolist()) == {q}
    outer = m.outer_face
    sizes = {len(f) for i, f in enumerate(m.faces) if i != outer}
    assert sizes == {p}
    assert m.euler_characteristic() == 2
    assert nx.check_planarity(to_nx(g))[0]


def test_square_tiling_is_grid_like():
    m = build_tiling(4, 4, 3)
    g = m.graph
    assert set(g.degrees[~g.boundary].tolist()) == {4}


def test_dual_degrees_and_faces():
    m = build_tiling(3, 7, 3)
    d = dual(m)
    g = d.graph
    assert set(g.degrees[~g.boundary].tolist()) == {3}
    outer = d.outer_face
    assert {len(f) for i, f in enumerate(d.faces) if i != outer} == {7}
    assert d.euler_characteristic() == 2


@pytest.mark.parametrize("r", [1, 2, 3])
def test_dual_of_73_is_37(r):
    d = dual(build_tiling(7, 3, 4)).graph
    c = center(d)
    b1 = ball(d, c, r)
    b2 = ball(build_tiling(3, 7, r + 1).graph, 0, r)
    assert nx.is_isomorphic(to_nx(b1), to_nx(b2))


def test_square_self_dual():
    d = dual(build_tiling(4, 4, 4)).graph
    c = center(d)
    b = ball(d, c, 2)
    ref = ball(build_tiling(4, 4, 3).graph, 0, 2)
    assert set(d.degrees[~d.boundary].tolist()) == {4}
    assert nx.is_isomorphic(to_nx(b), to_nx(ref))


def test_dual_of_dual_recovers_interior_edges():
    m = build_tiling(3, 7, 3)
    d = dual(m)
    dd = dual(d)
    fv = d.provenance["face_vertex"]
    for e2, (a, b) in enumerate(dd.graph.edges):
        e0 = d.provenance["edge_edge"][dd.provenance["edge_edge"][e2]]
        assert sorted((int(fv[a]), int(fv[b]))) == sorted(m.graph.edges[e0].tolist())


def test_ball_examples():
    t = build_tree(3, 12)
    b0 = ball(t, 5, 0)
    assert b0.vertex_count == 1 and b0.edge_count == 0
    assert ball(t, 0, 2).vertex_count == 10
    g = build_grid(3, 3)
    diam = nx.diameter(to_nx(g))
    assert nx.is_isomorphic(to_nx(ball(g, 0, diam)), to_nx(g))


def test_growth_rate_examples():
    t = build_tree(3, 14)
    r = growth_rate(t, 0, 10)
    assert abs(r.gamma - math.log(2)) <= max(r.stderr, 1e-9)
    assert r.ball_sizes[10] == 1 + 3 * (2**10 - 1)
    g = build_grid(41)
    r = growth_rate(g, 20 * 41 + 20, 16)
    assert r.gamma < 0.1
    m = build_tiling(3, 7, 9)
    r = growth_rate(m.graph, 0, 8)
    assert r.gamma > 0.5
    with pytest.raises(GraphFormatError):
        growth_rate(t, 0, 10, window=(8, 10))


def test_text_round_trip_graph_and_map():
    for obj in (build_tree(3, 4), build_grid(3, 4), build_tiling(3, 7, 2), dual(build_tiling(7, 3, 2))):
        text = to_text(obj)
        back = from_text(text)
        assert to_text(back) == text
        assert back.digest == obj.digest
        if isinstance(obj, CombinatorialMap):
            assert isinstance(back, CombinatorialMap)
            assert np.array_equal(back.sigma, obj.sigma)


@pytest.mark.parametrize("bad", ["", "graph x 2 1\n0\nboundary\nend\n", "nope 1 0\nboundary\nend\n",
                                 "graph t 2 1\n0 1\nend\n"])
def test_text_rejects_garbage(bad):
    with pytest.raises(GraphFormatError):
        from_text(bad)


def test_generation_deterministic():
    assert to_text(build_tiling(3, 7, 4)) == to_text(build_tiling(3, 7, 4))
    assert build_tree(3, 12).digest == build_tree(3, 12).digest


def test_graph_rejects_bad_edges():
    with pytest.raises((GraphFormatError, ValueError)):
        Graph(2, np.array([[0, 2]]), np.array([], dtype=np.int64))
    with pytest.raises((GraphFormatError, ValueError)):
        from_edges([(0, 0)])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=25))
def test_bfs_matches_networkx(n, pairs):
    edges = sorted({(min(a, b), max(a, b)) for a, b in pairs if a != b and a < n and b < n})
    g = from_edges(edges, vertex_count=n)
    ref = nx.single_source_shortest_path_length(to_nx(g), 0)
    d = bfs_distances(g, 0)
    for v in range(n):
        assert d[v] == ref.get(v, -1)


def test_tree_degree_below_three_refused():
    with pytest.raises(GraphFormatError):
        build_tree(2, 6)
