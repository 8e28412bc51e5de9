import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percolab.graphgen import build_grid, build_tiling, build_tree, from_edges
from percolab.operators import (
    UnderpoweredWarning, build_matrix, decay_rates, expected_overlap, interior_window, load_matrix,
    log_bound_check, norm_interpolation_check, norm_vs_p_curve, norm_vs_q_curve, operator_norm, save_matrix,
    to_csv, triangle_diagram,
)
from percolab.oracle import corpus, exact_matrices


def test_diagonal_is_one():
    for g in (build_tree(3, 3), build_grid(3)):
        T = build_matrix(g, 0.4, "T")
        assert np.all(np.diag(T.values) == 1.0)


def test_oracle_route_matches_enumeration_on_tree():
    g = build_tree(3, 2)
    for kind, n, m in [("T", 0, 0), ("C", 1, 0), ("S", 2, 0), ("Bint", 1, 0), ("Sint", 2, 0), ("Aint", 1, 2)]:
        closed = build_matrix(g, 0.3, kind, n, m).values
        enum = exact_matrices(g).values(kind, F(3, 10), n, m)
        assert np.allclose(closed, enum, rtol=1e-14, atol=0), kind


def test_mc_route_matches_oracle():
    g = dict(corpus())["bowtie"]
    for kind, n, m in [("T", 0, 0), ("C", 1, 0), ("Sint", 1, 0), ("Aint", 1, 2)]:
        ex = build_matrix(g, 0.5, kind, n, m).values
        mc = build_matrix(g, 0.5, kind, n, m, source="mc", samples=40_000, seed=2)
        se = np.sqrt(ex * (1 - ex) / 40_000)
        z = np.abs(mc.values - ex)[se > 0] / se[se > 0]
        assert z.max() < 5, kind
        assert np.all(mc.values[se == 0] == ex[se == 0])


def test_underpowered_warning():
    g = build_tree(3, 2)
    with pytest.warns(UnderpoweredWarning):
        build_matrix(g, 0.5, "T", source="mc", samples=50, stderr_target=1e-3)


def test_interior_window_margin():
    g = build_tree(3, 4)
    w = interior_window(g, 2)
    assert set(g.distances_from(0)[w].tolist()) == {0, 1, 2}


def test_norm_examples():
    eye = np.eye(6)
    for q in (1.0, 1.5, 2.0, 3.0, math.inf):
        assert operator_norm(eye, q).value == pytest.approx(1.0, abs=1e-9)
    ones = np.ones((5, 5))
    for q in (1.0, 1.5, 2.0, 3.0, math.inf):
        r = operator_norm(ones, q)
        assert r.value == pytest.approx(5.0, rel=1e-8) and r.converged


def test_norm_against_dense_eigensolver():
    M = build_matrix(build_tiling(3, 7, 2).graph, 0.3, "T", source="mc", samples=5000, seed=1).values
    ref = np.max(np.abs(np.linalg.eigvalsh(M)))
    assert operator_norm(M, 2).value == pytest.approx(ref, rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10_000), st.floats(1.1, 6))
def test_general_q_norm_is_a_lower_bound_attained(n, seed, q):
    """The iteration value is attained by its vector and no random test vector beats it."""
    rng = np.random.default_rng(seed)
    A = rng.random((n, n))
    r = operator_norm(A, q)
    assert r.converged
    assert r.floor * (1 - 1e-9) <= r.value <= r.ceiling * (1 + 1e-9)
    for _ in range(200):
        f = rng.random(n)
        assert np.linalg.norm(A @ f, q) / np.linalg.norm(f, q) <= r.value * (1 + 1e-7)


def test_norm_symmetry_and_interpolation():
    T = build_matrix(build_tree(3, 5), 0.4, "T")
    n1 = operator_norm(T, 1).value
    ninf = operator_norm(T, math.inf).value
    n2 = operator_norm(T, 2).value
    assert n1 == pytest.approx(ninf) == pytest.approx(T.values.sum(axis=1).max())
    assert n2 <= n1 + 1e-9


def test_entrywise_domination_transfers():
    g = build_tree(3, 5)
    C = build_matrix(g, 0.4, "C", 2)
    T = build_matrix(g, 0.4, "T")
    for q in (1.0, 1.5, 2.0, 4.0):
        assert operator_norm(C, q).value <= operator_norm(T, q).value + 1e-8


def test_triangle_examples():
    assert triangle_diagram(np.eye(4)).value == pytest.approx(1.0)
    T = build_matrix(build_tree(3, 4), 0.3, "T")
    tri = triangle_diagram(T)
    assert tri.gap >= -1e-9


def test_decay_examples():
    r = decay_rates(build_tree(3, 10), 0.3, 2, 8)
    assert abs(r.xi - (-math.log(0.3))) <= max(3 * r.xi_stderr, 1e-9)
    assert r.bound_ok


def test_interpolation_examples():
    chk = norm_interpolation_check(np.eye(5), 1, 2)
    assert chk.lhs == pytest.approx(1) and chk.slack == pytest.approx(0, abs=1e-9)
    n = 6
    chk = norm_interpolation_check(np.ones((n, n)), 1, 2)
    assert chk.slack == pytest.approx(n * (math.sqrt(n) - 1), rel=1e-8)
    T = build_matrix(build_tree(3, 4), 0.4, "T")
    assert norm_interpolation_check(T, 2, 4).slack >= -1e-8


def test_norm_vs_p():
    g = build_tree(3, 6)
    pts = norm_vs_p_curve(g, 2, [0.0, 0.2, 0.4])
    assert pts[0].norm.value == pytest.approx(1.0)
    assert pts[0].implied_pqq_lower == pytest.approx(1 / 3)
    vals = [pt.norm.value for pt in pts]
    assert vals == sorted(vals)


def test_norm_vs_q_negative_control():
    ones = norm_vs_q_curve(np.ones((20, 20)), [1.1, 1.5, 2.0])
    assert not ones.within_band(0.5)


def test_overlap_examples():
    g = from_edges([(0, 1), (1, 2)])
    e = expected_overlap(g, 0.3, 0, [0, 1], 100_000, seed=1)
    assert abs(e.mean - 1.3) <= 4 * e.stderr
    assert expected_overlap(g, 0.0, 0, [0, 1, 2], 1000).mean == 1.0
    lb = log_bound_check(build_tree(3, 8), 0.5, 0, [1, 2, 4, 6], samples=20_000, seed=2)
    assert lb.c_ball > 0


def test_matrix_io_round_trip(tmp_path):
    M = build_matrix(build_tree(3, 2), 0.3, "C", 1, source="mc", samples=1000, seed=1)
    save_matrix(M, tmp_path / "m.bin")
    back = load_matrix(tmp_path / "m.bin")
    assert np.array_equal(back.values, M.values) and np.array_equal(back.window, M.window)
    assert back.header() == M.header()
    raw = (tmp_path / "m.bin").read_bytes()
    assert raw.startswith(b"PLMX1\n")
    to_csv(M, tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "u,v,value" and len(lines) == 1 + M.size**2
