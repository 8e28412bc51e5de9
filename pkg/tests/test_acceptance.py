"""Acceptance criteria 1-14.

Each test records one verdict per part; the terminal summary (see conftest)
prints a single PASS/FAIL line per criterion.  Parts that are known to fail
are marked ``xfail(strict=True)``: they run the full check and assert it, so
an unexpected pass breaks the suite instead of going unnoticed.
"""

import hashlib
import json
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.stats import norm

from conftest import ACCEPTANCE
from percolab.estimators import (
    InfiniteTree, ballisticity, center, envelope_tail_fit, magnetization_scaling, pc_from_spheres,
    pc_spanning, pu_geometry, tail_exponents, trifurcation_curve,
)
from percolab.graphgen import build_tiling, build_tree, dual
from percolab.operators import build_matrix, decay_rates, norm_vs_q_curve
from percolab.oracle import (
    corpus, exact_matrices, tree_magnetization, tree_recursion, verify_bk, verify_entrywise_inequalities,
    verify_inverse_bk,
)
from percolab.percengine import sample_clusters
from percolab.stats import linear_fit, mean_estimate


P_GRID_37 = np.linspace(0.19, 0.21, 5)
P_GRID_73 = np.linspace(0.52, 0.54, 5)


def record(crit: int, part: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.append((crit, part, bool(ok), detail))
    print(f"criterion {crit}{part}: {'PASS' if ok else 'FAIL'} {detail}")


def red(reason):
    return pytest.mark.xfail(strict=True, reason=reason)


# ------------------------------------------------------------------ shared


@pytest.fixture(scope="module")
def pc_runs():
    """The four sphere-growth critical-point estimates used by criteria 7, 8, 12 and 13."""
    t0 = time.time()
    out = {
        "37": pc_from_spheres(build_tiling(3, 7, 8).graph, P_GRID_37, samples=100_000, seed=1),
        "dual73": pc_from_spheres(dual(build_tiling(7, 3, 8)).graph, P_GRID_37, samples=100_000, seed=1),
        "73": pc_from_spheres(build_tiling(7, 3, 8).graph, P_GRID_73, samples=100_000, seed=1),
        "dual37": pc_from_spheres(dual(build_tiling(3, 7, 7)).graph, P_GRID_73, samples=100_000, seed=1),
    }
    out["elapsed"] = time.time() - t0
    return out


@pytest.fixture(scope="module")
def tiling37_11():
    m = build_tiling(3, 7, 11)
    return m.graph


# ------------------------------------------------------------ criterion 1


def test_c1_oracle_agreement():
    t0 = time.time()
    worst, count, graphs = 0.0, 0, corpus(16)
    for _, g in graphs:
        mats = exact_matrices(g)
        for p in (0.2, 0.5, 0.8):
            ex = mats.values("T", F(str(p)))
            mc = build_matrix(g, p, "T", source="mc", samples=100_000, seed=11).values
            se = np.sqrt(ex * (1 - ex) / 100_000)
            z = np.where(se > 0, np.abs(mc - ex) / np.where(se > 0, se, 1), np.where(mc == ex, 0.0, np.inf))
            worst = max(worst, float(z.max()))
            count += z.size
    dt = time.time() - t0
    ok = len(graphs) >= 10 and worst <= 4 and dt < 120
    record(1, "", ok, f"{len(graphs)} graphs, {count} pairs, worst |z|={worst:.2f} (<=4), {dt:.0f}s (<120s)")
    assert ok


# ------------------------------------------------------------ criterion 2


def test_c2_bk_and_entrywise_exact():
    t0 = time.time()
    ps = (F(1, 5), F(1, 2), F(4, 5))
    bk_min, ent_min = None, None
    for name, g in corpus(16):
        rep = verify_bk(g, ps)
        bk_min = rep.min_slack if bk_min is None else min(bk_min, rep.min_slack)
        mats = exact_matrices(g)
        for p in ps:
            for n in range(3):
                for m in range(3):
                    r = verify_entrywise_inequalities(g, p, n, m, mats)
                    s = min(r.slack_extrinsic, r.slack_intrinsic)
                    ent_min = s if ent_min is None else min(ent_min, s)
    dt = time.time() - t0
    ok = bk_min >= 0 and ent_min >= 0 and dt < 300
    record(2, "", ok, f"min BK slack={bk_min}, min entrywise slack={ent_min} (exact >=0), {dt:.0f}s (<300s)")
    assert ok


# ------------------------------------------------------------ criterion 3


def test_c3_inverse_bk_exact():
    t0 = time.time()
    worst, worst_lit, checks = math.inf, math.inf, 0
    for name, g in corpus(14):
        far = int(np.argmax(g.distances_from(0)))
        v = g.vertex_count
        for verts in [(0, far), (0, 1), (0, v // 2, far), (1, far, v - 1)]:
            if len(set(verts)) < len(verts):
                continue
            for p in (0.2, 0.5, 0.8):
                r = verify_inverse_bk(g, p, (0.5,) * len(verts), verts)
                worst = min(worst, r.slack_inverse_bk_proven, r.slack_diagrammatic_proven)
                worst_lit = min(worst_lit, r.slack_inverse_bk_literal, r.slack_diagrammatic_literal)
                checks += 1
    dt = time.time() - t0
    ok = worst >= -1e-12 and dt < 300
    record(3, "", ok, f"{checks} instances (l=2,3), min slack={worst:.3g} (>=0); "
                      f"bare-constant variant min {worst_lit:.3g}; {dt:.0f}s (<300s)")
    assert ok


# ------------------------------------------------------------ criterion 4


def test_c4a_tree_recursion_agreement():
    t0 = time.time()
    g = build_tree(3, 14)
    zs = {}
    cs = sample_clusters(g, 0.3, 0, 100_000, seed=22)
    zs["chi(0.3)"] = mean_estimate(cs.volume).z(tree_recursion(3, 0.3).chi)
    for h in (0.1, 0.01):
        zs[f"M(0.3,{h})"] = mean_estimate(-np.expm1(-h * cs.volume)).z(tree_magnetization(3, 0.3, h))
    cs = sample_clusters(g, 0.5, 0, 100_000, seed=23, rmax=10)
    tr = tree_recursion(3, 0.5, n_max=10)
    zs["sphere"] = max(abs(cs.sphere_int(n).z(tr.sphere_mean[n])) for n in range(1, 11))
    zs["ball"] = max(abs(cs.ball_int(n).z(tr.ball_mean[n])) for n in range(1, 11))
    worst = max(abs(z) for z in zs.values())
    dt = time.time() - t0
    ok = worst <= 3 and dt < 180
    record(4, "a", ok, "recursion agreement |z|: " + ", ".join(f"{k}={abs(v):.2f}" for k, v in zs.items())
           + f" (<=3), {dt:.0f}s")
    assert ok


@red("E|B_int(n)| on the 3-regular tree at p=1/2 is 1+3n/2, not n+1; see ledger")
def test_c4b_ball_equals_n_plus_one():
    cs = sample_clusters(build_tree(3, 14), 0.5, 0, 100_000, seed=23, rmax=10)
    zs = [cs.ball_int(n).z(n + 1) for n in range(11)]
    worst = max(abs(z) for z in zs)
    ok = worst <= 3
    record(4, "b", ok, f"E|B_int(n)| vs n+1, n<=10: worst |z|={worst:.1f} (<=3); "
                       f"E|B_int(10)|={cs.ball_int(10).mean:.2f}")
    assert ok


# ------------------------------------------------------------ criterion 5


def test_c5_exponential_decay():
    t0 = time.time()
    r = decay_rates(build_tree(3, 10), 0.3, 2, 8)
    target = -math.log(0.3)
    dt = time.time() - t0
    ok = abs(r.xi - target) <= 0.05 and r.bound_ok and dt < 180
    record(5, "", ok, f"xi={r.xi:.4f} vs {target:.4f} (+-0.05); ||C(n)||_2 under explicit bound for n<=8: "
                      f"{r.bound_ok}; {dt:.1f}s")
    assert ok


# ------------------------------------------------------------ criterion 6


@pytest.fixture(scope="module")
def c6_tails():
    t0 = time.time()
    r = tail_exponents(InfiniteTree(3), 0.5, samples=1_000_000, n_max=256, window=(8, 256), seed=1)
    return r, time.time() - t0


def test_c6a_volume_tail(c6_tails):
    r, dt = c6_tails
    f = r.fits["volume"]
    ok = abs(f.slope + 0.5) <= 0.1 and dt < 600
    record(6, "a", ok, f"volume slope={f.slope:.3f}+-{f.slope_stderr:.3f} (-0.5+-0.1), {dt:.0f}s")
    assert ok


@red("finite-window radius slope on [8,256] is -0.889 even for the exact recursion; see ledger")
def test_c6b_radius_tail(c6_tails):
    r, dt = c6_tails
    f = r.fits["rad_int"]
    n = np.arange(8, 257)
    exact = linear_fit(np.log(n), np.log(tree_recursion(3, 0.5, n_max=256).radius_tail[n])).slope
    ok = abs(f.slope + 1.0) <= 0.1 and dt < 600
    record(6, "b", ok, f"radius slope={f.slope:.3f}+-{f.slope_stderr:.3f} (-1+-0.1); "
                       f"exact recursion on the same window {exact:.3f}")
    assert ok


# ------------------------------------------------------------ criterion 7


@red("{3,7} extrinsic-radius slope at desk scale is about -0.63; see ledger")
def test_c7_extrinsic_radius_on_tiling(pc_runs, tiling37_11):
    t0 = time.time()
    pc = pc_runs["37"]
    g = tiling37_11
    e = envelope_tail_fit(g, pc.value, pc.err, which="rad_ext", target=-1.0, tol=0.2, samples=1_000_000, seed=1)
    dt = time.time() - t0
    ok = e.passed and dt < 1800
    record(7, "", ok, f"p_c={pc.value:.5f}+-{pc.err:.5f}; slopes at pc-err,pc,pc+err="
                      f"{[round(s, 3) for s in e.slopes]} (-1+-0.2, widened by half-envelope); {dt:.0f}s")
    assert ok


# ------------------------------------------------------------ criterion 8


def test_c8_ballisticity(pc_runs, tiling37_11):
    t0 = time.time()
    g = tiling37_11
    c = center(g)
    indptr, nbr, _ = g.csr
    v = int(nbr[indptr[c]])
    b = ballisticity(g, pc_runs["37"].value, c, v, samples=100_000, seed=2)
    t = build_tree(3, 10)
    bt = ballisticity(t, 0.5, 0, 1, samples=100_000, seed=3)
    dt = time.time() - t0
    neg = bool(np.all(bt.ratio_tail == 0))
    ok = b.r2 >= 0.97 and neg and dt < 900
    record(8, "", ok, f"{b.hits} conditioned hits, R^2={b.r2:.4f} (>=0.97), rate={b.rate:.3f}; "
                      f"tree tail beyond lambda=1 all zero: {neg}; {dt:.0f}s")
    assert ok


# ------------------------------------------------------------ criterion 9


@red("tree T at p=1/2: ||T||_q (q-1) varies by ~5x over q in [1.1, 2]; see ledger")
def test_c9a_norm_exponent_band():
    T = build_matrix(build_tree(3, 10), 0.5, "T")
    c = norm_vs_q_curve(T, [1.1, 1.2, 1.3, 1.5, 1.7, 2.0])
    ok = c.converged and c.within_band(0.5)
    record(9, "a", ok, f"variation max/min-1={c.variation:.2f} (<0.5); scaled={np.round(c.scaled, 2).tolist()}")
    assert ok


def test_c9b_all_ones_control_fails_band():
    n = build_tree(3, 10).vertex_count
    c = norm_vs_q_curve(np.ones((n, n)), [1.1, 1.2, 1.3, 1.5, 1.7, 2.0])
    ok = not c.within_band(0.5)
    record(9, "b", ok, f"all-ones control variation={c.variation:.2f} (must exceed 0.5)")
    assert ok


# ----------------------------------------------------------- criterion 10


@pytest.fixture(scope="module")
def c10_scaling():
    t0 = time.time()
    m = magnetization_scaling(InfiniteTree(3), 0.5, np.geomspace(1e-3, 1e-1, 9), samples=1_000_000, seed=2)
    return m, time.time() - t0


def test_c10a_mc_matches_exact_recursion(c10_scaling):
    m, dt = c10_scaling
    zs = [e.z(x) for e, x in zip(m.estimates, m.exact)]
    # one shared sample set serves all h: familywise two-sided 3-sigma level over the grid
    zmax = float(norm.isf(norm.sf(3.0) / len(zs)))
    ok = max(abs(z) for z in zs) <= zmax and dt < 300
    record(10, "a", ok, f"MC vs exact M(h) worst |z|={max(abs(z) for z in zs):.2f} (<={zmax:.2f}); {dt:.0f}s")
    assert ok


@red("exact recursion slope over h in [1e-3, 1e-1] is 0.414; see ledger")
def test_c10b_slope_half(c10_scaling):
    m, _ = c10_scaling
    ok = abs(m.exact_fit.slope - 0.5) <= 0.05 and abs(m.slope - 0.5) <= 0.05
    record(10, "b", ok, f"slope MC={m.slope:.3f}+-{m.fit.slope_stderr:.3f}, exact={m.exact_fit.slope:.3f} "
                        f"(0.5+-0.05)")
    assert ok


# ----------------------------------------------------------- criterion 11


def test_c11_trifurcation():
    t0 = time.time()
    grid = [0.55, 0.6, 0.65, 0.7]
    pts = trifurcation_curve(InfiniteTree(3), grid, 0.5, samples=100_000, horizon=100, seed=3)
    zs = [q.estimate.z(q.exact) for q in pts]
    ratios = [q.ratio for q in pts]
    band = max(ratios) / min(ratios)
    stable = all(q.horizon_stable for q in pts)
    dt = time.time() - t0
    ok = max(abs(z) for z in zs) <= 3 and band < 3 and stable and dt < 600
    record(11, "", ok, f"|z| vs (p theta_b)^3: {[round(abs(z), 2) for z in zs]} (<=3); ratio band "
                       f"{band:.2f} (<3); horizon-doubling stable: {stable}; {dt:.0f}s")
    assert ok


# ----------------------------------------------------------- criterion 12


def test_c12_duality(pc_runs):
    t0 = time.time()
    grid = pc_spanning(sizes=(16, 32, 64), samples=4000, seed=4)
    dt = time.time() - t0 + pc_runs["elapsed"]
    a, b = pc_runs["37"], pc_runs["dual73"]
    c, d = pc_runs["73"], pc_runs["dual37"]
    j1 = math.hypot(a.err, b.err)
    j2 = math.hypot(c.err, d.err)
    ok = (abs(grid.value - 0.5) <= 0.02 and abs(a.value - b.value) <= j1 and abs(c.value - d.value) <= j2
          and dt < 1200)
    record(12, "", ok, f"square p_c={grid.value:.4f}+-{grid.err:.4f} (0.50+-0.02); "
                       f"{{3,7}} {a.value:.5f} vs dual{{7,3}} {b.value:.5f} (|d|={abs(a.value - b.value):.5f} "
                       f"<= {j1:.5f}); {{7,3}} {c.value:.5f} vs dual{{3,7}} {d.value:.5f} "
                       f"(|d|={abs(c.value - d.value):.5f} <= {j2:.5f}); {dt:.0f}s")
    assert ok


# ----------------------------------------------------------- criterion 13


@pytest.fixture(scope="module")
def c13_geometry(pc_runs):
    t0 = time.time()
    pu = 1.0 - pc_runs["73"].value
    geo = pu_geometry(build_tiling(3, 7, 10), pu, samples=1_000_000, seed=1, sandwich_samples=20_000)
    return geo, time.time() - t0


@pytest.mark.extended
def test_c13a_dint_tail(c13_geometry):
    geo, dt = c13_geometry
    f = geo.dint_fit
    ok = abs(f.slope + 1.0) <= 0.25 and dt < 2700
    record(13, "a", ok, f"p_u={geo.p:.5f}; d_int slope={f.slope:.3f}+-{f.slope_stderr:.3f} over {f.window} "
                        f"(-1+-0.25); {dt:.0f}s")
    assert ok


@pytest.mark.extended
@red("ConRad slope on the exact window of a 10-layer patch is about -1.1; see ledger")
def test_c13b_conrad_tail(c13_geometry):
    geo, _ = c13_geometry
    f = geo.conrad_fit
    ok = abs(f.slope + 2.0) <= 0.4
    record(13, "b", ok, f"ConRad slope={f.slope:.3f}+-{f.slope_stderr:.3f} over {f.window} (-2+-0.4)")
    assert ok


@pytest.mark.extended
def test_c13c_dual_sandwich(c13_geometry):
    geo, _ = c13_geometry
    s = geo.sandwich
    ok = s["all_distinct"] and s["uncensored"] > 0 and s["c"] > 0
    stable = s["c_half"] == pytest.approx(s["c"], rel=0.5) and s["C_half"] == pytest.approx(s["C"], rel=0.5)
    record(13, "c", ok, f"{s['uncensored']} uncensored samples with d_int>1 ({s['censored']} censored): dual "
                        f"clusters distinct on all: {s['all_distinct']}; c={s['c']:.3f}, C={s['C']:.3f}; "
                        f"half-sample c,C={s['c_half']:.3f},{s['C_half']:.3f} (stable: {stable})")
    assert ok


# ----------------------------------------------------------- criterion 14


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=lambda o: np.asarray(o).tolist())
                          .encode()).hexdigest()


def _docs(workers: int) -> dict:
    g = dict(corpus())["grid3x3"]
    t = build_tiling(3, 7, 6).graph
    c = center(t)
    indptr, nbr, _ = t.csr
    return {
        "matrix": _digest(build_matrix(g, 0.5, "T", source="mc", samples=40_000, seed=11, workers=workers).values),
        "pair": _digest(build_matrix(g, 0.5, "Aint", 1, 3, source="mc", samples=40_000, seed=5,
                                     workers=workers).values),
        "gw": _digest(tail_exponents(InfiniteTree(3), 0.5, samples=40_000, n_max=32, window=(4, 32), seed=1,
                                     workers=workers).to_dict()),
        "pc": _digest(pc_from_spheres(t, P_GRID_37, samples=40_000, seed=1, workers=workers).to_dict()),
        "ballistic": _digest(ballisticity(t, 0.2, c, int(nbr[indptr[c]]), samples=40_000, seed=2,
                                          workers=workers).tail),
        "trifurcation": _digest([q.estimate.to_dict() for q in trifurcation_curve(
            InfiniteTree(3), [0.6], 0.5, samples=40_000, horizon=30, seed=3, workers=workers)]),
        "pu": _digest(pu_geometry(build_tiling(3, 7, 8), 0.47, samples=40_000, seed=1, sandwich_samples=200,
                                  workers=workers).to_dict()),
        "magnetization": _digest([e.to_dict() for e in magnetization_scaling(
            InfiniteTree(3), 0.5, [1e-2, 1e-1], samples=40_000, seed=2, workers=workers).estimates]),
    }


def test_c14_reproducibility(tmp_path):
    from percolab.cli import main

    a, b, c = _docs(1), _docs(2), _docs(1)
    same = [k for k in a if a[k] == b[k] == c[k]]
    args = ["exponent", "--graph", "tree:3:12", "--p", "0.5", "--samples", "40000", "--seed", "7"]
    main(args + ["--workers", "1", "--out", str(tmp_path / "w1")])
    main(args + ["--workers", "2", "--out", str(tmp_path / "w2")])
    cli_same = (tmp_path / "w1" / "exponent.json").read_bytes() == (tmp_path / "w2" / "exponent.json").read_bytes()
    ok = len(same) == len(a) and cli_same
    record(14, "", ok, f"bit-identical across workers 1/2 and reruns: {len(same)}/{len(a)} result digests; "
                       f"CLI result document identical: {cli_same}")
    assert ok
