"""Statistical experiments built on the sampler.

Infinite regular trees are sampled implicitly as Galton-Watson processes
(``InfiniteTree``); everything else runs on finite patches from ``graphgen``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .graphgen import CombinatorialMap, Graph, bfs_distances, build_grid, build_tiling, dual
from .oracle import branch_survival, tree_magnetization
from .parallel import run_blocks
from .percengine import sample_clusters, sample_config, furcation_degree
from .stats import Estimate, ExponentFit, FitWindowError, linear_fit, mean_estimate, power_fit, proportion, survival

__all__ = [
    "InfiniteTree",
    "PcEstimate",
    "PcEstimateError",
    "RareEventError",
    "gw_sample",
    "center",
    "estimate_pc",
    "pc_from_spheres",
    "pc_spanning",
    "tail_exponents",
    "envelope_tail_fit",
    "ballisticity",
    "magnetization_scaling",
    "multi_arm",
    "trifurcation_curve",
    "delta_log",
    "pu_duality",
    "pu_geometry",
]


class PcEstimateError(RuntimeError):
    """The critical-point scan found no crossing."""


class RareEventError(RuntimeError):
    """The conditioning event was observed too rarely."""


@dataclass(frozen=True)
class InfiniteTree:
    k: int

    @property
    def pc(self) -> float:
        return 1.0 / (self.k - 1)


# ------------------------------------------------------- Galton-Watson sampler


@dataclass
class GWSamples:
    """Root-cluster statistics of the infinite tree.

    ``volume`` is exact below ``vol_cap`` (capped rows are flagged) and
    ``radius`` is exact below ``gen_cap``.
    """

    volume: np.ndarray
    radius: np.ndarray
    capped: np.ndarray

    @property
    def n(self) -> int:
        return int(self.volume.size)


def _gw_block(k, p, vol_cap, gen_cap, seed, first, count):
    rng = np.random.Generator(np.random.Philox(key=[seed, first]))
    z = rng.binomial(k, p, size=count).astype(np.int64)
    vol = 1 + z
    rad = (z > 0).astype(np.int64)
    alive = np.flatnonzero(z > 0)
    zc = z[alive]
    g = 1
    while alive.size and g < gen_cap:
        zc = rng.binomial((k - 1) * zc, p)
        vol[alive] += zc
        g += 1
        keep = (zc > 0) & (vol[alive] < vol_cap)
        rad[alive[zc > 0]] = g
        alive, zc = alive[keep], zc[keep]
    capped = vol >= vol_cap
    capped[alive] = True
    return vol, rad, capped


def gw_sample(k: int, p: float, n: int, seed: int = 0, vol_cap: int = 10**7, gen_cap: int = 10**4,
              workers: int = 1) -> GWSamples:
    """Cluster of the root of the infinite ``k``-regular tree, ``n`` samples."""
    res = run_blocks(_gw_block, n, (k, float(p), int(vol_cap), int(gen_cap), int(seed)), workers)
    return GWSamples(*(np.concatenate([r[i] for r in res]) for i in range(3)))


def _gw_branch_block(k, p, horizon, zcap, seed, first, count):
    # reach indicator for each of the k branches hanging off the root
    rng = np.random.Generator(np.random.Philox(key=[seed, (1 << 48) | first]))
    edge = rng.random((count, k)) < p
    z = edge.astype(np.int64).ravel()
    alive = np.flatnonzero(z > 0)
    zc = z[alive]
    g = 1
    while alive.size and g < horizon:
        zc = rng.binomial((k - 1) * zc, p)
        g += 1
        done = zc >= zcap
        keep = (zc > 0) & ~done
        z[alive] = np.where(done, zcap, zc)
        alive, zc = alive[keep], zc[keep]
    reach = (z > 0).reshape(count, k)
    return reach.sum(axis=1)


def gw_branch_reach(k: int, p: float, n: int, horizon: int, seed: int = 0, zcap: int = 2000,
                    workers: int = 1) -> np.ndarray:
    """Number of root branches whose open subtree reaches depth ``horizon``.

    A branch whose generation size hits ``zcap`` is counted as reaching (its
    extinction probability is below ``(1 - theta_b)^zcap``).
    """
    res = run_blocks(_gw_branch_block, n, (k, float(p), int(horizon), int(zcap), int(seed)), workers)
    return np.concatenate(res)


# ------------------------------------------------------------------ helpers


def center(graph: Graph) -> int:
    """A vertex maximizing the distance to the boundary (smallest id on ties)."""
    if graph.boundary_vertices.size == 0:
        return 0
    indptr, nbr, _ = graph.csr
    dist = np.full(graph.vertex_count, -1, dtype=np.int64)
    frontier = graph.boundary_vertices
    dist[frontier] = 0
    d = 0
    while frontier.size:
        d += 1
        nb = np.unique(np.concatenate([nbr[indptr[u]:indptr[u + 1]] for u in frontier]))
        nb = nb[dist[nb] < 0]
        dist[nb] = d
        frontier = nb
    return int(np.argmax(dist))


def _depth(graph: Graph, v: int) -> int:
    """Distance from ``v`` to the nearest boundary vertex."""
    d = bfs_distances(graph, v)
    b = graph.boundary_vertices
    return int(d[b].min()) if b.size else int(d.max())


# ------------------------------------------------------------------ p_c


@dataclass
class PcEstimate:
    value: float
    err: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "err": self.err, "method": self.method, "diagnostics": self.diagnostics}


def _zero_crossing(ps: np.ndarray, s: np.ndarray) -> float:
    idx = np.flatnonzero(np.sign(s[:-1]) != np.sign(s[1:]))
    if idx.size == 0:
        return math.nan
    i = idx[0]
    return float(ps[i] - s[i] * (ps[i + 1] - ps[i]) / (s[i + 1] - s[i]))


def pc_from_spheres(graph: Graph, p_grid, samples: int = 100_000, seed: int = 0, root: int | None = None,
                    r_max: int | None = None, groups: int = 10, workers: int = 1) -> PcEstimate:
    """Critical point as the zero of the growth rate of ``E|dB_int(root, R)|``.

    The rate is the slope of ``log E|dB_int(root, R)|`` against ``R``: negative
    below criticality, positive above.  The intrinsic sphere of radius ``R``
    only depends on the ambient ball of radius ``R``, so it is exact on the
    patch while ``R`` stays inside.  The statistical error is a group
    jackknife; the systematic error is the spread over fit windows.
    """
    root = center(graph) if root is None else int(root)
    r_max = _depth(graph, root) if r_max is None else int(r_max)
    ps = np.asarray(p_grid, dtype=float)
    per = samples // groups
    sums = np.zeros((groups, ps.size, r_max + 1))
    for i, p in enumerate(ps):
        for gi in range(groups):
            cs = sample_clusters(graph, p, root, per, seed, rmax=r_max, workers=workers,
                                 stream_offset=gi * per, depth_cap=r_max)
            sums[gi, i] = cs.moments[0]
    windows = [(max(1, r_max // 2), r_max), (max(1, r_max // 3), r_max), (max(1, r_max // 2), r_max - 1)]
    windows = [w for w in windows if w[1] - w[0] >= 2]

    def crossing(mean, w):
        R = np.arange(w[0], w[1] + 1)
        slopes = np.array([linear_fit(R, np.log(np.maximum(mean[i, R], 1e-300))).slope for i in range(ps.size)])
        return _zero_crossing(ps, slopes), slopes

    total = sums.sum(axis=0) / (per * groups)
    main, slopes = crossing(total, windows[0])
    if math.isnan(main):
        raise PcEstimateError(f"sphere growth rate does not change sign on p in [{ps[0]}, {ps[-1]}]; "
                              f"slopes {np.round(slopes, 4).tolist()}")
    jk = []
    for gi in range(groups):
        m = (sums.sum(axis=0) - sums[gi]) / (per * (groups - 1))
        jk.append(crossing(m, windows[0])[0])
    jk = np.array(jk)
    stat = math.sqrt((groups - 1) / groups * np.sum((jk - jk.mean()) ** 2)) if np.all(np.isfinite(jk)) else math.inf
    alt = [crossing(total, w)[0] for w in windows[1:]]
    alt = [a for a in alt if np.isfinite(a)]
    syst = max((abs(a - main) for a in alt), default=0.0)
    return PcEstimate(main, math.hypot(stat, syst), "sphere-growth zero crossing", {
        "root": root, "r_max": r_max, "p_grid": ps.tolist(), "slopes": slopes.tolist(),
        "stat_err": stat, "window_spread": syst, "windows": windows, "samples": per * groups,
    })


def pc_spanning(sizes=(16, 32, 64), samples: int = 4000, seed: int = 0, workers: int = 1) -> PcEstimate:
    """Square-lattice critical point from left-right crossing thresholds.

    Boxes have ``L`` rows and ``L + 1`` columns, the shape whose crossing
    probability at the self-dual point is exactly one half.  The estimate is
    the median per-sample crossing threshold of the largest box.
    """
    meds, errs = [], []
    for L in sizes:
        g = build_grid(L, L + 1)
        col = np.arange(g.vertex_count) % (L + 1)
        parts = run_blocks(_span_block, samples, (g.vertex_count, g.edges, int(seed) + L, col == 0, col == L),
                           workers)
        u = np.sort(np.concatenate(parts))
        n = u.size
        k = 1.959963984540054 * math.sqrt(n) / 2
        lo, hi = u[max(0, int(n / 2 - k))], u[min(n - 1, int(math.ceil(n / 2 + k)))]
        meds.append(float(np.median(u)))
        errs.append(float(hi - lo) / (2 * 1.959963984540054))
    spread = float(np.ptp(meds)) if len(meds) > 1 else 0.0
    return PcEstimate(meds[-1], max(errs[-1], spread / 2), "spanning-threshold median", {
        "sizes": list(sizes), "medians": meds, "stat_errs": errs, "samples": samples,
    })


def _span_block(n, edges, seed, left, right, first, count):
    return K.spanning_thresholds(n, edges, seed, first, count, left, right)


def estimate_pc(family, p_grid=None, layers: int = 8, samples: int = 100_000, seed: int = 0,
                workers: int = 1, sizes=(16, 32, 64)) -> PcEstimate:
    """``family``: an ``InfiniteTree``, a ``("tiling", p, q)`` tuple, ``"grid"`` or a patch graph/map."""
    if isinstance(family, InfiniteTree):
        return PcEstimate(family.pc, 0.0, "exact 1/(k-1)")
    if isinstance(family, str) and family == "grid":
        return pc_spanning(sizes, samples=min(samples, 4000), seed=seed, workers=workers)
    if isinstance(family, tuple) and family[0] == "tree":
        return estimate_pc(InfiniteTree(int(family[1])))
    if isinstance(family, tuple) and family[0] == "tiling":
        family = build_tiling(int(family[1]), int(family[2]), layers)
    g = family.graph if isinstance(family, CombinatorialMap) else family
    if p_grid is None:
        raise ValueError("p_grid is required for patch families")
    return pc_from_spheres(g, p_grid, samples, seed, workers=workers)


# -------------------------------------------------------------- tail fits


@dataclass
class TailResult:
    grid: np.ndarray
    volume: tuple
    rad_int: tuple
    rad_ext: tuple
    fits: dict
    samples: int

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(), "samples": self.samples,
            "volume": [a.tolist() for a in self.volume],
            "rad_int": [a.tolist() for a in self.rad_int],
            "rad_ext": [a.tolist() for a in self.rad_ext],
            "fits": {k: (v.to_dict() if v is not None else None) for k, v in self.fits.items()},
        }


def _fit_or_none(grid, surv, err, window):
    try:
        return power_fit(grid, surv, err, window)
    except FitWindowError:
        return None


def tail_exponents(graph, p: float, v: int = 0, samples: int = 100_000, n_max: int | None = None,
                   window=None, seed: int = 0, grid=None, workers: int = 1, strict: bool = True) -> TailResult:
    """Survival curves of ``|K_v|``, ``rad_int`` and ``rad_ext`` with power-law fits.

    On a patch, ``n_max`` defaults to the boundary distance of ``v``, where the
    extrinsic radius event is exact.  The default window is
    ``[n_max/4, 3 n_max/4]``; fits use every integer in it unless ``grid`` is given.
    """
    if isinstance(graph, InfiniteTree):
        if n_max is None:
            raise ValueError("n_max is required on the infinite tree")
        s = gw_sample(graph.k, p, samples, seed, gen_cap=n_max + 2, workers=workers)
        vol, rint, rext = s.volume, s.radius, s.radius
    else:
        n_max = _depth(graph, v) if n_max is None else int(n_max)
        cs = sample_clusters(graph, p, v, samples, seed, workers=workers)
        vol, rint, rext = cs.volume, cs.rad_int, cs.rad_ext
    g = np.arange(1, n_max + 1) if grid is None else np.asarray(grid, dtype=np.int64)
    window = (n_max / 4, 3 * n_max / 4) if window is None else window
    out, fits = {}, {}
    for name, x in (("volume", vol), ("rad_int", rint), ("rad_ext", rext)):
        sv, se = survival(x, g)
        out[name] = (sv, se)
        fits[name] = power_fit(g, sv, se, window) if strict else _fit_or_none(g, sv, se, window)
    return TailResult(g, out["volume"], out["rad_int"], out["rad_ext"], fits, int(vol.size))


@dataclass
class EnvelopeFit:
    p_values: list
    slopes: list
    stderrs: list
    target: float
    tol: float

    @property
    def envelope(self) -> tuple[float, float]:
        lo = min(s - 3 * e for s, e in zip(self.slopes, self.stderrs))
        hi = max(s + 3 * e for s, e in zip(self.slopes, self.stderrs))
        return lo, hi

    @property
    def central(self) -> float:
        return self.slopes[len(self.slopes) // 2]

    @property
    def passed(self) -> bool:
        """Central slope within ``tol`` of the target, the band widened by half the p-envelope."""
        half = (max(self.slopes) - min(self.slopes)) / 2
        return abs(self.central - self.target) <= self.tol + half


def envelope_tail_fit(graph: Graph, pc: float, err: float, which: str = "rad_ext", target: float = -1.0,
                      tol: float = 0.2, samples: int = 1_000_000, v: int | None = None, seed: int = 0,
                      workers: int = 1) -> EnvelopeFit:
    """Tail slope at ``pc - err``, ``pc`` and ``pc + err``."""
    v = center(graph) if v is None else v
    ps, sl, se = [], [], []
    for p in (pc - err, pc, pc + err):
        r = tail_exponents(graph, p, v, samples, seed=seed, workers=workers)
        f = r.fits[which]
        ps.append(p)
        sl.append(f.slope)
        se.append(f.slope_stderr)
    return EnvelopeFit(ps, sl, se, target, tol)


# ----------------------------------------------------------- ballisticity


@dataclass
class BallisticResult:
    """Conditional tail ``P(d_int(u,v) >= n | u <-> v)`` and the stretch-ratio tail."""

    n: np.ndarray
    tail: np.ndarray
    tail_err: np.ndarray
    hits: int
    fit: object
    lam: np.ndarray
    ratio_tail: np.ndarray
    capped: int

    @property
    def rate(self) -> float:
        return -self.fit.slope if self.fit is not None else math.nan

    @property
    def r2(self) -> float:
        return self.fit.r2 if self.fit is not None else math.nan


def _ballistic_block(csr, amb, p, u, v, vol_cap, seed, first, count):
    indptr, nbr, eid = csr
    return K.ballistic_batch(indptr, nbr, eid, seed, first, count, p, u, v, amb, vol_cap)


def ballisticity(graph: Graph, p: float, u: int, v: int, samples: int = 100_000, lam_grid=None,
                 seed: int = 0, vol_cap: int | None = None, min_hits: int = 100, min_count: int = 10,
                 workers: int = 1) -> BallisticResult:
    """Explore ``K_u`` per sample; record ``d_int(u, v)`` and ``max d_int/d`` over ``K_u``.

    The log-linear fit uses every ``n`` whose tail count is at least ``min_count``.
    """
    amb = bfs_distances(graph, u)
    cap = graph.vertex_count + 1 if vol_cap is None else int(vol_cap)
    res = run_blocks(_ballistic_block, samples, (graph.csr, amb, float(p), int(u), int(v), cap, int(seed)), workers)
    duv = np.concatenate([r[0] for r in res])
    ratio = np.concatenate([r[1] for r in res])
    capped = int(np.concatenate([r[2] for r in res]).sum())
    conn = duv[duv >= 0]
    if conn.size < min_hits:
        raise RareEventError(f"u<->v observed {conn.size} times, need {min_hits}")
    d0 = int(amb[v])
    ns = np.arange(d0, int(conn.max()) + 2)
    cnt = np.array([(conn >= n).sum() for n in ns])
    tail = cnt / conn.size
    err = np.sqrt(tail * (1 - tail) / conn.size)
    use = (cnt >= min_count) & (ns > d0)
    fit = linear_fit(ns[use], np.log(tail[use])) if use.sum() >= 3 else None
    lam = np.linspace(1.0, 3.0, 9) if lam_grid is None else np.asarray(lam_grid, dtype=float)
    rt = np.array([(ratio > x).mean() for x in lam])
    return BallisticResult(ns, tail, err, int(conn.size), fit, lam, rt, capped)


# ---------------------------------------------------------- magnetization


@dataclass
class MagnetizationScaling:
    h: np.ndarray
    estimates: list
    fit: object
    exact: np.ndarray | None
    exact_fit: object | None
    dropped: list

    @property
    def slope(self) -> float:
        return self.fit.slope


def magnetization_scaling(graph, p: float, h_grid, samples: int = 100_000, v: int = 0, seed: int = 0,
                          workers: int = 1) -> MagnetizationScaling:
    """Slope of ``log M_hat`` against ``log h``; the same cluster samples serve every ``h``."""
    hs = np.asarray(h_grid, dtype=float)
    if isinstance(graph, InfiniteTree):
        vol = gw_sample(graph.k, p, samples, seed, workers=workers).volume
    else:
        vol = sample_clusters(graph, p, v, samples, seed, workers=workers).volume
    ests, keep, dropped = [], [], []
    for h in hs:
        e = mean_estimate(-np.expm1(-h * vol), "mean of 1-exp(-h|K|)")
        ests.append(e)
        if e.mean * samples >= 100:
            keep.append(True)
        else:
            keep.append(False)
            dropped.append(float(h))
            warnings.warn(f"h={h} underpowered; dropped from the fit", stacklevel=2)
    keep = np.array(keep)
    m = np.array([e.mean for e in ests])
    s = np.array([e.stderr for e in ests])
    sig = s[keep] / m[keep]
    # degenerate samples (e.g. p = 0) carry no variance, so fall back to equal weights
    fit = linear_fit(np.log(hs[keep]), np.log(m[keep]), sigma=sig if np.all(sig > 0) else None)
    exact = exact_fit = None
    if isinstance(graph, InfiniteTree):
        exact = np.array([tree_magnetization(graph.k, p, h) for h in hs])
        exact_fit = linear_fit(np.log(hs), np.log(exact))
    return MagnetizationScaling(hs, ests, fit, exact, exact_fit, dropped)


# -------------------------------------------------------------- multi-arm


@dataclass
class MultiArmResult:
    joint: Estimate
    singles: list
    bk_product: float
    bk_product_stderr: float
    separations: list

    @property
    def ratio(self) -> float:
        return self.joint.mean / self.bk_product if self.bk_product > 0 else math.nan

    @property
    def bk_ok(self) -> bool:
        se = math.hypot(self.joint.stderr, self.bk_product_stderr)
        return self.joint.mean <= self.bk_product + 4 * se


def multi_arm(graph: Graph, p: float, vertices, mode: str = "volume", thresholds=None,
              samples: int = 10_000, seed: int = 0, min_hits: int = 0) -> MultiArmResult:
    """Joint event that the clusters of ``vertices`` are pairwise distinct and each is large.

    ``mode``: ``volume`` (``|K_i| >= n_i``), ``rad_int``/``rad_ext`` (radius ``>= n``)
    or ``boundary`` (cluster touches the truncation boundary).
    """
    vs = [int(v) for v in vertices]
    ell = len(vs)
    th = [0] * ell if thresholds is None else list(np.broadcast_to(np.asarray(thresholds), (ell,)))
    amb = [bfs_distances(graph, v) for v in vs]
    indptr, nbr, eid = graph.csr
    single = np.zeros((samples, ell), dtype=bool)
    joint = np.zeros(samples, dtype=bool)
    bnd = graph.boundary
    for s in range(samples):
        bits = K.open_edges(int(seed), s, graph.edge_count, float(p))
        parent, _, size = K.uf_build(graph.vertex_count, graph.edges, bits)
        roots = [parent[v] for v in vs]
        for i, v in enumerate(vs):
            r = roots[i]
            if mode == "volume":
                ok = size[r] >= th[i]
            elif mode == "rad_ext":
                ok = amb[i][parent == r].max() >= th[i]
            elif mode == "rad_int":
                ok = K.bfs_open(indptr, nbr, eid, bits, v, -1).max() >= th[i]
            elif mode == "boundary":
                ok = bool(np.any(bnd[parent == r]))
            else:
                raise ValueError(f"unknown multi-arm mode {mode!r}")
            single[s, i] = ok
        joint[s] = single[s].all() and len(set(int(r) for r in roots)) == ell
    if joint.sum() < min_hits:
        raise RareEventError(f"joint event seen {int(joint.sum())} times, need {min_hits}")
    singles = [proportion(int(single[:, i].sum()), samples) for i in range(ell)]
    prod = float(np.prod([e.mean for e in singles]))
    # delta method for the product of independent-looking proportions
    rel = math.sqrt(sum((e.stderr / e.mean) ** 2 for e in singles if e.mean > 0))
    seps = [int(amb[i][vs[j]]) for i in range(ell) for j in range(i + 1, ell)]
    return MultiArmResult(proportion(int(joint.sum()), samples), singles, prod, prod * rel, seps)


# ----------------------------------------------------------- trifurcation


@dataclass
class TrifurcationPoint:
    p: float
    estimate: Estimate
    exact: float | None
    ratio: float
    horizon_shift: float
    single_branch_cubed: float

    @property
    def horizon_stable(self) -> bool:
        return abs(self.horizon_shift) <= 3 * math.sqrt(2) * self.estimate.stderr + 1e-15


def trifurcation_curve(graph, p_grid, pc: float, v: int = 0, samples: int = 100_000, horizon: int = 100,
                       seed: int = 0, workers: int = 1) -> list[TrifurcationPoint]:
    """Probability that exactly three branches at ``v`` reach ``horizon``; ratio to ``(p-pc)^3``.

    Each point is also computed at twice the horizon (same seed) to expose
    horizon dependence.
    """
    out = []
    for p in p_grid:
        p = float(p)
        if isinstance(graph, InfiniteTree):
            a = gw_branch_reach(graph.k, p, samples, horizon, seed, workers=workers)
            b = gw_branch_reach(graph.k, p, samples, 2 * horizon, seed, workers=workers)
            tb = branch_survival(graph.k, p)
            b1 = p * tb
            exact = math.comb(graph.k, 3) * b1**3 * (1 - b1) ** (graph.k - 3)
            reach1 = proportion(int(np.sum(_branch_reach_single(graph.k, p, samples, horizon, seed, workers))),
                                samples)
        else:
            a = np.array([furcation_degree(sample_config(graph, p, (seed, s)), v, horizon) for s in range(samples)])
            b = np.array([furcation_degree(sample_config(graph, p, (seed, s)), v, 2 * horizon)
                          if 2 * horizon <= _depth(graph, v) else a[s] for s in range(samples)])
            exact = None
            reach1 = proportion(int(np.sum(a >= 1)), samples)
        e = proportion(int(np.sum(a == 3)), samples)
        eb = proportion(int(np.sum(b == 3)), samples)
        out.append(TrifurcationPoint(p, e, exact, e.mean / (p - pc) ** 3, eb.mean - e.mean, reach1.mean**3))
    return out


def _single_block(k, p, horizon, seed, first, count):
    rng = np.random.Generator(np.random.Philox(key=[seed, (2 << 48) | first]))
    z = (rng.random(count) < p).astype(np.int64)
    alive = np.flatnonzero(z > 0)
    zc = z[alive]
    g = 1
    while alive.size and g < horizon:
        zc = rng.binomial((k - 1) * zc, p)
        g += 1
        done = zc >= 2000
        z[alive] = np.where(done, 2000, zc)
        keep = (zc > 0) & ~done
        alive, zc = alive[keep], zc[keep]
    return z > 0


def _branch_reach_single(k, p, n, horizon, seed, workers):
    return np.concatenate(run_blocks(_single_block, n, (k, float(p), int(horizon), int(seed)), workers))


# ------------------------------------------------------------------ delta_log


@dataclass
class DeltaLogPoint:
    p: float
    delta: float
    drift: float
    flagged: bool
    overlap: np.ndarray
    balls: np.ndarray


def delta_log(graph: Graph, p_grid, v: int = 0, n_max: int | None = None, samples: int = 20_000,
              seed: int = 0, pc: float | None = None, workers: int = 1):
    """Local slope of ``log E|K_v n B(v,n)|`` against ``log |B(v,n)|`` at the largest radii.

    Returns the per-p points and, if ``pc`` is given, the slope of a fit
    through the origin of ``delta`` against ``p - pc``.
    """
    n_max = _depth(graph, v) if n_max is None else int(n_max)
    d = bfs_distances(graph, v)
    balls = np.array([np.count_nonzero((d >= 0) & (d <= n)) for n in range(n_max + 1)], dtype=float)
    pts = []
    for p in p_grid:
        cs = sample_clusters(graph, p, v, samples, seed, rmax=n_max, workers=workers)
        y = np.array([cs.ball_ext(n).mean for n in range(n_max + 1)])
        lb, ly = np.log(balls), np.log(y)
        s1 = (ly[n_max] - ly[n_max - 1]) / (lb[n_max] - lb[n_max - 1])
        s0 = (ly[n_max - 1] - ly[n_max - 2]) / (lb[n_max - 1] - lb[n_max - 2])
        se = cs.ball_ext(n_max).stderr / y[n_max] + cs.ball_ext(n_max - 1).stderr / y[n_max - 1]
        se /= lb[n_max] - lb[n_max - 1]
        pts.append(DeltaLogPoint(float(p), float(s1), float(s1 - s0), bool(abs(s1 - s0) > max(se, 1e-3)), y, balls))
    slope = None
    if pc is not None:
        x = np.array([pt.p - pc for pt in pts])
        yv = np.array([pt.delta for pt in pts])
        slope = float((x * yv).sum() / (x * x).sum()) if np.any(x != 0) else math.nan
    return pts, slope


# ------------------------------------------------------------------ duality


@dataclass
class DualityResult:
    pc_dual: PcEstimate
    pu_transported: float
    pu_transported_err: float
    pu_primal: float
    pu_primal_diag: dict

    @property
    def discrepancy(self) -> float:
        return self.pu_primal - self.pu_transported

    def to_dict(self) -> dict:
        return {
            "pc_dual": self.pc_dual.to_dict(), "pu_transported": self.pu_transported,
            "pu_transported_err": self.pu_transported_err, "pu_primal": self.pu_primal,
            "pu_primal_diag": self.pu_primal_diag, "discrepancy": self.discrepancy,
        }


def _scan_block(n, edges, seed, grid, inner, bnd, first, count):
    return K.reaching_cluster_scan(n, edges, seed, first, count, grid, inner, bnd)


def primal_merge_scan(graph: Graph, p_grid, inner_radius: int = 2, samples: int = 200, seed: int = 0,
                      workers: int = 1) -> tuple[float, dict]:
    """Smallest p at which at most one boundary-reaching cluster meets the central ball, half the time."""
    c = center(graph)
    d = bfs_distances(graph, c)
    inner = (d >= 0) & (d <= inner_radius)
    grid = np.asarray(p_grid, dtype=float)
    res = run_blocks(_scan_block, samples, (graph.vertex_count, graph.edges, int(seed), grid, inner,
                                            graph.boundary), workers, block=64)
    k = np.concatenate(res)
    frac = (k >= 2).mean(axis=0)
    idx = np.flatnonzero((frac[:-1] >= 0.5) & (frac[1:] < 0.5))
    if idx.size:
        i = idx[-1]
        pu = float(grid[i] + (frac[i] - 0.5) * (grid[i + 1] - grid[i]) / (frac[i] - frac[i + 1]))
    else:
        pu = math.nan
    return pu, {"p_grid": grid.tolist(), "frac_multi": frac.tolist(), "mean_count": k.mean(axis=0).tolist(),
                "inner_radius": inner_radius, "samples": samples}


def pu_duality(cmap: CombinatorialMap, p_grid_dual, p_grid_primal=None, samples: int = 100_000,
               scan_samples: int = 200, seed: int = 0, workers: int = 1) -> DualityResult:
    """Uniqueness threshold of the primal, transported from the dual critical point and scanned directly."""
    dm = dual(cmap)
    pc = pc_from_spheres(dm.graph, p_grid_dual, samples, seed, workers=workers)
    pu_t = 1.0 - pc.value
    if p_grid_primal is None:
        p_grid_primal = np.linspace(max(0.0, pu_t - 0.2), min(1.0, pu_t + 0.2), 17)
    pu_p, diag = primal_merge_scan(cmap.graph, p_grid_primal, samples=scan_samples, seed=seed, workers=workers)
    return DualityResult(pc, pu_t, pc.err, pu_p, diag)


@dataclass
class PuGeometry:
    p: float
    x: int
    y: int
    n_dint: np.ndarray
    dint_tail: np.ndarray
    dint_err: np.ndarray
    n_conrad: np.ndarray
    conrad_tail: np.ndarray
    conrad_err: np.ndarray
    dint_fit: ExponentFit
    conrad_fit: ExponentFit
    connected_fraction: float
    sandwich: dict

    def to_dict(self) -> dict:
        return {
            "p": self.p, "x": self.x, "y": self.y,
            "n_dint": self.n_dint.tolist(), "dint_tail": self.dint_tail.tolist(), "dint_err": self.dint_err.tolist(),
            "n_conrad": self.n_conrad.tolist(), "conrad_tail": self.conrad_tail.tolist(),
            "conrad_err": self.conrad_err.tolist(),
            "dint_fit": self.dint_fit.to_dict(), "conrad_fit": self.conrad_fit.to_dict(),
            "connected_fraction": self.connected_fraction, "sandwich": self.sandwich,
        }


def _pu_block(csr, p, x, y, dx, dy, dmax, rmax, seed, first, count):
    indptr, nbr, eid = csr
    return K.pu_batch(indptr, nbr, eid, seed, first, count, p, x, y, dx, dy, dmax, rmax)


def pu_geometry(cmap: CombinatorialMap, p: float, samples: int = 100_000, seed: int = 0,
                sandwich_samples: int = 2000, vol_cap: int = 10**6, workers: int = 1) -> PuGeometry:
    """Tails of ``d_int(x, y)`` and ``ConRad(x, y)`` for the central edge, plus the dual-cluster sandwich.

    With ``L`` the boundary distance of ``x``, the event ``{d_int >= n}`` is exact
    on the patch for ``n <= 2(L - 2)`` (a shorter path lies in ``B(x, n/2 + 1)``)
    and ``{ConRad >= n}`` for ``n <= L - 1``.  Events are unconditional: at the
    uniqueness point ``x <-> y`` almost surely, because the dual clusters are finite.
    """
    g = cmap.graph
    x = center(g)
    indptr, nbr, eid = g.csr
    y = int(nbr[indptr[x]])
    e_xy = int(eid[indptr[x]])
    L = _depth(g, x)
    dmax, rmax = 2 * (L - 2), L - 1
    dx, dy = bfs_distances(g, x), bfs_distances(g, y)
    res = run_blocks(_pu_block, samples, (g.csr, float(p), x, y, dx, dy, dmax, rmax, int(seed)), workers)
    dout = np.concatenate([r[0] for r in res])
    rout = np.concatenate([r[1] for r in res])
    nd = np.arange(1, dmax + 1)
    td, ed = survival(dout, nd)
    nr = np.arange(1, rmax + 1)
    tr, er = survival(rout, nr)
    fd = power_fit(nd, td, ed, (dmax / 4, 3 * dmax / 4))
    fr = power_fit(nr, tr, er, (rmax / 4, 3 * rmax / 4))
    sw = _sandwich(cmap, p, x, y, e_xy, sandwich_samples, seed, vol_cap)
    return PuGeometry(float(p), x, y, nd, td, ed, nr, tr, er, fd, fr, float((dout <= dmax).mean()), sw)


def _sandwich(cmap, p, x, y, e_xy, n, seed, vol_cap) -> dict:
    """Per-sample ratios ``d_int / min(|K1|, |K2|)`` on samples with ``d_int > 1``."""
    g = cmap.graph
    dm = dual(cmap)
    dg = dm.graph
    e2e = dm.provenance["edge_edge"]
    inv = np.full(g.edge_count, -1, dtype=np.int64)
    inv[e2e] = np.arange(e2e.size)
    j = int(inv[e_xy])
    if j < 0:
        raise ValueError("central edge has no dual partner")
    f1, f2 = (int(a) for a in dg.edges[j])
    dind, dnbr, deid = dg.csr
    pind, pnbr, peid = g.csr
    ratios, rows, distinct, cens = [], 0, 0, 0
    for s in range(n):
        bits = K.open_edges(int(seed), s, g.edge_count, float(p))
        if bits[e_xy]:
            continue
        d = K.bfs_open(pind, pnbr, peid, bits, x, -1)[y]
        if d < 0:
            continue
        s1, s2, same, c = K.dual_pair_clusters(dind, dnbr, deid, e2e, int(seed), s, float(p), f1, f2, j,
                                               dg.boundary, vol_cap)
        rows += 1
        if c:
            cens += 1
            continue
        distinct += int(not same)
        ratios.append(d / min(s1, s2))
    r = np.array(ratios) if ratios else np.array([math.nan])
    half = r[: max(1, r.size // 2)]
    return {
        "samples_used": rows, "censored": cens, "distinct": distinct, "uncensored": int(len(ratios)),
        "c": float(np.min(r)), "C": float(np.max(r)),
        "c_half": float(np.min(half)), "C_half": float(np.max(half)),
        "all_distinct": distinct == len(ratios),
    }
