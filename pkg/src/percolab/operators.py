"""Two-point matrices on finite windows and their q->q norms."""

from __future__ import annotations

import csv
import json
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .graphgen import Graph, bfs_distances
from .parallel import run_blocks
from .percengine import sample_clusters
from .stats import Estimate, FitWindowError, linear_fit

__all__ = [
    "KINDS",
    "OperatorMatrix",
    "NormResult",
    "UnderpoweredWarning",
    "interior_window",
    "build_matrix",
    "operator_norm",
    "triangle_diagram",
    "decay_rates",
    "norm_interpolation_check",
    "norm_vs_p_curve",
    "norm_vs_q_curve",
    "log_bound_check",
    "save_matrix",
    "load_matrix",
    "to_csv",
]

KINDS = ("T", "C", "S", "Bint", "Sint", "Aint")


class UnderpoweredWarning(UserWarning):
    pass


@dataclass(eq=False)
class OperatorMatrix:
    kind: str
    p: float
    window: np.ndarray
    values: np.ndarray
    sample_count: int
    graph_hash: str
    n: int = 0
    m: int = 0
    source: str = "oracle"
    stderr: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return int(self.window.size)

    def header(self) -> dict:
        return {
            "kind": self.kind, "p": self.p, "n": self.n, "m": self.m,
            "samples": self.sample_count, "graph": self.graph_hash, "source": self.source,
            "window_size": self.size,
        }


def interior_window(graph: Graph, margin: int) -> np.ndarray:
    """Vertices at graph distance ``>= margin`` from every boundary vertex."""
    b = graph.boundary_vertices
    if b.size == 0 or margin <= 0:
        return np.arange(graph.vertex_count)
    indptr, nbr, _ = graph.csr
    dist = np.full(graph.vertex_count, -1, dtype=np.int64)
    dist[b] = 0
    frontier = b
    d = 0
    while frontier.size:
        d += 1
        nxt = []
        for u in frontier:
            for w in nbr[indptr[u]:indptr[u + 1]]:
                if dist[w] < 0:
                    dist[w] = d
                    nxt.append(w)
        frontier = np.array(nxt, dtype=np.int64)
    return np.flatnonzero(dist >= margin)


def _window_distances(graph: Graph, window: np.ndarray) -> np.ndarray:
    big = np.iinfo(np.int64).max
    out = np.empty((window.size, window.size), dtype=np.int64)
    for i, u in enumerate(window):
        d = bfs_distances(graph, int(u))
        out[i] = np.where(d[window] < 0, big, d[window])
    return out


def _is_tree(graph: Graph) -> bool:
    return graph.edge_count == graph.vertex_count - 1 and graph.is_connected


def _mask(kind: str, d: np.ndarray, n: int, m: int) -> np.ndarray:
    if kind == "T":
        return np.ones(d.shape, dtype=bool)
    if kind == "C":
        return d >= n
    if kind in ("S", "Sint"):
        return d == n
    if kind == "Bint":
        return d <= n
    if kind == "Aint":
        return (d >= n) & (d <= m)
    raise ValueError(f"unknown matrix kind {kind!r}; expected one of {KINDS}")


def _tally_block(n_vert, edges, seed, p, window, first, count):
    counts = np.zeros((window.size, window.size), dtype=np.int64)
    return K.conn_tally(n_vert, edges, seed, first, count, p, window, counts)


def _pair_block(csr, edges, seed, p, window, dmax, first, count):
    indptr, nbr, eid = csr
    counts = np.zeros((window.size, window.size, dmax + 1), dtype=np.int64)
    return K.pair_tally(indptr, nbr, eid, edges, seed, first, count, p, window, dmax, counts)


def build_matrix(graph: Graph, p: float, kind: str, n: int = 0, m: int = 0, source: str = "oracle",
                 samples: int = 10_000, seed: int = 0, window=None, margin: int = 0,
                 workers: int = 1, stderr_target: float | None = None) -> OperatorMatrix:
    """Two-point family matrix restricted to a window.

    ``source="oracle"`` is exact: closed forms on trees (unique paths, so
    ``d_int = d`` and ``tau = p^d``), full enumeration otherwise.
    ``source="mc"`` reads every window pair off each shared sample.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown matrix kind {kind!r}; expected one of {KINDS}")
    p = float(p)
    win = interior_window(graph, margin) if window is None else np.asarray(window, dtype=np.int64)
    d = _window_distances(graph, win)
    if source == "oracle":
        if _is_tree(graph):
            with np.errstate(over="ignore"):
                T = np.where(d < graph.vertex_count, p ** np.minimum(d, graph.vertex_count), 0.0)
            vals = np.where(_mask(kind, d, n, m), T, 0.0)
        else:
            from .oracle import exact_matrices

            vals = exact_matrices(graph).values(kind, p, n, m)[np.ix_(win, win)]
        return OperatorMatrix(kind, p, win, vals, 0, graph.digest, n, m, "oracle")
    if source != "mc":
        raise ValueError("source must be 'oracle' or 'mc'")
    if kind in ("T", "C", "S"):
        parts = run_blocks(_tally_block, samples, (graph.vertex_count, graph.edges, int(seed), p, win), workers)
        counts = sum(parts[1:], parts[0].copy())
        conn = counts / samples
        vals = np.where(_mask(kind, d, n, m), conn, 0.0)
    else:
        dmax = max(n, m) + 1
        parts = run_blocks(_pair_block, samples, (graph.csr, graph.edges, int(seed), p, win, dmax), workers)
        counts = sum(parts[1:], parts[0].copy())
        hist = counts / samples
        dd = np.arange(dmax + 1)
        if kind == "Bint":
            sel = dd <= n
        elif kind == "Sint":
            sel = dd == n
        else:
            sel = (dd >= n) & (dd <= m)
        vals = hist[:, :, sel].sum(axis=2)
    se = np.sqrt(vals * (1 - vals) / samples)
    if stderr_target is not None and float(se.max()) > stderr_target:
        warnings.warn(f"largest entry stderr {se.max():.3g} exceeds target {stderr_target:.3g}",
                      UnderpoweredWarning, stacklevel=2)
    return OperatorMatrix(kind, p, win, vals, int(samples), graph.digest, n, m, "mc", se)


# ------------------------------------------------------------------- norms


@dataclass
class NormResult:
    q: float
    value: float
    iterations: int
    residual: float
    method: str
    converged: bool = True
    floor: float = 0.0
    ceiling: float = math.inf

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _arr(M) -> np.ndarray:
    return np.asarray(M.values if isinstance(M, OperatorMatrix) else M, dtype=float)


def _bounds(A: np.ndarray, q: float) -> tuple[float, float]:
    n = A.shape[0]
    r1 = float(A.sum(axis=0).max())  # 1->1: column sums
    ri = float(A.sum(axis=1).max())
    if math.isinf(q):
        return ri, ri
    qp = math.inf if q == 1 else q / (q - 1)
    floor = max(ri * n ** (-1.0 / q), r1 * (n ** (-1.0 / qp) if not math.isinf(qp) else 1.0))
    ceil = min(r1 ** (1.0 / q) * ri ** (1.0 - 1.0 / q), max(r1, ri))
    return floor, ceil


def operator_norm(M, q: float, tol: float = 1e-8, max_iter: int = 10_000) -> NormResult:
    """``sup ||Mf||_q / ||f||_q`` over nonnegative ``f`` for an entrywise nonnegative ``M``."""
    A = _arr(M)
    q = float(q)
    if q < 1:
        raise ValueError("q must be >= 1")
    floor, ceil = _bounds(A, q)
    if q == 1:
        return NormResult(q, float(A.sum(axis=0).max()), 0, 0.0, "closed-form-1", True, floor, ceil)
    if math.isinf(q):
        return NormResult(q, float(A.sum(axis=1).max()), 0, 0.0, "closed-form-inf", True, floor, ceil)
    n = A.shape[0]
    if q == 2 and np.allclose(A, A.T):
        f = np.full(n, 1 / math.sqrt(n))
        val, res = 0.0, math.inf
        for it in range(1, max_iter + 1):
            g = A @ f
            new = float(np.linalg.norm(g))
            if new == 0:
                return NormResult(q, 0.0, it, 0.0, "power-2", True, floor, ceil)
            f = g / new
            res = abs(new - val) / new
            val = new
            if res < tol:
                return NormResult(q, val, it, res, "power-2", True, floor, ceil)
        return NormResult(q, val, max_iter, res, "power-2", False, floor, ceil)
    qp = q / (q - 1)
    f = np.full(n, n ** (-1.0 / q))
    val, res = 0.0, math.inf
    for it in range(1, max_iter + 1):
        g = A @ f
        new = float(np.sum(g**q) ** (1.0 / q))
        if new == 0:
            return NormResult(q, 0.0, it, 0.0, "nonlinear-power-q", True, floor, ceil)
        h = A.T @ (g / new) ** (q - 1)
        f = h ** (qp - 1)
        f /= np.sum(f**q) ** (1.0 / q)
        res = abs(new - val) / new
        val = new
        if res < tol:
            return NormResult(q, val, it, res, "nonlinear-power-q", True, floor, ceil)
    return NormResult(q, val, max_iter, res, "nonlinear-power-q", False, floor, ceil)


@dataclass
class TriangleResult:
    value: float
    argmax: int
    norm2_cubed: float

    @property
    def gap(self) -> float:
        return self.norm2_cubed - self.value


def triangle_diagram(M) -> TriangleResult:
    """``max_v M^3(v, v)`` and its gap to ``||M||_{2->2}^3``."""
    A = _arr(M)
    diag = np.einsum("ij,ji->i", A @ A, A)
    i = int(np.argmax(diag))
    return TriangleResult(float(diag[i]), i, operator_norm(A, 2).value ** 3)


@dataclass
class DecayResult:
    """Exponential decay rates of the two-point function on one graph.

    ``xi`` fits ``-log sup{tau(u,v) : d(u,v) = n}``; ``eta`` fits ``-log ||C(n)||_q``.
    ``bound`` is ``2 ||T|| exp(-n / (e ||T||))`` and ``bound_ok`` says whether
    the ``||C(n)||`` curve stays under it.
    """

    p: float
    q: float
    shells: np.ndarray
    sup_tau: np.ndarray
    norm_c: np.ndarray
    norm_t: float
    xi: float
    xi_stderr: float
    eta: float
    eta_stderr: float
    bound: np.ndarray
    bound_ok: bool
    eta_ok: bool

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}


def decay_rates(graph: Graph, p: float, q: float = 2.0, n_max: int = 8, source: str = "oracle",
                samples: int = 10_000, seed: int = 0, window=None, margin: int = 0,
                workers: int = 1) -> DecayResult:
    T = build_matrix(graph, p, "T", source=source, samples=samples, seed=seed, window=window,
                     margin=margin, workers=workers)
    d = _window_distances(graph, T.window)
    A = T.values
    shells = np.arange(n_max + 1)
    sup_tau = np.array([A[d == k].max() if np.any(d == k) else 0.0 for k in shells])
    norm_t = operator_norm(A, q).value
    norm_c = np.array([operator_norm(np.where(d >= k, A, 0.0), q).value for k in shells])
    bound = 2 * norm_t * np.exp(-shells / (math.e * norm_t))
    use = (shells >= 1) & (sup_tau > 0)
    if np.count_nonzero(sup_tau[1:] > 0) == 0:
        xi, xi_se = math.inf, 0.0
    else:
        if use.sum() < 4:
            raise FitWindowError("fewer than 4 usable distance shells for the decay fit")
        f = linear_fit(shells[use], np.log(sup_tau[use]))
        xi, xi_se = -f.slope, f.slope_stderr
    usec = (shells >= 1) & (norm_c > 0)
    if usec.sum() >= 4:
        g = linear_fit(shells[usec], np.log(norm_c[usec]))
        eta, eta_se = -g.slope, g.slope_stderr
    else:
        eta, eta_se = math.inf, 0.0
    eta_ok = eta >= math.exp(-1) / norm_t - 3 * eta_se
    bound_ok = bool(np.all(norm_c <= bound * (1 + 1e-12)))
    return DecayResult(float(p), float(q), shells, sup_tau, norm_c, norm_t, float(xi), float(xi_se),
                       float(eta), float(eta_se), bound, bound_ok, bool(eta_ok))


@dataclass
class InterpolationCheck:
    q1: float
    q2: float
    lhs: float
    rhs: float
    support: int
    converged: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def norm_interpolation_check(M, q1: float, q2: float, tol: float = 1e-8) -> InterpolationCheck:
    """``||M||_{q2} <= ||M||_{q1} * s^((q2-q1)/(q1 q2))`` with ``s`` the largest row support."""
    if not 1 <= q1 < q2:
        raise ValueError("need 1 <= q1 < q2")
    A = _arr(M)
    s = int((A != 0).sum(axis=1).max())
    a = operator_norm(A, q1, tol)
    b = operator_norm(A, q2, tol)
    expo = 0.0 if math.isinf(q2) else (q2 - q1) / (q1 * q2)
    if math.isinf(q2):
        expo = 1.0 / q1
    return InterpolationCheck(q1, q2, b.value, a.value * s**expo, s, a.converged and b.converged)


@dataclass
class NormCurvePoint:
    p: float
    norm: NormResult
    implied_pqq_lower: float


def norm_vs_p_curve(graph: Graph, q: float, p_grid, source: str = "oracle", samples: int = 10_000,
                    seed: int = 0, window=None, margin: int = 0, adjacency_norm: float | None = None,
                    workers: int = 1) -> list[NormCurvePoint]:
    """``||T_p||_{q->q}`` along a p grid plus the implied lower estimate of the norm threshold.

    ``adjacency_norm`` defaults to the maximum degree (exact for regular graphs).
    """
    a = float(graph.degrees.max()) if adjacency_norm is None else float(adjacency_norm)
    out = []
    for p in p_grid:
        T = build_matrix(graph, p, "T", source=source, samples=samples, seed=seed, window=window,
                         margin=margin, workers=workers)
        r = operator_norm(T, q)
        out.append(NormCurvePoint(float(p), r, float(p + (1 - p) / (a * r.value))))
    return out


@dataclass
class QCurve:
    q: np.ndarray
    norms: np.ndarray
    scaled: np.ndarray
    converged: bool

    @property
    def variation(self) -> float:
        """``max/min - 1`` of ``||M||_q (q-1)`` over the grid."""
        return float(self.scaled.max() / self.scaled.min() - 1)

    def within_band(self, band: float = 0.5) -> bool:
        return self.variation < band


def norm_vs_q_curve(M, q_grid) -> QCurve:
    qs = np.asarray(q_grid, dtype=float)
    res = [operator_norm(M, q) for q in qs]
    norms = np.array([r.value for r in res])
    return QCurve(qs, norms, norms * (qs - 1), all(r.converged for r in res))


@dataclass
class LogBound:
    radii: np.ndarray
    ball_sizes: np.ndarray
    overlap: list
    log_fit: object
    power_fit: object
    c_ball: float

    def to_dict(self) -> dict:
        return {
            "radii": self.radii.tolist(), "ball_sizes": self.ball_sizes.tolist(),
            "overlap": [e.to_dict() for e in self.overlap],
            "log_fit": self.log_fit.__dict__, "power_fit": self.power_fit.__dict__, "c_ball": self.c_ball,
        }


def expected_overlap(graph: Graph, p: float, v: int, W, samples: int, seed: int = 0, workers: int = 1) -> Estimate:
    """Monte Carlo ``E|K_v n W|`` for an arbitrary vertex set ``W``."""
    amb = np.ones(graph.vertex_count, dtype=np.int64)
    amb[np.asarray(list(W), dtype=np.int64)] = 0
    # a 0/1 "ambient distance" turns the radius-0 ambient ball count into |K n W|
    cs = sample_clusters(graph, p, v, samples, seed, rmax=0, workers=workers, ambient=amb)
    return cs.ball_ext(0)


def log_bound_check(graph: Graph, p: float, v: int, radii, samples: int = 10_000, seed: int = 0,
                    workers: int = 1) -> LogBound:
    """``E|K_v n B(v,n)|`` on nested balls against ``log |B(v,n)|`` and against ``n``."""
    radii = np.asarray(radii, dtype=np.int64)
    cs = sample_clusters(graph, p, v, samples, seed, rmax=int(radii.max()), workers=workers)
    d = bfs_distances(graph, v)
    sizes = np.array([int(np.count_nonzero((d >= 0) & (d <= r))) for r in radii])
    ov = [cs.ball_ext(int(r)) for r in radii]
    y = np.array([e.mean for e in ov])
    lf = linear_fit(np.log(sizes), y)
    pf = linear_fit(np.log(sizes), np.log(y))
    c_ball = float(np.max(y[radii > 0] / radii[radii > 0])) if np.any(radii > 0) else math.nan
    return LogBound(radii, sizes, ov, lf, pf, c_ball)


# ---------------------------------------------------------------------- IO

_MAGIC = b"PLMX1\n"


def save_matrix(M: OperatorMatrix, path) -> None:
    """Binary layout: magic, u32 header length, JSON header, i64 window, f64 values (row-major, LE).

    A JSON sidecar ``<path>.json`` repeats the header.
    """
    head = json.dumps(M.header(), sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        fh.write(np.ascontiguousarray(M.window, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(M.values, dtype="<f8").tobytes())
    with open(str(path) + ".json", "w") as fh:
        json.dump(M.header(), fh, sort_keys=True, indent=1)


def load_matrix(path) -> OperatorMatrix:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError("not a matrix file")
        (hl,) = struct.unpack("<I", fh.read(4))
        h = json.loads(fh.read(hl))
        w = h["window_size"]
        win = np.frombuffer(fh.read(8 * w), dtype="<i8").astype(np.int64)
        vals = np.frombuffer(fh.read(8 * w * w), dtype="<f8").reshape(w, w).copy()
    return OperatorMatrix(h["kind"], h["p"], win, vals, h["samples"], h["graph"], h["n"], h["m"], h["source"])


def to_csv(M: OperatorMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["u", "v", "value"])
        for i, u in enumerate(M.window):
            for j, v in enumerate(M.window):
                wr.writerow([int(u), int(v), repr(float(M.values[i, j]))])
