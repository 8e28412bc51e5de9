"""Exact answers on small graphs and closed forms on regular trees.

Enumeration runs over all ``2**|E|`` edge masks (bit ``e`` set means edge
``e`` open).  Boolean events are summarized by integer counts ``c[k]`` of
masks with ``k`` open edges, so every probability is the polynomial
``sum_k c[k] p^k (1-p)^(|E|-k)`` and is exact at rational ``p``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import binom

from . import _kernels as K
from .graphgen import Graph, bfs_distances, build_tiling, build_tree, build_grid, from_edges, ball

__all__ = [
    "EventSpec",
    "ExactResult",
    "OracleCapError",
    "NonIncreasingEventError",
    "ENUM_CAP",
    "DISJOINT_CAP",
    "INVERSE_BK_CAP",
    "exact_event_prob",
    "event_indicator",
    "disjoint_occurrence_prob",
    "verify_bk",
    "exact_matrices",
    "verify_entrywise_inequalities",
    "verify_inverse_bk",
    "magnetization_exact",
    "TreeRecursion",
    "tree_recursion",
    "corpus",
    "to_json",
]

ENUM_CAP = 22
DISJOINT_CAP = 18
INVERSE_BK_CAP = 14


class OracleCapError(ValueError):
    """Graph too large for exhaustive enumeration."""


class NonIncreasingEventError(ValueError):
    """Disjoint occurrence requested for an event that is not increasing."""


def _cap(graph: Graph, cap: int, what: str) -> None:
    if graph.edge_count > cap:
        raise OracleCapError(f"{what} is capped at {cap} edges; graph has {graph.edge_count}")


def _rational(p) -> Fraction | float:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, str):
        return Fraction(p)
    if isinstance(p, int):
        return Fraction(p)
    # floats with short decimal forms (0.2, 0.5, 0.8) are treated as those rationals
    return Fraction(str(p)).limit_denominator(10**12)


def poly_value(coeffs: Sequence[int], m: int, p) -> Fraction:
    """Exact ``sum_k c[k] p^k (1-p)^(m-k)``."""
    p = _rational(p)
    q = 1 - p
    return sum((Fraction(int(c)) * p**k * q ** (m - k) for k, c in enumerate(coeffs) if c), Fraction(0))


def _numerator(coeffs, m, a, b) -> int:
    """``b^m`` times the polynomial value at ``p = a/b`` (an integer)."""
    return sum(int(c) * a**k * (b - a) ** (m - k) for k, c in enumerate(coeffs) if c)


# ------------------------------------------------------------------- events


@dataclass(frozen=True)
class EventSpec:
    """An event (or [0,1]-valued weight) on configurations of a bound graph.

    ``kind`` is one of ``connection``, ``volume``, ``radius``, ``ghost`` or
    ``custom``.  Custom predicates receive the open-edge bool array.
    """

    kind: str
    params: tuple = ()
    predicate: Callable[[np.ndarray], bool] | None = field(default=None, compare=False)
    increasing: bool = True

    @classmethod
    def connection(cls, u: int, v: int) -> "EventSpec":
        return cls("connection", (int(u), int(v)))

    @classmethod
    def volume(cls, v: int, n: int) -> "EventSpec":
        return cls("volume", (int(v), int(n)))

    @classmethod
    def radius(cls, v: int, n: int, intrinsic: bool = True) -> "EventSpec":
        return cls("radius", (int(v), int(n), "intrinsic" if intrinsic else "extrinsic"))

    @classmethod
    def ghost(cls, v: int, h: float) -> "EventSpec":
        return cls("ghost", (int(v), float(h)))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], bool], increasing: bool = False, name: str = "custom"):
        return cls("custom", (name,), fn, increasing)

    @property
    def is_boolean(self) -> bool:
        return self.kind != "ghost"

    def describe(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


@lru_cache(maxsize=256)
def _cluster_tables(key: str, graph_ref: int, v: int):
    g = _GRAPHS[graph_ref]
    indptr, nbr, eid = g.csr
    amb = bfs_distances(g, v)
    return K.enum_cluster(indptr, nbr, eid, g.edge_count, v, amb)


_GRAPHS: dict[int, Graph] = {}


def _tables(graph: Graph, v: int):
    _GRAPHS[id(graph)] = graph
    return _cluster_tables(graph.digest, id(graph), int(v))


@lru_cache(maxsize=64)
def _popcounts(m: int) -> np.ndarray:
    x = np.arange(1 << m, dtype=np.int64)
    c = np.zeros_like(x)
    for b in range(m):
        c += (x >> b) & 1
    return c


def _bit_popcount(bits: np.ndarray) -> np.ndarray:
    b = bits.copy()
    c = np.zeros(b.shape, dtype=np.int64)
    while np.any(b):
        c += (b & np.uint64(1)).astype(np.int64)
        b >>= np.uint64(1)
    return c


def event_indicator(graph: Graph, event: EventSpec) -> np.ndarray:
    """Boolean array over all masks."""
    _cap(graph, ENUM_CAP, "exact enumeration")
    m = graph.edge_count
    if event.kind == "connection":
        u, v = event.params
        bits, _, _ = _tables(graph, u)
        return ((bits >> np.uint64(v)) & np.uint64(1)).astype(bool)
    if event.kind == "volume":
        v, n = event.params
        bits, _, _ = _tables(graph, v)
        return _bit_popcount(bits) >= n
    if event.kind == "radius":
        v, n, which = event.params
        _, rint, rext = _tables(graph, v)
        return (rint if which == "intrinsic" else rext) >= n
    if event.kind == "custom":
        out = np.zeros(1 << m, dtype=bool)
        openb = np.zeros(m, dtype=bool)
        for mask in range(1 << m):
            for e in range(m):
                openb[e] = (mask >> e) & 1
            out[mask] = bool(event.predicate(openb))
        return out
    raise ValueError(f"event kind {event.kind!r} has no indicator")


def _counts(ind: np.ndarray, m: int) -> list[int]:
    return np.bincount(_popcounts(m)[ind], minlength=m + 1).astype(np.int64).tolist()


@dataclass
class ExactResult:
    """Exact probability: integer polynomial ``coefficients`` and the value at ``p``."""

    coefficients: list[int] | None
    edge_count: int
    p: object
    value: object
    event: dict

    def __float__(self) -> float:
        return float(self.value)

    def at(self, p) -> Fraction:
        if self.coefficients is None:
            raise ValueError("weight-valued results are not polynomials")
        return poly_value(self.coefficients, self.edge_count, p)


def exact_event_prob(graph: Graph, event: EventSpec, p) -> ExactResult:
    _cap(graph, ENUM_CAP, "exact enumeration")
    m = graph.edge_count
    if event.kind == "ghost":
        return ExactResult(None, m, p, magnetization_exact(graph, p, event.params[1], event.params[0]),
                           event.describe())
    coeffs = _counts(event_indicator(graph, event), m)
    return ExactResult(coeffs, m, p, poly_value(coeffs, m, p), event.describe())


def volume_distribution(graph: Graph, v: int) -> np.ndarray:
    """Integer table ``t[s, k]``: masks with ``|K_v| = s`` and ``k`` open edges."""
    bits, _, _ = _tables(graph, v)
    m = graph.edge_count
    vol = _bit_popcount(bits)
    t = np.zeros((graph.vertex_count + 1, m + 1), dtype=np.int64)
    np.add.at(t, (vol, _popcounts(m)), 1)
    return t


def magnetization_exact(graph: Graph, p, h: float, v: int) -> float:
    """``E[1 - exp(-h |K_v|)]`` by enumeration (float, compensated summation)."""
    t = volume_distribution(graph, v)
    m = graph.edge_count
    p = float(p)
    terms = []
    for s in range(1, t.shape[0]):
        w = -math.expm1(-h * s)
        for k in range(m + 1):
            if t[s, k]:
                terms.append(t[s, k] * w * p**k * (1 - p) ** (m - k))
    return math.fsum(terms)


# -------------------------------------------------------- disjoint occurrence


def _check_increasing(ind: np.ndarray, m: int, name: str) -> None:
    for b in range(m):
        idx = np.arange(1 << m)
        lo = idx[(idx >> b) & 1 == 0]
        if np.any(ind[lo] & ~ind[lo | (1 << b)]):
            raise NonIncreasingEventError(f"event {name} is not increasing; only increasing events are supported")


def disjoint_indicator(graph: Graph, a: EventSpec, b: EventSpec, method: str = "auto") -> np.ndarray:
    """Indicator of ``A o B`` over all masks.

    ``method`` is ``flow`` (connection pairs sharing an endpoint; Menger),
    ``witness`` (minimal witnesses of each event, disjoint pairs, upward
    closure) or ``auto``.
    """
    _cap(graph, DISJOINT_CAP, "disjoint occurrence")
    m = graph.edge_count
    shared = _shared_endpoint(a, b)
    if method == "flow" or (method == "auto" and shared is not None):
        if shared is None:
            raise ValueError("flow method needs two connection events with a common endpoint")
        x, y, w = shared
        indptr, nbr, eid = graph.csr
        return K.enum_two_disjoint_paths(indptr, nbr, eid, m, x, y, w)
    ia = event_indicator(graph, a)
    ib = event_indicator(graph, b)
    for ind, ev in ((ia, a), (ib, b)):
        if ev.kind == "custom" and not ev.increasing:
            raise NonIncreasingEventError("custom event not declared increasing")
        _check_increasing(ind, m, ev.kind)
    mina = K.minimal_elements(ia, m)
    minb = K.minimal_elements(ib, m)
    return K.upward_closure(K.disjoint_pairs(mina, minb, m), m)


def _shared_endpoint(a: EventSpec, b: EventSpec):
    if a.kind != "connection" or b.kind != "connection":
        return None
    for x in a.params:
        for y in b.params:
            if x == y:
                u = a.params[1] if a.params[0] == x else a.params[0]
                v = b.params[1] if b.params[0] == y else b.params[0]
                return u, v, x
    return None


def disjoint_occurrence_prob(graph: Graph, a: EventSpec, b: EventSpec, p, method: str = "auto") -> ExactResult:
    ind = disjoint_indicator(graph, a, b, method)
    m = graph.edge_count
    coeffs = _counts(ind, m)
    return ExactResult(coeffs, m, p, poly_value(coeffs, m, p),
                       {"kind": "disjoint", "a": a.describe(), "b": b.describe()})


@dataclass
class BKReport:
    min_slack: Fraction
    checks: int
    worst: dict
    rows: list = field(repr=False, default_factory=list)

    @property
    def ok(self) -> bool:
        return self.min_slack >= 0


def default_event_pairs(graph: Graph, max_vertices: int = 4) -> list[tuple[EventSpec, EventSpec]]:
    """Deterministic BK test family: chained connections plus volume/radius pairs."""
    far = int(np.argmax(bfs_distances(graph, 0)))
    mid = graph.vertex_count // 2
    verts = sorted({0, far, mid, min(1, graph.vertex_count - 1)})[:max_vertices]
    pairs = []
    for u in verts:
        for w in verts:
            for v in verts:
                pairs.append((EventSpec.connection(u, w), EventSpec.connection(w, v)))
    pairs.append((EventSpec.connection(0, far), EventSpec.connection(0, far)))
    pairs.append((EventSpec.volume(0, 3), EventSpec.volume(far, 3)))
    # intrinsic radius is not monotone (closing a cycle shortens paths), so only the ambient one
    pairs.append((EventSpec.radius(0, 2, intrinsic=False), EventSpec.connection(mid, far)))
    pairs.append((EventSpec.radius(0, 2, intrinsic=False), EventSpec.volume(0, 2)))
    return pairs


def verify_bk(graph: Graph, p_values=(Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)),
              pairs: list[tuple[EventSpec, EventSpec]] | None = None) -> BKReport:
    """Exact check of ``P(A o B) <= P(A) P(B)`` and ``<= min(P(A), P(B))``."""
    _cap(graph, DISJOINT_CAP, "disjoint occurrence")
    m = graph.edge_count
    pairs = default_event_pairs(graph) if pairs is None else pairs
    worst, best, rows, n = None, None, [], 0
    for a, b in pairs:
        ca = _counts(event_indicator(graph, a), m)
        cb = _counts(event_indicator(graph, b), m)
        cab = _counts(disjoint_indicator(graph, a, b), m)
        for p in p_values:
            p = _rational(p)
            na, nb, nab = (_numerator(c, m, p.numerator, p.denominator) for c in (ca, cb, cab))
            den = p.denominator**m
            slack = Fraction(na * nb - nab * den, den * den)
            slack_min = Fraction(min(na, nb) - nab, den)
            s = min(slack, slack_min)
            n += 1
            row = {"a": a.describe(), "b": b.describe(), "p": str(p), "slack": str(s)}
            rows.append(row)
            if best is None or s < best:
                best, worst = s, row
    return BKReport(best if best is not None else Fraction(0), n, worst or {}, rows)


# --------------------------------------------------------- exact matrices


@dataclass
class ExactMatrices:
    """Integer polynomial tables for the two-point family of one graph.

    ``dint[u, v, d, k]`` counts masks with ``k`` open edges and intrinsic
    distance ``d`` between ``u`` and ``v``; ``amb`` holds graph distances.
    """

    graph: Graph
    dint: np.ndarray
    amb: np.ndarray

    @property
    def m(self) -> int:
        return self.graph.edge_count

    def table(self, kind: str, n: int = 0, n2: int = 0) -> np.ndarray:
        """Coefficient table ``[u, v, k]`` for one matrix kind."""
        D = self.dint.shape[2] - 1
        conn = self.dint.sum(axis=2)
        if kind == "T":
            return conn
        if kind == "C":
            return conn * (self.amb >= n)[:, :, None]
        if kind == "S":
            return conn * (self.amb == n)[:, :, None]
        if kind == "Bint":
            return self.dint[:, :, : min(n, D) + 1].sum(axis=2)
        if kind == "Sint":
            return self.dint[:, :, n] if n <= D else np.zeros_like(conn)
        if kind == "Aint":
            lo, hi = n, n2
            if lo > D:
                return np.zeros_like(conn)
            return self.dint[:, :, lo: min(hi, D) + 1].sum(axis=2)
        raise ValueError(f"unknown matrix kind {kind!r}")

    def numerators(self, kind: str, p: Fraction, n: int = 0, n2: int = 0) -> np.ndarray:
        """Object array of integers ``b^m * M(u, v)`` at ``p = a/b``."""
        t = self.table(kind, n, n2)
        a, b = p.numerator, p.denominator
        m = self.m
        w = [a**k * (b - a) ** (m - k) for k in range(m + 1)]
        V = t.shape[0]
        out = np.empty((V, V), dtype=object)
        for i in range(V):
            for j in range(V):
                out[i, j] = sum(int(c) * w[k] for k, c in enumerate(t[i, j]) if c)
        return out

    def values(self, kind: str, p, n: int = 0, n2: int = 0) -> np.ndarray:
        p = _rational(p)
        num = self.numerators(kind, p, n, n2)
        den = p.denominator**self.m
        return np.vectorize(lambda x: x / den, otypes=[float])(num)


def exact_matrices(graph: Graph) -> ExactMatrices:
    _cap(graph, DISJOINT_CAP, "exact matrices")
    indptr, nbr, eid = graph.csr
    dmax = graph.vertex_count
    dint = K.enum_pair_counts(indptr, nbr, eid, graph.edge_count, dmax)
    amb = np.array([bfs_distances(graph, v) for v in range(graph.vertex_count)])
    amb = np.where(amb < 0, np.iinfo(np.int64).max, amb)
    return ExactMatrices(graph, dint, amb)


def _objmatmul(a, b):
    V = a.shape[0]
    out = np.empty((V, V), dtype=object)
    for i in range(V):
        for j in range(V):
            out[i, j] = sum(a[i, k] * b[k, j] for k in range(V))
    return out


@dataclass
class EntrywiseReport:
    p: Fraction
    n: int
    m: int
    slack_extrinsic: Fraction
    slack_intrinsic: Fraction

    @property
    def ok(self) -> bool:
        return self.slack_extrinsic >= 0 and self.slack_intrinsic >= 0


def verify_entrywise_inequalities(graph: Graph, p, n: int, m: int,
                                  mats: ExactMatrices | None = None) -> EntrywiseReport:
    """Minimum entrywise slack of ``C(n+m) <= C(m) S(n)`` and ``Aint(n, n+m) <= Bint(m) Sint(n)``.

    Both sides are exact rationals; a negative slack is a genuine violation.
    """
    mats = exact_matrices(graph) if mats is None else mats
    p = _rational(p)
    den = p.denominator**mats.m
    lhs = mats.numerators("C", p, n + m)
    rhs = _objmatmul(mats.numerators("C", p, m), mats.numerators("S", p, n))
    ext = min(Fraction(int(rhs[i, j]) - int(lhs[i, j]) * den, den * den)
              for i in range(lhs.shape[0]) for j in range(lhs.shape[1]))
    lhs = mats.numerators("Aint", p, n, n + m)
    rhs = _objmatmul(mats.numerators("Bint", p, m), mats.numerators("Sint", p, n))
    intr = min(Fraction(int(rhs[i, j]) - int(lhs[i, j]) * den, den * den)
               for i in range(lhs.shape[0]) for j in range(lhs.shape[1]))
    return EntrywiseReport(p, n, m, ext, intr)


# ------------------------------------------------------------- inverse BK


@dataclass
class InverseBKReport:
    """Both sides of the ghost-field inverse-BK and disjoint-cluster comparisons.

    ``*_literal`` use the constants as usually stated; ``*_proven`` use the
    constants the standard induction actually delivers (see README).  The
    acceptance check is on the proven forms.
    """

    ell: int
    vertices: tuple
    h: tuple
    p: float
    disjoint_occurrence: float
    disjoint_clusters: float
    product_inf: float
    product_sup: float
    product_sup_pow: float
    sup_T2: float
    sup_T3: float
    max_degree: int
    slack_inverse_bk_literal: float
    slack_inverse_bk_proven: float
    slack_diagrammatic_literal: float
    slack_diagrammatic_proven: float

    @property
    def ok(self) -> bool:
        return self.slack_inverse_bk_proven >= -FLOAT_FLOOR and self.slack_diagrammatic_proven >= -FLOAT_FLOOR

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["vertices"] = list(self.vertices)
        d["h"] = list(self.h)
        return d


FLOAT_FLOOR = 1e-12


def _local_graph(graph: Graph, verts: np.ndarray, open_edges: np.ndarray):
    """CSR over a vertex subset using only the given (global) open edges."""
    loc = {int(v): i for i, v in enumerate(verts)}
    e = graph.edges[open_edges]
    le = np.array([[loc[int(a)], loc[int(b)]] for a, b in e], dtype=np.int64).reshape(-1, 2)
    n = len(verts)
    mloc = le.shape[0]
    tails = np.concatenate([le[:, 0], le[:, 1]])
    heads = np.concatenate([le[:, 1], le[:, 0]])
    eids = np.concatenate([np.arange(mloc), np.arange(mloc)])
    order = np.lexsort((eids, tails))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, tails + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, heads[order], eids[order], (1 << mloc) - 1, loc


def verify_inverse_bk(graph: Graph, p: float, h: Sequence[float], vertices: Sequence[int]) -> InverseBKReport:
    """Exact evaluation of the ghost-field disjoint-occurrence lower bounds (ell = 2 or 3)."""
    _cap(graph, INVERSE_BK_CAP, "inverse-BK verification")
    ell = len(vertices)
    if ell not in (2, 3) or len(h) != ell:
        raise ValueError("need 2 or 3 vertices with one intensity each")
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    m = graph.edge_count
    p = float(p)
    xs = [math.exp(-hi) for hi in h]
    indptr, nbr, eid = graph.csr
    circ_terms = [[] for _ in range(m + 1)]
    disj_terms = [[] for _ in range(m + 1)]
    cache: dict = {}
    openb = np.zeros(m, dtype=bool)
    vlist = [int(v) for v in vertices]
    for mask in range(1 << m):
        for e in range(m):
            openb[e] = (mask >> e) & 1
        k = int(openb.sum())
        parent, _, size = K.uf_build(graph.vertex_count, graph.edges, openb)
        roots = [int(parent[v]) for v in vlist]
        groups: dict[int, list[int]] = {}
        for i, r in enumerate(roots):
            groups.setdefault(r, []).append(i)
        pc = 1.0
        for r, idx in groups.items():
            vol = int(size[r])
            if len(idx) == 1:
                pc *= -math.expm1(-h[idx[0]] * vol)
                continue
            verts = np.flatnonzero(parent == r)
            cl_edges = np.flatnonzero(openb & (parent[graph.edges[:, 0]] == r))
            key = (tuple(cl_edges.tolist()), tuple(idx))
            if key not in cache:
                cache[key] = _group_prob(graph, verts, cl_edges, [vlist[i] for i in idx], [xs[i] for i in idx])
            pc *= cache[key]
        circ_terms[k].append(pc)
        if len(groups) == ell:
            disj_terms[k].append(math.prod(-math.expm1(-h[i] * int(size[roots[i]])) for i in range(ell)))
    circ = math.fsum(math.fsum(t) * p**k * (1 - p) ** (m - k) for k, t in enumerate(circ_terms))
    disj = math.fsum(math.fsum(t) * p**k * (1 - p) ** (m - k) for k, t in enumerate(disj_terms))

    mags = np.array([[magnetization_exact(graph, p, hi, v) for v in range(graph.vertex_count)] for hi in h])
    prod_inf = float(np.prod(mags.min(axis=1)))
    prod_sup = float(np.prod(mags.max(axis=1)))
    prod_sup_pow = float(np.prod(mags.max(axis=1) ** ell))
    mats = exact_matrices(graph)
    T = mats.values("T", p)
    T2, T3 = T @ T, T @ T @ T
    pairs = [(vlist[i], vlist[j]) for i in range(ell) for j in range(i + 1, ell)]
    sup2 = max(T2[a, b] for a, b in pairs)
    sup3 = max(T3[a, b] for a, b in pairs)
    M = int(graph.degrees.max())
    pre = 4 * M / p**2
    kn_lit = circ - (prod_inf - pre * math.comb(ell - 1, 2) * prod_sup * sup2)
    kn_pro = circ - (prod_inf - pre * math.comb(ell, 2) * prod_sup * sup2)
    dg_lit = disj - (circ - 2 * math.comb(ell - 1, 2) * prod_sup_pow * sup3)
    dg_pro = disj - (circ - ell * (ell - 1) * prod_sup * sup3)
    return InverseBKReport(ell, tuple(vlist), tuple(float(x) for x in h), p, circ, disj, prod_inf,
                           prod_sup, prod_sup_pow, float(sup2), float(sup3), M,
                          *(float(x) for x in (kn_lit, kn_pro, dg_lit, dg_pro)))


def _group_prob(graph, verts, cl_edges, group_vertices, xs) -> float:
    lp, ln, le, allowed, loc = _local_graph(graph, verts, cl_edges)
    members = np.arange(len(verts), dtype=np.int64)
    lv = [loc[v] for v in group_vertices]
    if len(lv) == 2:
        feas = K.feasible2(lp, ln, le, lv[0], lv[1], allowed)
        return float(K.ghost_prob2(feas, members, xs[0], xs[1]))
    F = K.feasible3(lp, ln, le, lv[0], lv[1], lv[2], allowed)
    return float(K.ghost_prob3(F, members, xs[0], xs[1], xs[2]))


# ------------------------------------------------------------------- trees


@dataclass
class TreeRecursion:
    """Exact quantities for percolation on the infinite ``k``-regular tree."""

    k: int
    p: float
    h: float
    n_max: int
    theta_branch: float
    theta: float
    chi: float
    magnetization: float
    sphere_mean: np.ndarray
    ball_mean: np.ndarray
    radius_tail: np.ndarray

    @property
    def trifurcation(self) -> float:
        """Probability that exactly three root branches are infinite."""
        b = self.p * self.theta_branch
        return math.comb(self.k, 3) * b**3 * (1 - b) ** (self.k - 3)

    def volume_tail(self, n_max: int) -> np.ndarray:
        """``P(|K_root| >= n)`` for ``n = 0..n_max`` via the hitting-time formula."""
        return volume_tail(self.k, self.p, n_max)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "p": self.p, "h": self.h, "n_max": self.n_max,
            "theta_branch": self.theta_branch, "theta": self.theta, "chi": self.chi,
            "magnetization": self.magnetization, "trifurcation": self.trifurcation,
            "sphere_mean": self.sphere_mean.tolist(), "ball_mean": self.ball_mean.tolist(),
            "radius_tail": self.radius_tail.tolist(),
        }


def branch_survival(k: int, p: float) -> float:
    """Largest root of ``t = 1 - (1 - p t)^(k-1)`` in [0, 1]."""
    if p * (k - 1) <= 1:
        return 0.0
    f = lambda t: 1 - (1 - p * t) ** (k - 1) - t
    return float(brentq(f, 1e-15, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def tree_magnetization(k: int, p: float, h: float) -> float:
    """Root magnetization from the branch generating-function fixed point."""
    if h <= 0:
        return 0.0
    x = math.exp(-h)
    f = lambda g: x * (1 - p + p * g) ** (k - 1) - g
    g = brentq(f, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return -math.expm1(-h) if p == 0 else 1 - x * (1 - p + p * g) ** k


def volume_tail(k: int, p: float, n_max: int) -> np.ndarray:
    """Exact ``P(|K_root| >= n)``, ``n = 0..n_max``.

    A root with ``j`` open edges is followed by ``j`` independent branches with
    Binomial(k-1, p) offspring, and the total size of ``j`` such trees is
    ``s`` with probability ``(j/s) P(Bin(s(k-1), p) = s - j)``.
    """
    pmf = np.zeros(n_max + 1)
    if n_max >= 1:
        pmf[1] = (1 - p) ** k
    for n in range(2, n_max + 1):
        s = n - 1
        js = np.arange(1, k + 1)
        pmf[n] = float(np.sum(binom.pmf(js, k, p) * js / s * binom.pmf(s - js, s * (k - 1), p)))
    tail = np.empty(n_max + 1)
    tail[0] = 1.0
    tail[1:] = 1.0 - np.cumsum(pmf)[:-1]
    return np.clip(tail, 0.0, 1.0)


def tree_recursion(k: int, p: float, h: float = 0.0, n_max: int = 20) -> TreeRecursion:
    if k < 3:
        raise ValueError("tree degree must be >= 3")
    tb = branch_survival(k, p)
    theta = 1 - (1 - p * tb) ** k
    pc = 1 / (k - 1)
    chi = 1 + k * p / (1 - (k - 1) * p) if p < pc else math.inf
    ns = np.arange(n_max + 1)
    sph = np.where(ns == 0, 1.0, k * (k - 1.0) ** np.maximum(ns - 1, 0) * p**ns)
    s = [1.0]
    for _ in range(n_max):
        s.append(1 - (1 - p * s[-1]) ** (k - 1))
    rad = np.array([1.0] + [1 - (1 - p * s[n - 1]) ** k for n in range(1, n_max + 1)])
    mag = tree_magnetization(k, p, h)
    return TreeRecursion(k, float(p), float(h), n_max, tb, theta, chi, mag, sph, np.cumsum(sph), rad)


# ------------------------------------------------------------------ corpus


def corpus(max_edges: int = 16) -> list[tuple[str, Graph]]:
    """Fixed small-graph corpus (paths, cycles, trees, grid and {3,7} fragments, ...)."""
    def path(n):
        return from_edges([(i, i + 1) for i in range(n)], family_tag=f"path {n}")

    def cycle(n):
        return from_edges([(i, (i + 1) % n) for i in range(n)], family_tag=f"cycle {n}")

    t37 = build_tiling(3, 7, 1).graph
    wheel = ball(t37, 0, 1)
    items = [
        ("path4", path(4)),
        ("path7", path(7)),
        ("cycle6", cycle(6)),
        ("cycle8", cycle(8)),
        ("tree3_1", build_tree(3, 1)),
        ("tree3_2", build_tree(3, 2)),
        ("bowtie", from_edges([(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)], family_tag="bowtie")),
        ("k4", from_edges([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], family_tag="complete 4")),
        ("ladder2x4", build_grid(2, 4)),
        ("grid3x3", build_grid(3, 3)),
        ("theta", from_edges([(0, 1), (1, 5), (0, 2), (2, 5), (0, 3), (3, 4), (4, 5)], family_tag="theta")),
        ("wheel37", Graph(wheel.vertex_count, wheel.edges, wheel.boundary, "tiling 3,7 vertex star")),
        ("petersen", from_edges([(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)]
                                + [(5 + i, 5 + (i + 2) % 5) for i in range(5)], family_tag="petersen")),
        ("two_components", from_edges([(0, 1), (1, 2), (3, 4), (4, 5)], family_tag="two paths")),
    ]
    return [(n, g) for n, g in items if g.edge_count <= max_edges]


def to_json(obj, provenance: dict | None = None) -> str:
    """Golden-file JSON for oracle results with input provenance."""
    def conv(o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if hasattr(o, "to_dict"):
            return o.to_dict()
        if hasattr(o, "__dict__"):
            return {k: v for k, v in o.__dict__.items() if not k.startswith("_") and k != "graph"}
        raise TypeError(type(o))

    doc = {"provenance": provenance or {}, "result": obj}
    return json.dumps(doc, default=conv, sort_keys=True, indent=1)
