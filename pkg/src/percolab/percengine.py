"""Bernoulli bond configurations and the observables read off them.

Edge ``e`` of sample ``(seed, stream)`` is open iff its counter uniform is
below ``p``.  The same uniforms serve every ``p``, which is the standard
monotone coupling: raising ``p`` only opens edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels as K
from . import rng
from .graphgen import CombinatorialMap, Graph
from .parallel import run_blocks
from .stats import Estimate, mean_estimate

__all__ = [
    "Configuration",
    "ClusterIndex",
    "ClusterStats",
    "GhostField",
    "ClusterSamples",
    "INF",
    "sample_config",
    "config_from_bits",
    "clusters",
    "intrinsic_distance",
    "cluster_stats",
    "con_rad",
    "ghost_sample",
    "magnetization_estimate",
    "furcation_degree",
    "dual_config",
    "sample_clusters",
    "write_jsonl",
]

INF = math.inf


def _seed_pair(seed) -> tuple[int, int]:
    if isinstance(seed, (tuple, list)):
        return int(seed[0]), int(seed[1])
    return int(seed), 0


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True, eq=False)
class Configuration:
    graph: Graph
    p: float
    seed: tuple[int, int]
    open: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        bits = np.array(self.open, dtype=bool, copy=True, order="C")
        if bits.shape != (self.graph.edge_count,):
            raise ValueError("open-bit vector length must equal the edge count")
        bits.setflags(write=False)
        object.__setattr__(self, "open", bits)

    @property
    def open_count(self) -> int:
        return int(self.open.sum())

    def open_distances(self, src: int) -> np.ndarray:
        indptr, nbr, eid = self.graph.csr
        return K.bfs_open(indptr, nbr, eid, self.open, int(src), -1)


def sample_config(graph: Graph, p: float, seed) -> Configuration:
    """One configuration; ``seed`` is a master seed or ``(master, stream)``."""
    p = _check_p(p)
    s = _seed_pair(seed)
    bits = K.open_edges(s[0], s[1], graph.edge_count, p)
    return Configuration(graph, p, s, bits, {"graph": graph.digest, "p": p, "seed": list(s)})


def config_from_bits(graph: Graph, bits, p: float = float("nan")) -> Configuration:
    """Configuration with explicitly given open bits (no RNG provenance)."""
    return Configuration(graph, p, (-1, -1), np.asarray(bits, dtype=bool), {"explicit": True})


@dataclass(frozen=True, eq=False)
class ClusterIndex:
    parent: np.ndarray
    rank: np.ndarray
    volume: np.ndarray
    touches_boundary: np.ndarray

    def find(self, u: int) -> int:
        return int(self.parent[u])

    def same_cluster(self, u: int, v: int) -> bool:
        return self.parent[u] == self.parent[v]

    def volume_of(self, v: int) -> int:
        return int(self.volume[self.parent[v]])

    def touches(self, v: int) -> bool:
        return bool(self.touches_boundary[self.parent[v]])

    @property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent == np.arange(self.parent.size))


def clusters(config: Configuration) -> ClusterIndex:
    g = config.graph
    parent, rank, size = K.uf_build(g.vertex_count, g.edges, config.open)
    touch = np.zeros(g.vertex_count, dtype=bool)
    np.logical_or.at(touch, parent, g.boundary)
    return ClusterIndex(parent, rank, size, touch)


def intrinsic_distance(config: Configuration, u: int, v: int) -> float | int:
    """Hop count inside the open subgraph, ``INF`` if not connected."""
    d = config.open_distances(u)[v]
    return INF if d < 0 else int(d)


@dataclass(frozen=True)
class ClusterStats:
    volume: int
    rad_ext: int
    rad_int: int


def cluster_stats(config: Configuration, v: int) -> ClusterStats:
    dint = config.open_distances(v)
    inside = dint >= 0
    amb = config.graph.distances_from(v)
    return ClusterStats(int(inside.sum()), int(amb[inside].max()), int(dint.max()))


def con_rad(config: Configuration, x: int, y: int) -> float | int:
    """Least ``r`` with ``x`` and ``y`` joined by an open path inside ``B(x,r) u B(y,r)``.

    The union is of subgraphs: an edge is usable only if both ends lie in one of the balls.
    """
    if x == y:
        return 0
    g = config.graph
    indptr, nbr, eid = g.csr
    dx = g.distances_from(x)
    dy = g.distances_from(y)
    if K.bfs_open(indptr, nbr, eid, config.open, x, -1)[y] < 0:
        return INF
    lo, hi = 0, int(max(dx.max(), dy.max()))
    while lo < hi:
        mid = (lo + hi) // 2
        if K.bfs_open_ball_union(indptr, nbr, eid, config.open, x, dx, dy, mid)[y] >= 0:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True, eq=False)
class GhostField:
    graph: Graph
    h: float
    seed: tuple[int, int]
    included: np.ndarray
    index: int = 0


def ghost_sample(graph: Graph, h: float, seed, index: int = 0) -> GhostField:
    """Independent vertex field with inclusion probability ``1 - exp(-h)``.

    ``index`` separates several simultaneous fields drawn for the same sample.
    """
    if not h > 0:
        raise ValueError("ghost intensity h must be positive")
    s = _seed_pair(seed)
    u = rng.uniforms(s[0], s[1], np.arange(graph.vertex_count), domain=rng.GHOST + index)
    return GhostField(graph, float(h), s, u < -math.expm1(-h), index)


def furcation_degree(config: Configuration, v: int, horizon: int) -> int:
    """Number of open branches at ``v`` that reach ambient distance ``horizon`` once ``v`` is removed."""
    g = config.graph
    indptr, nbr, eid = g.csr
    amb = g.distances_from(v)
    bits = config.open.copy()
    parent, _, _ = K.uf_build(g.vertex_count, g.edges, _without_vertex(g, v, bits))
    far = np.zeros(g.vertex_count, dtype=bool)
    np.logical_or.at(far, parent, amb >= horizon)
    seen = set()
    count = 0
    for j in range(indptr[v], indptr[v + 1]):
        if not config.open[eid[j]]:
            continue
        r = parent[nbr[j]]
        if r in seen:
            continue
        seen.add(r)
        if far[r]:
            count += 1
    return count


def _without_vertex(g: Graph, v: int, bits: np.ndarray) -> np.ndarray:
    indptr, _, eid = g.csr
    bits[eid[indptr[v]:indptr[v + 1]]] = False
    return bits


def dual_config(cmap: CombinatorialMap, config: Configuration, dual_map: CombinatorialMap) -> Configuration:
    """Flip every bit and carry it across ``e -> e^dagger``.

    ``dual_map`` must be ``dual(cmap)`` (or its dual when going back).  Primal
    edges on the outer face have no dual partner; they are listed under
    ``outer_edges`` in the provenance.
    """
    if config.graph is not cmap.graph and config.graph.digest != cmap.graph.digest:
        raise ValueError("configuration does not live on this map")
    e2e = dual_map.provenance["edge_edge"]
    bits = ~config.open[e2e]
    mask = np.ones(cmap.graph.edge_count, dtype=bool)
    mask[e2e] = False
    prov = {
        "primal_p": config.p,
        "primal_seed": list(config.seed),
        "effective_p": 1.0 - config.p,
        "outer_edges": np.flatnonzero(mask).tolist(),
    }
    return Configuration(dual_map.graph, 1.0 - config.p, config.seed, bits, prov)


# ------------------------------------------------------------------ batches


@dataclass
class ClusterSamples:
    """Per-sample cluster observables of a fixed root plus radial moments.

    ``moments`` rows hold sums and sums of squares of the intrinsic sphere,
    intrinsic ball, ambient sphere and ambient ball counts of the cluster.
    """

    volume: np.ndarray
    rad_int: np.ndarray
    rad_ext: np.ndarray
    touches: np.ndarray
    capped: np.ndarray
    moments: np.ndarray

    @property
    def n(self) -> int:
        return int(self.volume.size)

    def _est(self, row: int, k: int) -> Estimate:
        return _moment_estimate(self.moments[row, k], self.moments[row + 1, k], self.n)

    def sphere_int(self, k: int) -> Estimate:
        """Mean of ``|dB_int(root, k)|``."""
        return self._est(0, k)

    def ball_int(self, k: int) -> Estimate:
        """Mean of ``|B_int(root, k)|``."""
        return self._est(2, k)

    def sphere_ext(self, k: int) -> Estimate:
        """Mean of ``|K_root n dB(root, k)|``."""
        return self._est(4, k)

    def ball_ext(self, k: int) -> Estimate:
        """Mean of ``|K_root n B(root, k)|``."""
        return self._est(6, k)


def _moment_estimate(s: float, sq: float, n: int) -> Estimate:
    m = s / n
    var = max(sq / n - m * m, 0.0) * n / max(n - 1, 1)
    return Estimate(m, math.sqrt(var / n), n)


def _cluster_block(graph_csr, amb, bnd, p, root, rmax, vol_cap, depth_cap, seed, offset, first, count):
    indptr, nbr, eid = graph_csr
    acc = np.zeros((8, rmax + 1))
    out = K.explore_batch(indptr, nbr, eid, seed, offset + first, count, p, root, amb, rmax,
                          vol_cap, bnd, acc, depth_cap)
    return out + (acc,)


def sample_clusters(graph: Graph, p: float, root: int, n: int, seed: int, rmax: int = 0,
                    vol_cap: int | None = None, workers: int = 1, stream_offset: int = 0,
                    ambient: np.ndarray | None = None, depth_cap: int = -1) -> ClusterSamples:
    """Explore the root cluster in ``n`` samples (streams ``offset .. offset+n-1``).

    ``ambient`` replaces the graph distances from ``root`` used by the
    extrinsic radius and the ambient ball/sphere moments.  ``depth_cap``
    stops the exploration at that intrinsic depth.
    """
    p = _check_p(p)
    amb = graph.distances_from(root) if ambient is None else np.asarray(ambient, dtype=np.int64)
    cap = graph.vertex_count + 1 if vol_cap is None else int(vol_cap)
    res = run_blocks(_cluster_block, n,
                     (graph.csr, amb, graph.boundary, p, int(root), int(rmax), cap, int(depth_cap), int(seed),
                      int(stream_offset)),
                     workers)
    cat = [np.concatenate([r[i] for r in res]) for i in range(5)]
    acc = np.zeros((8, rmax + 1))
    for r in res:  # block order, so the float sums do not depend on the worker count
        acc = acc + r[5]
    return ClusterSamples(*cat, acc)


def magnetization_estimate(graph: Graph, p: float, h: float, v: int, n: int, seed: int = 0,
                           workers: int = 1) -> Estimate:
    """Average of ``1 - exp(-h |K_v|)`` over sampled clusters (no ghost field drawn)."""
    if not h > 0:
        raise ValueError("ghost intensity h must be positive")
    cs = sample_clusters(graph, p, v, n, seed, workers=workers)
    return mean_estimate(-np.expm1(-h * cs.volume), "mean of 1-exp(-h|K|)")


def write_jsonl(path, records: Iterable[dict], provenance: dict | None = None) -> int:
    """Write one JSON object per line; ``provenance`` keys are merged into every record."""
    n = 0
    with open(path, "w") as fh:
        for rec in records:
            row = dict(provenance or {})
            row.update(rec)
            fh.write(json.dumps(row, sort_keys=True, default=_json_default) + "\n")
            n += 1
    return n


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))
