"""Graph families: regular trees, {p,q} tiling patches and their duals, grids.

Tilings are grown one ring of faces at a time from a central face using a
purely combinatorial rotation system, so construction is exact and the
vertex numbering is canonical (ring order, then walk order around the ring).

Dart conventions for :class:`CombinatorialMap`: edge ``e`` owns darts
``2e`` (tail ``edges[e, 0]``) and ``2e + 1`` (tail ``edges[e, 1]``), so
``alpha(d) = d ^ 1``.  ``sigma`` rotates clockwise around the tail, which makes
the orbits of ``phi = sigma o alpha`` trace each face counterclockwise with
the face on the left.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction

import numpy as np

__all__ = [
    "Graph",
    "CombinatorialMap",
    "GraphFormatError",
    "build_tree",
    "build_tiling",
    "build_grid",
    "from_edges",
    "dual",
    "ball",
    "bfs_distances",
    "growth_rate",
    "GrowthResult",
    "to_text",
    "from_text",
]


class GraphFormatError(ValueError):
    """Raised for malformed graph text or invalid construction parameters."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable finite simple graph.

    ``origin`` optionally maps each vertex to a vertex id of a parent graph
    (set by :func:`ball`).  It is bookkeeping only and is not serialized.
    """

    vertex_count: int
    edges: np.ndarray
    boundary: np.ndarray
    family_tag: str = "graph"
    origin: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        e = np.ascontiguousarray(np.asarray(self.edges, dtype=np.int64).reshape(-1, 2))
        b = np.zeros(self.vertex_count, dtype=bool)
        bnd = np.asarray(self.boundary)
        if bnd.dtype == bool:
            if bnd.size != self.vertex_count:
                raise GraphFormatError("boundary mask length differs from vertex count")
            b[:] = bnd
        elif bnd.size:
            b[bnd.astype(np.int64)] = True
        if "\n" in self.family_tag:
            raise GraphFormatError("family tag must be a single line")
        e.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "boundary", b)
        if e.size:
            if e.min() < 0 or e.max() >= self.vertex_count:
                raise GraphFormatError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphFormatError("self-loop")
            key = np.minimum(e[:, 0], e[:, 1]) * self.vertex_count + np.maximum(e[:, 0], e[:, 1])
            if np.unique(key).size != key.size:
                raise GraphFormatError("multi-edge")

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, neighbor, edge_id)`` adjacency, neighbors in edge order."""
        v, e = self.vertex_count, self.edges
        m = e.shape[0]
        tails = np.concatenate([e[:, 0], e[:, 1]])
        heads = np.concatenate([e[:, 1], e[:, 0]])
        eids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((eids, tails))
        indptr = np.zeros(v + 1, dtype=np.int64)
        np.add.at(indptr, tails + 1, 1)
        np.cumsum(indptr, out=indptr)
        out = (indptr, heads[order].astype(np.int64), eids[order].astype(np.int64))
        for a in out:
            a.setflags(write=False)
        return out

    @property
    def adjacency(self) -> list[list[int]]:
        indptr, nbr, _ = self.csr
        return [nbr[indptr[i]:indptr[i + 1]].tolist() for i in range(self.vertex_count)]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    @property
    def boundary_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)

    def distances_from(self, v: int) -> np.ndarray:
        return bfs_distances(self, v)

    def is_connected(self) -> bool:
        return self.vertex_count == 0 or bool(np.all(bfs_distances(self, 0) >= 0))

    @cached_property
    def digest(self) -> str:
        """SHA-256 of the canonical text serialization."""
        return hashlib.sha256(to_text(self).encode()).hexdigest()

    def __repr__(self) -> str:
        return f"Graph({self.family_tag!r}, V={self.vertex_count}, E={self.edge_count})"


def from_edges(edges, vertex_count=None, boundary=(), family_tag="graph") -> Graph:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    n = int(e.max()) + 1 if vertex_count is None and e.size else (vertex_count or 0)
    return Graph(n, e, np.asarray(boundary, dtype=np.int64), family_tag)


def bfs_distances(graph: Graph, source: int, max_dist: int = -1) -> np.ndarray:
    """Hop distances from ``source``; ``-1`` marks unreachable vertices."""
    from ._kernels import bfs_all

    indptr, nbr, _ = graph.csr
    return bfs_all(indptr, nbr, int(source), int(max_dist))


def build_tree(k: int, depth: int) -> Graph:
    """Rooted ``k``-regular tree truncated at ``depth``; root 0, ids breadth-first."""
    if k < 3:
        raise GraphFormatError(f"tree degree must be >= 3, got {k}")
    if depth < 1:
        raise GraphFormatError(f"tree depth must be >= 1, got {depth}")
    sizes = [1] + [k * (k - 1) ** (i - 1) for i in range(1, depth + 1)]
    n = sum(sizes)
    parent = np.empty(n - 1, dtype=np.int64)
    start_prev, start = 0, 1
    for lvl in range(1, depth + 1):
        branching = k if lvl == 1 else k - 1
        parent[start - 1:start - 1 + sizes[lvl]] = np.repeat(
            np.arange(start_prev, start_prev + sizes[lvl - 1]), branching)
        start_prev, start = start, start + sizes[lvl]
    edges = np.column_stack([parent, np.arange(1, n)])
    return Graph(n, edges, np.arange(n - sizes[-1], n), f"tree k={k} depth={depth}")


def build_grid(rows: int, cols: int | None = None) -> Graph:
    """``rows x cols`` square-lattice vertex grid with free boundary."""
    cols = rows if cols is None else cols
    if rows < 1 or cols < 1:
        raise GraphFormatError("grid dimensions must be positive")
    idx = np.arange(rows * cols).reshape(rows, cols)
    horiz = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    vert = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    edges = np.concatenate([horiz, vert])
    bnd = np.zeros((rows, cols), dtype=bool)
    bnd[0, :] = bnd[-1, :] = bnd[:, 0] = bnd[:, -1] = True
    return Graph(rows * cols, edges, bnd.ravel(), f"grid {rows}x{cols}")


# --------------------------------------------------------------------------
# combinatorial maps


@dataclass(frozen=True, eq=False)
class CombinatorialMap:
    """Planar patch as a rotation system over ``graph``.

    ``provenance`` holds integer arrays linking a dual back to its primal:
    ``vertex_face`` (dual vertex -> primal interior face), ``edge_edge``
    (dual edge -> primal edge) and ``face_vertex`` (dual interior face ->
    primal vertex).
    """

    graph: Graph
    sigma: np.ndarray
    provenance: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.sigma, dtype=np.int64))
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)
        self.validate()

    @property
    def dart_count(self) -> int:
        return 2 * self.graph.edge_count

    def alpha(self, d):
        return np.bitwise_xor(d, 1)

    def tail(self, d):
        d = np.asarray(d)
        return self.graph.edges[d >> 1, d & 1]

    @cached_property
    def phi(self) -> np.ndarray:
        return self.sigma[np.arange(self.dart_count) ^ 1]

    @cached_property
    def _face_data(self):
        phi = self.phi
        face_of = np.full(self.dart_count, -1, dtype=np.int64)
        cycles = []
        for d0 in range(self.dart_count):
            if face_of[d0] >= 0:
                continue
            cyc = [d0]
            face_of[d0] = len(cycles)
            d = phi[d0]
            while d != d0:
                face_of[d] = len(cycles)
                cyc.append(int(d))
                d = phi[d]
            cycles.append(np.array(cyc, dtype=np.int64))
        return face_of, cycles

    @cached_property
    def outer_face(self) -> int:
        """Index (into all phi-orbits) of the outer face: the one with boundary darts.

        Picked as the orbit containing the dart that leaves the smallest boundary
        vertex along the boundary with the exterior on its left.
        """
        face_of, cycles = self._face_data
        if "outer_dart" in self.provenance:
            return int(face_of[self.provenance["outer_dart"]])
        # longest orbit through a boundary-only edge set; fall back to longest orbit
        lens = np.array([c.size for c in cycles])
        return int(np.argmax(lens))

    @cached_property
    def faces(self) -> list[np.ndarray]:
        """Interior faces as dart cycles (counterclockwise, face on the left)."""
        _, cycles = self._face_data
        return [c for i, c in enumerate(cycles) if i != self.outer_face]

    @cached_property
    def dart_face(self) -> np.ndarray:
        """Interior face index of each dart, ``-1`` for darts on the outer face."""
        face_of, _ = self._face_data
        out = np.full(self.dart_count, -1, dtype=np.int64)
        for i, c in enumerate(self.faces):
            out[c] = i
        return out

    def face_vertices(self, i: int) -> np.ndarray:
        return self.tail(self.faces[i])

    @property
    def outer_darts(self) -> np.ndarray:
        _, cycles = self._face_data
        return cycles[self.outer_face]

    @cached_property
    def interior_edges(self) -> np.ndarray:
        """Edges with an interior face on both sides."""
        df = self.dart_face
        return np.flatnonzero((df[0::2] >= 0) & (df[1::2] >= 0))

    def euler_characteristic(self) -> int:
        _, cycles = self._face_data
        return self.graph.vertex_count - self.graph.edge_count + len(cycles)

    def validate(self) -> None:
        n = self.dart_count
        s = self.sigma
        if s.shape != (n,):
            raise GraphFormatError("sigma length must equal the dart count")
        if n and not np.array_equal(np.sort(s), np.arange(n)):
            raise GraphFormatError("sigma is not a permutation")
        tails = self.tail(np.arange(n))
        if n and np.any(tails[s] != tails):
            raise GraphFormatError("sigma moves a dart to another vertex")
        seen = np.zeros(n, dtype=bool)
        vseen = np.zeros(self.graph.vertex_count, dtype=bool)
        for d0 in range(n):
            if seen[d0]:
                continue
            v = tails[d0]
            if vseen[v]:
                raise GraphFormatError(f"rotation at vertex {v} is not a single cycle")
            vseen[v] = True
            d = d0
            while not seen[d]:
                seen[d] = True
                d = s[d]

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(to_text(self).encode()).hexdigest()

    def __repr__(self) -> str:
        return (f"CombinatorialMap({self.graph.family_tag!r}, V={self.graph.vertex_count}, "
                f"E={self.graph.edge_count}, F={len(self.faces)}+1)")


def _map_from_faces(vertex_count: int, faces: list[list[int]], boundary_walk: list[int],
                    tag: str) -> CombinatorialMap:
    """Assemble a map from ccw interior faces and the boundary walk (interior on left)."""
    dart_of: dict[tuple[int, int], int] = {}
    edges: list[tuple[int, int]] = []

    def add(u, v):
        if (u, v) not in dart_of:
            e = len(edges)
            edges.append((u, v))
            dart_of[(u, v)] = 2 * e
            dart_of[(v, u)] = 2 * e + 1

    for f in faces:
        for i in range(len(f)):
            add(f[i], f[(i + 1) % len(f)])
    sigma = np.full(2 * len(edges), -1, dtype=np.int64)
    for f in faces:
        n = len(f)
        for i in range(n):
            u, v, w = f[i - 1], f[i], f[(i + 1) % n]
            sigma[dart_of[(v, u)]] = dart_of[(v, w)]
    nb = len(boundary_walk)
    for i in range(nb):
        a, v, b = boundary_walk[i - 1], boundary_walk[i], boundary_walk[(i + 1) % nb]
        sigma[dart_of[(v, b)]] = dart_of[(v, a)]
    if np.any(sigma < 0):
        raise GraphFormatError("incomplete rotation system")
    g = Graph(vertex_count, np.array(edges, dtype=np.int64).reshape(-1, 2),
              np.array(sorted(set(boundary_walk)), dtype=np.int64), tag)
    outer = dart_of[(boundary_walk[1], boundary_walk[0])] if nb > 1 else 0
    return CombinatorialMap(g, sigma, {"outer_dart": outer})


def build_tiling(p_gon: int, q_deg: int, layers: int) -> CombinatorialMap:
    """Patch of the {p_gon, q_deg} tiling: a central face plus ``layers`` rings.

    Each ring attaches, at every boundary vertex, the faces it is still missing.
    Spokes leave the boundary between consecutive new faces; two consecutive
    spokes either get joined by a fresh outer path or, when the new face is
    already closed by the old boundary run, share their endpoint.
    """
    if p_gon < 3 or q_deg < 3:
        raise GraphFormatError("face size and vertex degree must be >= 3")
    if layers < 0:
        raise GraphFormatError("layers must be >= 0")
    curv = Fraction(1, p_gon) + Fraction(1, q_deg)
    if curv > Fraction(1, 2):
        raise GraphFormatError(f"{{{p_gon},{q_deg}}} is spherical; need 1/p + 1/q <= 1/2")

    faces: list[list[int]] = [list(range(p_gon))]
    fcount = [1] * p_gon
    boundary = list(range(p_gon))
    nv = p_gon
    for _ in range(layers):
        L = len(boundary)
        missing = [q_deg - fcount[v] for v in boundary]
        if min(missing) < 1:
            raise GraphFormatError("patch closed up; parameters are not hyperbolic or Euclidean")
        spokes = [i for i in range(L) for _ in range(missing[i] - 1)]
        S = len(spokes)
        if S == 0:
            raise GraphFormatError("no spokes; ring cannot grow")
        # gap j sits between spokes j and j+1
        runs, lens = [], []
        for j in range(S):
            a, b = spokes[j], spokes[(j + 1) % S]
            r = (b - a) % L
            if r == 0 and S == 1:
                r = L
            ell = p_gon - 2 - r
            if ell < 0:
                raise GraphFormatError("face would need a negative outer path")
            runs.append(r)
            lens.append(ell)
        parent = list(range(S))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for j in range(S):
            if lens[j] == 0:
                ra, rb = find(j), find((j + 1) % S)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        if len({find(j) for j in range(S)}) == 1 and S > 1 and all(x == 0 for x in lens):
            raise GraphFormatError("ring collapses to a single vertex")
        xid: dict[int, int] = {}
        inter: list[list[int]] = []
        new_walk: list[int] = []
        for j in range(S):
            rj = find(j)
            if rj not in xid:
                xid[rj] = nv
                nv += 1
            if not new_walk or new_walk[-1] != xid[rj]:
                new_walk.append(xid[rj])
            ys = list(range(nv, nv + max(lens[j] - 1, 0)))
            nv += len(ys)
            inter.append(ys)
            new_walk.extend(ys)
        while len(new_walk) > 1 and new_walk[0] == new_walk[-1]:
            new_walk.pop()
        fcount.extend([0] * (nv - len(fcount)))
        for j in range(S):
            a, b = spokes[j], spokes[(j + 1) % S]
            xa, xb = xid[find(j)], xid[find((j + 1) % S)]
            old = [boundary[(a + t) % L] for t in range(runs[j], -1, -1)]
            face = [xa] + inter[j] + ([xb] if xb != xa else []) + old
            faces.append(face)
            for v in face:
                fcount[v] += 1
        boundary = new_walk
    tag = f"tiling p={p_gon} q={q_deg} layers={layers}"
    m = _map_from_faces(nv, faces, boundary, tag)
    if m.euler_characteristic() != 2:
        raise GraphFormatError("construction produced a non-planar patch")
    return m


def dual(cmap: CombinatorialMap) -> CombinatorialMap:
    """Dual patch: a vertex per interior face, an edge per interior primal edge."""
    faces = cmap.faces
    df = cmap.dart_face
    inner = cmap.interior_edges
    new_id = np.full(cmap.graph.edge_count, -1, dtype=np.int64)
    new_id[inner] = np.arange(inner.size)
    # dual edge e'=new_id[e] runs from the face left of dart 2e to the face left of 2e+1
    edges = np.column_stack([df[2 * inner], df[2 * inner + 1]])
    nd = 2 * inner.size
    sigma = np.full(nd, -1, dtype=np.int64)

    def ddart(d):  # primal dart with its face on the left -> dual dart leaving that face
        e = new_id[d >> 1]
        return -1 if e < 0 else 2 * e + (d & 1)

    for cyc in faces:
        duals = [ddart(d) for d in cyc]
        duals = [x for x in duals if x >= 0]
        k = len(duals)
        # phi order is counterclockwise around the face; sigma is clockwise
        for i in range(k):
            sigma[duals[i]] = duals[i - 1]
    bnd_faces = np.unique(df[cmap.outer_darts ^ 1])
    bnd_faces = bnd_faces[bnd_faces >= 0]
    g = Graph(len(faces), edges, bnd_faces, f"dual of {cmap.graph.family_tag}")
    out = CombinatorialMap(g, sigma, {})
    # interior dual faces correspond to primal vertices whose darts are all interior
    face_of, cycles = out._face_data
    face_vertex = np.full(len(cycles), -1, dtype=np.int64)
    for i, c in enumerate(cycles):
        ends = cmap.graph.edges[inner[c >> 1]]
        common = set(ends[0].tolist())
        for a, b in ends[1:].tolist():
            common &= {a, b}
        if len(common) == 1:
            v = common.pop()
            if c.size == cmap.graph.degrees[v]:
                face_vertex[i] = v
    outer_idx = np.flatnonzero(face_vertex < 0)
    if outer_idx.size != 1:
        raise GraphFormatError("dual is not a simply connected patch")
    prov = {
        "outer_dart": int(cycles[outer_idx[0]][0]),
        "vertex_face": np.arange(len(faces), dtype=np.int64),
        "edge_edge": inner.astype(np.int64),
    }
    out = CombinatorialMap(g, sigma, prov)
    face_vertex = np.array([face_vertex[face_of[c[0]]] for c in out.faces], dtype=np.int64)
    out.provenance["face_vertex"] = face_vertex
    return out


def ball(graph: Graph, v: int, r: int) -> Graph:
    """Induced ball ``B(v, r)`` relabeled breadth-first from ``v``.

    Vertices at distance exactly ``r`` are marked as boundary; ``origin`` maps
    new ids back to ``graph``.
    """
    if r < 0:
        raise GraphFormatError("radius must be >= 0")
    dist = bfs_distances(graph, v, r)
    order = _bfs_order(graph, v, dist)
    new = np.full(graph.vertex_count, -1, dtype=np.int64)
    new[order] = np.arange(order.size)
    e = graph.edges
    keep = (new[e[:, 0]] >= 0) & (new[e[:, 1]] >= 0)
    sub = new[e[keep]]
    sub.sort(axis=1)
    sub = sub[np.lexsort((sub[:, 1], sub[:, 0]))]
    bnd = np.flatnonzero(dist[order] == r)
    g = Graph(order.size, sub, bnd, f"ball r={r} of {graph.family_tag}")
    object.__setattr__(g, "origin", order)
    return g


def _bfs_order(graph: Graph, v: int, dist: np.ndarray) -> np.ndarray:
    indptr, nbr, _ = graph.csr
    seen = np.zeros(graph.vertex_count, dtype=bool)
    seen[v] = True
    out = [v]
    dq = deque([v])
    while dq:
        u = dq.popleft()
        for w in nbr[indptr[u]:indptr[u + 1]]:
            if not seen[w] and dist[w] >= 0:
                seen[w] = True
                out.append(int(w))
                dq.append(int(w))
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True)
class GrowthResult:
    ball_sizes: np.ndarray
    sphere_sizes: np.ndarray
    gamma: float
    stderr: float
    window: tuple[int, int]

    @property
    def sequence(self) -> list[tuple[int, int]]:
        return [(n, int(b)) for n, b in enumerate(self.ball_sizes)]


def growth_rate(graph: Graph, v: int, n_max: int, window: tuple[int, int] | None = None) -> GrowthResult:
    """Exponential volume growth rate seen from ``v`` up to radius ``n_max``.

    The rate is the least-squares slope of ``log |dB(v, n)|`` against ``n``
    over the upper half of the radii.  Sphere and ball sizes share the same
    exponential rate, and sphere sizes remove the constant-offset curvature
    that biases ball-size slopes on short windows.
    """
    from .stats import linear_fit

    dist = bfs_distances(graph, v, n_max)
    sph = np.bincount(dist[dist >= 0], minlength=n_max + 1)[: n_max + 1]
    if np.any(graph.boundary[(dist >= 0) & (dist < n_max)]):
        raise GraphFormatError("n_max reaches the truncation boundary")
    balls = np.cumsum(sph)
    lo, hi = window if window is not None else (max(1, n_max // 2), n_max)
    ns = np.arange(lo, hi + 1)
    if ns.size < 4:
        raise GraphFormatError("growth fit window needs at least 4 radii")
    fit = linear_fit(ns.astype(float), np.log(sph[ns].astype(float)))
    return GrowthResult(balls, sph, fit.slope, fit.slope_stderr, (int(lo), int(hi)))


# --------------------------------------------------------------------------
# text format


def to_text(obj: Graph | CombinatorialMap) -> str:
    """Serialize to the line format documented in the README."""
    g = obj.graph if isinstance(obj, CombinatorialMap) else obj
    lines = [f"graph {g.family_tag} {g.vertex_count} {g.edge_count}"]
    lines += [f"{u} {v}" for u, v in g.edges.tolist()]
    lines.append(" ".join(["boundary"] + [str(b) for b in g.boundary_vertices.tolist()]))
    if isinstance(obj, CombinatorialMap):
        lines.append(f"map {obj.dart_count} {int(obj.outer_darts[0])}")
        lines += [f"{d} {s}" for d, s in enumerate(obj.sigma.tolist())]
        for key in ("vertex_face", "edge_edge", "face_vertex"):
            if key in obj.provenance:
                vals = np.asarray(obj.provenance[key]).tolist()
                lines.append(" ".join([key] + [str(x) for x in vals]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Graph | CombinatorialMap:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    try:
        head = lines[0].split(" ")
        if head[0] != "graph" or len(head) < 4:
            raise GraphFormatError("missing graph header")
        nv, ne = int(head[-2]), int(head[-1])
        tag = " ".join(head[1:-2])
        edges = np.array([list(map(int, ln.split(" "))) for ln in lines[1:1 + ne]],
                         dtype=np.int64).reshape(-1, 2)
        btoks = lines[1 + ne].split(" ")
        if btoks[0] != "boundary":
            raise GraphFormatError("missing boundary line")
        g = Graph(nv, edges, np.array(btoks[1:], dtype=np.int64), tag)
        rest = lines[2 + ne:]
        if rest[0] == "end":
            return g
        mtoks = rest[0].split(" ")
        if mtoks[0] != "map":
            raise GraphFormatError("expected map or end")
        nd, outer = int(mtoks[1]), int(mtoks[2])
        pairs = np.array([list(map(int, ln.split(" "))) for ln in rest[1:1 + nd]],
                         dtype=np.int64).reshape(-1, 2)
        if not np.array_equal(pairs[:, 0], np.arange(nd)):
            raise GraphFormatError("dart table out of order")
        prov: dict = {"outer_dart": outer}
        for ln in rest[1 + nd:]:
            if ln == "end":
                break
            toks = ln.split(" ")
            prov[toks[0]] = np.array(toks[1:], dtype=np.int64)
        return CombinatorialMap(g, pairs[:, 1], prov)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GraphFormatError):
            raise
        raise GraphFormatError(f"malformed graph text: {exc}") from exc
