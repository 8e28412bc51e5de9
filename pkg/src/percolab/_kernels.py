"""Compiled inner loops: BFS, union-find, lazy cluster exploration, enumeration."""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import stream_key_nb, uniform_nb

UNREACHED = -1


@njit(cache=True)
def bfs_all(indptr, nbr, src, max_dist):
    n = indptr.size - 1
    dist = np.full(n, -1, np.int64)
    q = np.empty(n, np.int64)
    dist[src] = 0
    q[0] = src
    head, tail = 0, 1
    while head < tail:
        u = q[head]
        head += 1
        du = dist[u]
        if max_dist >= 0 and du >= max_dist:
            continue
        for j in range(indptr[u], indptr[u + 1]):
            w = nbr[j]
            if dist[w] < 0:
                dist[w] = du + 1
                q[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def bfs_open(indptr, nbr, eid, is_open, src, max_dist):
    """BFS distances inside the open subgraph."""
    n = indptr.size - 1
    dist = np.full(n, -1, np.int64)
    q = np.empty(n, np.int64)
    dist[src] = 0
    q[0] = src
    head, tail = 0, 1
    while head < tail:
        u = q[head]
        head += 1
        du = dist[u]
        if max_dist >= 0 and du >= max_dist:
            continue
        for j in range(indptr[u], indptr[u + 1]):
            if not is_open[eid[j]]:
                continue
            w = nbr[j]
            if dist[w] < 0:
                dist[w] = du + 1
                q[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def bfs_open_ball_union(indptr, nbr, eid, is_open, src, dx, dy, r):
    """BFS over open edges lying inside ``B(x, r)`` or inside ``B(y, r)`` (``-1`` = unreachable)."""
    n = indptr.size - 1
    dist = np.full(n, -1, np.int64)
    q = np.empty(n, np.int64)
    dist[src] = 0
    q[0] = src
    head, tail = 0, 1
    while head < tail:
        u = q[head]
        head += 1
        for j in range(indptr[u], indptr[u + 1]):
            w = nbr[j]
            if dist[w] >= 0 or not is_open[eid[j]]:
                continue
            in_x = 0 <= dx[u] <= r and 0 <= dx[w] <= r
            in_y = 0 <= dy[u] <= r and 0 <= dy[w] <= r
            if in_x or in_y:
                dist[w] = dist[u] + 1
                q[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def uf_find(parent, x):
    r = x
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nxt = parent[x]
        parent[x] = r
        x = nxt
    return r


@njit(cache=True)
def uf_build(n, edges, is_open):
    """Union by rank with path compression; returns fully compressed parents."""
    parent = np.arange(n)
    rank = np.zeros(n, np.int64)
    for e in range(edges.shape[0]):
        if not is_open[e]:
            continue
        a = uf_find(parent, edges[e, 0])
        b = uf_find(parent, edges[e, 1])
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        if rank[a] == rank[b]:
            rank[a] += 1
    for v in range(n):
        uf_find(parent, v)
    size = np.zeros(n, np.int64)
    for v in range(n):
        size[parent[v]] += 1
    return parent, rank, size


@njit(cache=True)
def open_edges(seed, stream, m, p):
    key = stream_key_nb(seed, stream, 0)
    out = np.empty(m, np.bool_)
    for e in range(m):
        out[e] = uniform_nb(key, e) < p
    return out


@njit(cache=True)
def edge_uniforms(seed, stream, m):
    key = stream_key_nb(seed, stream, 0)
    out = np.empty(m, np.float64)
    for e in range(m):
        out[e] = uniform_nb(key, e)
    return out


@njit(cache=True)
def explore_batch(indptr, nbr, eid, seed, stream0, count, p, root, amb, rmax, vol_cap,
                  bnd, acc, depth_cap=-1):
    """Explore the cluster of ``root`` in ``count`` independent samples.

    Edges are drawn lazily from the counter RNG, so only the explored region
    costs anything.  Per-sample outputs: volume, intrinsic and extrinsic
    radius, boundary touch, and a cap flag.  For ``n <= rmax`` the rows of
    ``acc`` accumulate, in sample order, sum and sum of squares of
    ``|dB_int(root,n)|``, ``|B_int(root,n)|``, ``|K n dB(root,n)|`` and
    ``|K n B(root,n)|`` (rows 0..7 in that order).
    """
    n = indptr.size - 1
    stamp = np.full(n, -1, np.int64)
    dint = np.zeros(n, np.int64)
    q = np.empty(n, np.int64)
    vol = np.zeros(count, np.int64)
    rint = np.zeros(count, np.int64)
    rext = np.zeros(count, np.int64)
    touch = np.zeros(count, np.bool_)
    capped = np.zeros(count, np.bool_)
    sph = np.zeros(rmax + 1, np.int64)
    ext = np.zeros(rmax + 1, np.int64)
    for s in range(count):
        key = stream_key_nb(seed, stream0 + s, 0)
        sph[:] = 0
        ext[:] = 0
        stamp[root] = s
        dint[root] = 0
        q[0] = root
        head, tail = 0, 1
        ri, re, tb = 0, 0, False
        while head < tail:
            u = q[head]
            head += 1
            du = dint[u]
            if du > ri:
                ri = du
            a = amb[u]
            if a > re:
                re = a
            if bnd[u]:
                tb = True
            if du <= rmax:
                sph[du] += 1
            if a <= rmax:
                ext[a] += 1
            if tail >= vol_cap or du == depth_cap:
                continue
            for j in range(indptr[u], indptr[u + 1]):
                w = nbr[j]
                if stamp[w] == s:
                    continue
                if uniform_nb(key, eid[j]) < p:
                    stamp[w] = s
                    dint[w] = du + 1
                    q[tail] = w
                    tail += 1
                    if tail >= vol_cap:
                        break
        capped[s] = tail >= vol_cap
        vol[s] = tail
        rint[s] = ri
        rext[s] = re
        touch[s] = tb
        cb, ce = 0, 0
        for k in range(rmax + 1):
            cb += sph[k]
            ce += ext[k]
            acc[0, k] += sph[k]
            acc[1, k] += sph[k] * sph[k]
            acc[2, k] += cb
            acc[3, k] += cb * cb
            acc[4, k] += ext[k]
            acc[5, k] += ext[k] * ext[k]
            acc[6, k] += ce
            acc[7, k] += ce * ce
    return vol, rint, rext, touch, capped


@njit(cache=True)
def pair_tally(indptr, nbr, eid, edges, seed, stream0, count, p, window, dmax, counts):
    """Accumulate intrinsic-distance histograms for all window pairs.

    ``counts[i, j, d]`` counts samples with ``d_int(w_i, w_j) = d`` for
    ``d < dmax``; slot ``dmax`` collects connected pairs at distance ``>= dmax``.
    """
    n = indptr.size - 1
    m = edges.shape[0]
    W = window.size
    pos = np.full(n, -1, np.int64)
    for i in range(W):
        pos[window[i]] = i
    for s in range(count):
        is_open = open_edges(seed, stream0 + s, m, p)
        for i in range(W):
            d = bfs_open(indptr, nbr, eid, is_open, window[i], -1)
            for j in range(W):
                dj = d[window[j]]
                if dj >= 0:
                    if dj > dmax:
                        dj = dmax
                    counts[i, j, dj] += 1
    return counts


# ---------------------------------------------------------------- enumeration


@njit(cache=True)
def _mask_open(mask, m, out):
    for e in range(m):
        out[e] = (mask >> e) & 1


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def enum_pair_counts(indptr, nbr, eid, m, dmax):
    """``counts[u, v, d, k]``: configurations with ``k`` open edges and ``d_int(u,v) = d``.

    Distances ``>= dmax`` share the last slot; disconnected pairs are not counted.
    """
    n = indptr.size - 1
    counts = np.zeros((n, n, dmax + 1, m + 1), np.int64)
    is_open = np.zeros(m, np.bool_)
    for mask in range(1 << m):
        _mask_open(mask, m, is_open)
        k = _popcount(mask)
        for u in range(n):
            d = bfs_open(indptr, nbr, eid, is_open, u, -1)
            for v in range(n):
                dv = d[v]
                if dv >= 0:
                    if dv > dmax:
                        dv = dmax
                    counts[u, v, dv, k] += 1
    return counts


@njit(cache=True)
def enum_cluster(indptr, nbr, eid, m, v, amb):
    """Per configuration mask: cluster bitset of ``v``, intrinsic and extrinsic radius."""
    n = indptr.size - 1
    total = 1 << m
    bits = np.zeros(total, np.uint64)
    rint = np.zeros(total, np.int16)
    rext = np.zeros(total, np.int16)
    is_open = np.zeros(m, np.bool_)
    for mask in range(total):
        _mask_open(mask, m, is_open)
        d = bfs_open(indptr, nbr, eid, is_open, v, -1)
        b = np.uint64(0)
        ri, re = 0, 0
        for u in range(n):
            if d[u] >= 0:
                b |= np.uint64(1) << np.uint64(u)
                if d[u] > ri:
                    ri = d[u]
                if amb[u] > re:
                    re = amb[u]
        bits[mask] = b
        rint[mask] = ri
        rext[mask] = re
    return bits, rint, rext


@njit(cache=True)
def minimal_elements(ind, m):
    """Masks of an increasing family none of whose one-edge removals stay inside it."""
    total = 1 << m
    out = []
    for mask in range(total):
        if not ind[mask]:
            continue
        ok = True
        x = mask
        while x:
            low = x & -x
            if ind[mask ^ low]:
                ok = False
                break
            x ^= low
        if ok:
            out.append(mask)
    return np.array(out, np.int64)


@njit(cache=True)
def upward_closure(seed_ind, m):
    """Superset-closure of a family given by an indicator (zeta transform over OR)."""
    out = seed_ind.copy()
    total = 1 << m
    for b in range(m):
        bit = 1 << b
        for mask in range(total):
            if mask & bit and out[mask ^ bit]:
                out[mask] = True
    return out


@njit(cache=True)
def disjoint_pairs(min_a, min_b, m):
    ind = np.zeros(1 << m, np.bool_)
    for a in min_a:
        for b in min_b:
            if a & b == 0:
                ind[a | b] = True
    return ind


@njit(cache=True)
def _augment(indptr, nbr, eid, is_open, flow_dir, src_cap, src_a, src_b, sink, n):
    """One BFS augmentation in a unit-capacity undirected network.

    ``flow_dir[e]`` is +1 if edge ``e`` carries flow from ``edges[e,0]`` to
    ``edges[e,1]``, -1 for the reverse, 0 if idle.  Sources are a super
    source attached to ``src_a``/``src_b`` with residual ``src_cap``.
    """
    prev_v = np.full(n, -2, np.int64)
    prev_j = np.full(n, -1, np.int64)
    q = np.empty(n, np.int64)
    head, tail = 0, 0
    if src_cap[0] > 0 and prev_v[src_a] == -2:
        prev_v[src_a] = -1
        prev_j[src_a] = 0
        q[tail] = src_a
        tail += 1
    if src_cap[1] > 0 and prev_v[src_b] == -2:
        prev_v[src_b] = -1
        prev_j[src_b] = 1
        q[tail] = src_b
        tail += 1
    while head < tail:
        u = q[head]
        head += 1
        if u == sink:
            break
        for j in range(indptr[u], indptr[u + 1]):
            e = eid[j]
            if not is_open[e]:
                continue
            w = nbr[j]
            if prev_v[w] != -2:
                continue
            # orientation of travelling u -> w along e, encoded as direction sign
            sgn = 1 if u < w else -1
            if flow_dir[e] == sgn:
                continue
            prev_v[w] = u
            prev_j[w] = j
            q[tail] = w
            tail += 1
    if prev_v[sink] == -2:
        return False
    w = sink
    while prev_v[w] != -1:
        u = prev_v[w]
        e = eid[prev_j[w]]
        sgn = 1 if u < w else -1
        if flow_dir[e] == -sgn:
            flow_dir[e] = 0
        else:
            flow_dir[e] = sgn
        w = u
    src_cap[prev_j[w]] -= 1
    return True


@njit(cache=True)
def enum_two_disjoint_paths(indptr, nbr, eid, m, a, b, sink):
    """Indicator over masks: edge-disjoint open paths a->sink and b->sink exist."""
    n = indptr.size - 1
    total = 1 << m
    out = np.zeros(total, np.bool_)
    is_open = np.zeros(m, np.bool_)
    flow = np.zeros(m, np.int64)
    cap = np.zeros(2, np.int64)
    for mask in range(total):
        _mask_open(mask, m, is_open)
        flow[:] = 0
        if a == b:
            cap[0] = 2
            cap[1] = 0
        else:
            cap[0] = 1
            cap[1] = 1
        if a == sink and b == sink:
            out[mask] = True
            continue
        got = 0
        # a source sitting on the sink is a zero-length path
        if a == sink:
            cap[0] -= 1
            got += 1
        if b == sink and a != b:
            cap[1] -= 1
            got += 1
        while got < 2 and _augment(indptr, nbr, eid, is_open, flow, cap, a, b, sink, n):
            got += 1
        out[mask] = got >= 2
    return out


# ------------------------------------------------- ghost-field exact integrals


@njit(cache=True)
def simple_paths(ladj_ptr, ladj_nbr, ladj_eid, src, allowed):
    """All vertex-simple paths from ``src`` using edges in the ``allowed`` bitmask.

    Returns ``(end_vertex, edge_mask)`` arrays, the empty path included.
    """
    ends = [src]
    masks = [np.int64(0)]
    stack_v = [src]
    stack_m = [np.int64(0)]
    stack_vis = [np.int64(1) << src]
    while len(stack_v) > 0:
        u = stack_v.pop()
        em = stack_m.pop()
        vis = stack_vis.pop()
        for j in range(ladj_ptr[u], ladj_ptr[u + 1]):
            e = ladj_eid[j]
            if not (allowed >> e) & 1:
                continue
            w = ladj_nbr[j]
            if (vis >> w) & 1:
                continue
            nm = em | (np.int64(1) << e)
            ends.append(w)
            masks.append(nm)
            stack_v.append(w)
            stack_m.append(nm)
            stack_vis.append(vis | (np.int64(1) << w))
    return np.array(ends, np.int64), np.array(masks, np.int64)


@njit(cache=True)
def reach_mask(ladj_ptr, ladj_nbr, ladj_eid, src, allowed):
    n = ladj_ptr.size - 1
    seen = np.int64(1) << src
    q = np.empty(n, np.int64)
    q[0] = src
    head, tail = 0, 1
    while head < tail:
        u = q[head]
        head += 1
        for j in range(ladj_ptr[u], ladj_ptr[u + 1]):
            e = ladj_eid[j]
            if not (allowed >> e) & 1:
                continue
            w = ladj_nbr[j]
            if not (seen >> w) & 1:
                seen |= np.int64(1) << w
                q[tail] = w
                tail += 1
    return seen


@njit(cache=True)
def feasible2(ladj_ptr, ladj_nbr, ladj_eid, a, b, allowed):
    """``out[g]``: ghost targets of ``b`` reachable edge-disjointly from some ``a -> g`` path."""
    n = ladj_ptr.size - 1
    out = np.zeros(n, np.int64)
    ends, masks = simple_paths(ladj_ptr, ladj_nbr, ladj_eid, a, allowed)
    for i in range(ends.size):
        out[ends[i]] |= reach_mask(ladj_ptr, ladj_nbr, ladj_eid, b, allowed & ~masks[i])
    return out


@njit(cache=True)
def feasible3(ladj_ptr, ladj_nbr, ladj_eid, a, b, c, allowed):
    n = ladj_ptr.size - 1
    out = np.zeros((n, n), np.int64)
    e1, m1 = simple_paths(ladj_ptr, ladj_nbr, ladj_eid, a, allowed)
    for i in range(e1.size):
        rest = allowed & ~m1[i]
        e2, m2 = simple_paths(ladj_ptr, ladj_nbr, ladj_eid, b, rest)
        for j in range(e2.size):
            out[e1[i], e2[j]] |= reach_mask(ladj_ptr, ladj_nbr, ladj_eid, c, rest & ~m2[j])
    return out


@njit(cache=True)
def _popc(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def ghost_prob2(feas, members, x1, x2):
    """P(exists g1 in G1, g2 in G2 with g2 in feas[g1]); ghosts live on ``members``.

    ``x_i = exp(-h_i)`` is the exclusion probability of a vertex.
    """
    k = members.size
    total = 1 << k
    nb = np.zeros(total, np.int64)
    acc = 0.0
    for s in range(1, total):
        low = s & -s
        i = 0
        while (low >> i) != 1:
            i += 1
        nb[s] = nb[s ^ low] | feas[members[i]]
        c = _popc(s)
        w = (1.0 - x1) ** c * x1 ** (k - c)
        acc += w * (1.0 - x2 ** _popc(nb[s]))
    return acc


@njit(cache=True)
def ghost_prob3(F, members, x1, x2, x3):
    k = members.size
    total = 1 << k
    row = np.zeros((total, k), np.int64)
    acc = 0.0
    nb = np.zeros(total, np.int64)
    for s in range(1, total):
        low = s & -s
        i = 0
        while (low >> i) != 1:
            i += 1
        g1 = members[i]
        for t in range(k):
            row[s, t] = row[s ^ low, t] | F[g1, members[t]]
        c1 = _popc(s)
        w1 = (1.0 - x1) ** c1 * x1 ** (k - c1)
        inner = 0.0
        nb[0] = 0
        for u in range(1, total):
            lowu = u & -u
            t = 0
            while (lowu >> t) != 1:
                t += 1
            nb[u] = nb[u ^ lowu] | row[s, t]
            c2 = _popc(u)
            inner += (1.0 - x2) ** c2 * x2 ** (k - c2) * (1.0 - x3 ** _popc(nb[u]))
        acc += w1 * inner
    return acc


@njit(cache=True)
def conn_tally(n, edges, seed, stream0, count, p, window, counts):
    """``counts[i, j]`` += 1 whenever window vertices ``i`` and ``j`` share a cluster."""
    m = edges.shape[0]
    W = window.size
    lab = np.empty(W, np.int64)
    for s in range(count):
        is_open = open_edges(seed, stream0 + s, m, p)
        parent, _, _ = uf_build(n, edges, is_open)
        for i in range(W):
            lab[i] = parent[window[i]]
        for i in range(W):
            li = lab[i]
            for j in range(W):
                if lab[j] == li:
                    counts[i, j] += 1
    return counts


# ------------------------------------------------------------ estimator kernels


@njit(cache=True)
def spanning_thresholds(n, edges, seed, stream0, count, left, right):
    """Per sample, the smallest ``p`` at which an open left-right crossing appears."""
    m = edges.shape[0]
    out = np.empty(count)
    for s in range(count):
        u = edge_uniforms(seed, stream0 + s, m)
        order = np.argsort(u)
        parent = np.arange(n + 2)
        L, R = n, n + 1
        for v in range(n):
            if left[v]:
                parent[v] = L
            elif right[v]:
                parent[v] = R
        out[s] = 1.0
        for t in range(m):
            e = order[t]
            a = uf_find(parent, edges[e, 0])
            b = uf_find(parent, edges[e, 1])
            if a != b:
                if a == L or a == R:
                    parent[b] = a
                else:
                    parent[a] = b
            if uf_find(parent, L) == uf_find(parent, R):
                out[s] = u[e]
                break
    return out


@njit(cache=True)
def ballistic_batch(indptr, nbr, eid, seed, stream0, count, p, u, v, amb, vol_cap):
    """Explore the cluster of ``u``: ``d_int(u, v)`` (-1 if absent), largest ``d_int/d`` ratio, cap flag."""
    n = indptr.size - 1
    stamp = np.full(n, -1, np.int64)
    dint = np.zeros(n, np.int64)
    q = np.empty(n, np.int64)
    duv = np.full(count, -1, np.int64)
    ratio = np.zeros(count)
    capped = np.zeros(count, np.bool_)
    for s in range(count):
        key = stream_key_nb(seed, stream0 + s, 0)
        stamp[u] = s
        dint[u] = 0
        q[0] = u
        head, tail = 0, 1
        best = 0.0
        while head < tail:
            a = q[head]
            head += 1
            if a == v:
                duv[s] = dint[a]
            if amb[a] > 0:
                r = dint[a] / amb[a]
                if r > best:
                    best = r
            if tail >= vol_cap:
                continue
            for j in range(indptr[a], indptr[a + 1]):
                w = nbr[j]
                if stamp[w] == s:
                    continue
                if uniform_nb(key, eid[j]) < p:
                    stamp[w] = s
                    dint[w] = dint[a] + 1
                    q[tail] = w
                    tail += 1
                    if tail >= vol_cap:
                        break
        ratio[s] = best
        capped[s] = tail >= vol_cap
    return duv, ratio, capped


@njit(cache=True)
def pu_batch(indptr, nbr, eid, seed, stream0, count, p, x, y, dx, dy, dmax, rmax):
    """Per sample: ``d_int(x, y)`` searched to depth ``dmax`` (``dmax+1`` means larger or
    disconnected) and ConRad scanned up to ``rmax`` (``rmax+1`` means larger)."""
    n = indptr.size - 1
    stamp = np.full(n, -1, np.int64)
    dist = np.zeros(n, np.int64)
    q = np.empty(n, np.int64)
    dout = np.empty(count, np.int64)
    rout = np.empty(count, np.int64)
    tick = 0
    for s in range(count):
        key = stream_key_nb(seed, stream0 + s, 0)
        # intrinsic distance, depth-limited BFS
        stamp[x] = tick
        dist[x] = 0
        q[0] = x
        head, tail = 0, 1
        found = dmax + 1
        while head < tail:
            a = q[head]
            head += 1
            if a == y:
                found = dist[a]
                break
            if dist[a] >= dmax:
                continue
            for j in range(indptr[a], indptr[a + 1]):
                w = nbr[j]
                if stamp[w] == tick:
                    continue
                if uniform_nb(key, eid[j]) < p:
                    stamp[w] = tick
                    dist[w] = dist[a] + 1
                    q[tail] = w
                    tail += 1
        tick += 1
        dout[s] = found
        # ConRad: smallest r such that an x-y open path uses only edges of B(x, r) or of B(y, r)
        res = rmax + 1
        for r in range(1, rmax + 1):
            stamp[x] = tick
            q[0] = x
            head, tail = 0, 1
            hit = False
            while head < tail and not hit:
                a = q[head]
                head += 1
                for j in range(indptr[a], indptr[a + 1]):
                    w = nbr[j]
                    if stamp[w] == tick:
                        continue
                    if not ((dx[a] <= r and dx[w] <= r) or (dy[a] <= r and dy[w] <= r)):
                        continue
                    if uniform_nb(key, eid[j]) < p:
                        if w == y:
                            hit = True
                            break
                        stamp[w] = tick
                        q[tail] = w
                        tail += 1
            tick += 1
            if hit:
                res = r
                break
        rout[s] = res
    return dout, rout


@njit(cache=True)
def dual_pair_clusters(indptr, nbr, eid, e2e, seed, stream, p, f1, f2, skip, bnd, vol_cap):
    """Sizes of the dual clusters of faces ``f1`` and ``f2`` with dual edge ``skip`` removed.

    Dual edge ``j`` is open iff primal edge ``e2e[j]`` is closed.  Returns
    ``(size1, size2, same, censored)``; ``censored`` flags a boundary touch or cap.
    """
    n = indptr.size - 1
    key = stream_key_nb(seed, stream, 0)
    lab = np.full(n, -1, np.int64)
    q = np.empty(n, np.int64)
    sizes = np.zeros(2, np.int64)
    cens = False
    same = False
    for t in range(2):
        src = f1 if t == 0 else f2
        if lab[src] >= 0:
            same = True
            sizes[t] = sizes[lab[src]]
            continue
        lab[src] = t
        q[0] = src
        head, tail = 0, 1
        while head < tail:
            a = q[head]
            head += 1
            if bnd[a]:
                cens = True
            if tail >= vol_cap:
                cens = True
                continue
            for j in range(indptr[a], indptr[a + 1]):
                e = eid[j]
                if e == skip:
                    continue
                w = nbr[j]
                if lab[w] == t:
                    continue
                if not (uniform_nb(key, e2e[e]) < p):
                    if lab[w] >= 0:
                        same = True
                        continue
                    lab[w] = t
                    q[tail] = w
                    tail += 1
        sizes[t] = tail
    return sizes[0], sizes[1], same, cens


@njit(cache=True)
def reaching_cluster_scan(n, edges, seed, stream0, count, p_grid, inner, bnd):
    """``out[s, i]``: clusters meeting ``inner`` that also touch ``bnd``, at ``p_grid[i]``."""
    m = edges.shape[0]
    P = p_grid.size
    out = np.zeros((count, P), np.int64)
    is_open = np.empty(m, np.bool_)
    mark = np.zeros(n, np.int64)
    for s in range(count):
        u = edge_uniforms(seed, stream0 + s, m)
        for i in range(P):
            for e in range(m):
                is_open[e] = u[e] < p_grid[i]
            parent, _, _ = uf_build(n, edges, is_open)
            mark[:] = 0
            for v in range(n):
                if bnd[v]:
                    mark[parent[v]] |= 1
                if inner[v]:
                    mark[parent[v]] |= 2
            c = 0
            for v in range(n):
                if mark[v] == 3:
                    c += 1
            out[s, i] = c
    return out
