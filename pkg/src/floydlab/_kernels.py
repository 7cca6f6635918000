"""Compiled shortest-path kernels over padded neighbor tables.

Graphs are given as an ``(n, deg)`` int array of neighbors padded with -1,
a per-vertex level array (distance to the basepoint) and a weight table
``wtab`` with ``wtab[m]`` the weight of an edge whose nearer endpoint sits
at level ``m``.  Edge weight of ``{u, v}`` is ``wtab[min(lev[u], lev[v])]``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] > hk[i] or (hk[p] == hk[i] and hv[p] > hv[i]):
            hk[p], hk[i] = hk[i], hk[p]
            hv[p], hv[i] = hv[i], hv[p]
            i = p
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(hk, hv, size):
    key = hk[0]
    val = hv[0]
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        r = l + 1
        if r < size and (hk[r] < hk[l] or (hk[r] == hk[l] and hv[r] < hv[l])):
            c = r
        if hk[c] < hk[i] or (hk[c] == hk[i] and hv[c] < hv[i]):
            hk[c], hk[i] = hk[i], hk[c]
            hv[c], hv[i] = hv[i], hv[c]
            i = c
        else:
            break
    return key, val, size


@njit(cache=True)
def dijkstra(nb, lev, wtab, source, stop_at, cutoff):
    """Single-source distances.

    Stops once the smallest tentative distance exceeds ``cutoff`` or, when
    ``stop_at >= 0``, exceeds ``dist[stop_at] + 1e-12`` after it settled.
    Returns ``(dist, order, nsettled)``; ``order[:nsettled]`` is settle order.
    """
    n, deg = nb.shape
    dist = np.full(n, INF)
    done = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    cap = n * deg + 1
    if cap > 4 * n + 16:
        cap = 4 * n + 16
    hk = np.empty(cap, np.float64)
    hv = np.empty(cap, np.int64)
    size = 0
    dist[source] = 0.0
    size = _heap_push(hk, hv, size, 0.0, source)
    nset = 0
    limit = cutoff
    while size > 0:
        d, u, size = _heap_pop(hk, hv, size)
        if done[u]:
            continue
        if d > limit:
            break
        done[u] = True
        order[nset] = u
        nset += 1
        if u == stop_at:
            lim2 = d + 1e-12
            if lim2 < limit:
                limit = lim2
        lu = lev[u]
        for j in range(deg):
            v = nb[u, j]
            if v < 0 or done[v]:
                continue
            lv = lev[v]
            m = lu if lu < lv else lv
            nd = d + wtab[m]
            if nd < dist[v]:
                dist[v] = nd
                if size >= hk.shape[0]:
                    hk2 = np.empty(2 * hk.shape[0], np.float64)
                    hv2 = np.empty(2 * hk.shape[0], np.int64)
                    hk2[:size] = hk[:size]
                    hv2[:size] = hv[:size]
                    hk = hk2
                    hv = hv2
                size = _heap_push(hk, hv, size, nd, v)
    # unsettled tentative values are not distances
    for i in range(n):
        if not done[i]:
            dist[i] = INF
    return dist, order, nset


@njit(cache=True)
def tight_hops(nb, lev, wtab, dist, order, nset, tol):
    """Min and max edge counts over tight (shortest) paths from the source.

    Vertices are processed in settle order, which is a topological order of
    the tight-edge DAG.  Unsettled vertices get -1.
    """
    n, deg = nb.shape
    hmin = np.full(n, -1, np.int64)
    hmax = np.full(n, -1, np.int64)
    if nset == 0:
        return hmin, hmax
    hmin[order[0]] = 0
    hmax[order[0]] = 0
    for t in range(1, nset):
        v = order[t]
        lv = lev[v]
        lo = -1
        hi = -1
        for j in range(deg):
            u = nb[v, j]
            if u < 0 or hmax[u] < 0:
                continue
            lu = lev[u]
            m = lu if lu < lv else lv
            if abs(dist[u] + wtab[m] - dist[v]) <= tol:
                if lo < 0 or hmin[u] + 1 < lo:
                    lo = hmin[u] + 1
                if hmax[u] + 1 > hi:
                    hi = hmax[u] + 1
        hmin[v] = lo
        hmax[v] = hi
    return hmin, hmax


@njit(cache=True)
def tight_region(nb, lev, wtab, dist, target, tol):
    """Mask of vertices lying on some tight path from the source to ``target``."""
    n, deg = nb.shape
    mark = np.zeros(n, np.bool_)
    stack = np.empty(n, np.int64)
    top = 0
    mark[target] = True
    stack[0] = target
    top = 1
    while top > 0:
        top -= 1
        v = stack[top]
        lv = lev[v]
        for j in range(deg):
            u = nb[v, j]
            if u < 0 or mark[u] or dist[u] == INF:
                continue
            lu = lev[u]
            m = lu if lu < lv else lv
            if abs(dist[u] + wtab[m] - dist[v]) <= tol:
                mark[u] = True
                stack[top] = u
                top += 1
    return mark


@njit(cache=True)
def bfs_hops(nb, source, maxhop):
    """Unweighted distances from ``source`` up to ``maxhop`` (-1 beyond)."""
    n, deg = nb.shape
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        if dist[u] >= maxhop:
            continue
        for j in range(deg):
            v = nb[u, j]
            if v >= 0 and dist[v] < 0:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1
    return dist


@njit(cache=True)
def fwgeod_scan(nb, lev, wtab, r, tol, sources):
    """For each source, compare tight-path hop counts with graph distance.

    Returns ``(checked, violations, witness)`` where ``witness`` holds
    ``(source, target, hop distance, longest tight path)`` for the first
    violation found (or -1 entries).
    """
    checked = 0
    bad = 0
    witness = np.full(4, -1, np.int64)
    for s in sources:
        hop = bfs_hops(nb, s, r)
        # Floyd distance of every r-neighbour bounds the search radius
        cutoff = 0.0
        n, deg = nb.shape
        # cheap upper bound: BFS tree path lengths
        up = np.full(n, INF)
        up[s] = 0.0
        queue = np.empty(n, np.int64)
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            if hop[u] >= r:
                continue
            lu = lev[u]
            for j in range(deg):
                v = nb[u, j]
                if v >= 0 and hop[v] == hop[u] + 1 and up[v] == INF:
                    lv = lev[v]
                    m = lu if lu < lv else lv
                    up[v] = up[u] + wtab[m]
                    if up[v] > cutoff:
                        cutoff = up[v]
                    queue[tail] = v
                    tail += 1
        dist, order, nset = dijkstra(nb, lev, wtab, s, -1, cutoff + 1e-9)
        hmin, hmax = tight_hops(nb, lev, wtab, dist, order, nset, tol)
        for t in range(tail):
            v = queue[t]
            if v == s:
                continue
            checked += 1
            if hmax[v] != hop[v]:
                bad += 1
                if witness[0] < 0:
                    witness[0] = s
                    witness[1] = v
                    witness[2] = hop[v]
                    witness[3] = hmax[v]
    return checked, bad, witness
