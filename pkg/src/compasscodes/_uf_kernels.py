"""Compiled kernels for the union-find decoder pipeline.

All kernels operate on flat numpy arrays describing a decoder graph
(edge endpoint lists, boundary mask) so one compilation serves every
graph.  Status codes: a kernel returning ``rc != 0`` signals an
internal invariant violation that the caller turns into an exception.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NINF = -1e300


@njit(cache=True, inline="always")
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, inline="always")
def _union(parent, rank, parity, btouch, a, b):
    if rank[a] < rank[b]:
        a, b = b, a
    parent[b] = a
    if rank[a] == rank[b]:
        rank[a] += 1
    parity[a] ^= parity[b]
    if btouch[b]:
        btouch[a] = 1
    return a


@njit(cache=True)
def validate_kernel(n_v, boundary, eu, ev, marks):
    """Weighted cluster growth until every cluster is even or boundary-touching.

    Each step grows all odd non-boundary clusters of minimal frontier
    size (edge count) by one half-edge on every frontier edge.  Returns
    (support, parent, parity, btouch, in_cluster, rc); support == 2
    marks an erased edge.
    """
    E = eu.shape[0]
    parent = np.arange(n_v, dtype=np.int32)
    rank = np.zeros(n_v, dtype=np.int8)
    parity = marks.astype(np.uint8)
    btouch = np.zeros(n_v, dtype=np.uint8)
    in_cl = marks.astype(np.uint8)
    support = np.zeros(E, dtype=np.int8)
    fsize = np.zeros(n_v, dtype=np.int64)
    grow = np.zeros(n_v, dtype=np.uint8)
    add = np.zeros(E, dtype=np.int8)

    while True:
        for v in range(n_v):
            fsize[v] = 0
        for e in range(E):
            if support[e] >= 2:
                continue
            u = eu[e]
            v = ev[e]
            ru = _find(parent, u) if in_cl[u] else -1
            rv = _find(parent, v) if in_cl[v] else -1
            if ru >= 0 and parity[ru] == 1 and btouch[ru] == 0:
                fsize[ru] += 1
            if rv >= 0 and rv != ru and parity[rv] == 1 and btouch[rv] == 0:
                fsize[rv] += 1

        any_active = False
        minf = -1
        for v in range(n_v):
            if in_cl[v] and parent[v] == v and parity[v] == 1 and btouch[v] == 0:
                any_active = True
                if fsize[v] == 0:
                    return support, parent, parity, btouch, in_cl, -1
                if minf < 0 or fsize[v] < minf:
                    minf = fsize[v]
        if not any_active:
            break

        for v in range(n_v):
            grow[v] = (
                1
                if (
                    in_cl[v]
                    and parent[v] == v
                    and parity[v] == 1
                    and btouch[v] == 0
                    and fsize[v] == minf
                )
                else 0
            )

        # Pass A: half-edge increments from every growing incident cluster.
        for e in range(E):
            add[e] = 0
            if support[e] >= 2:
                continue
            u = eu[e]
            v = ev[e]
            ru = _find(parent, u) if in_cl[u] else -1
            rv = _find(parent, v) if in_cl[v] else -1
            a = 0
            if ru >= 0 and grow[ru]:
                a += 1
            if rv >= 0 and rv != ru and grow[rv]:
                a += 1
            add[e] = a

        # Pass B: apply increments and fuse newly full edges in id order.
        for e in range(E):
            if add[e] == 0:
                continue
            s = support[e] + add[e]
            if s > 2:
                s = 2
            support[e] = s
            if s < 2:
                continue
            u = eu[e]
            v = ev[e]
            if boundary[u] or boundary[v]:
                iv = v if boundary[u] else u
                if in_cl[iv]:
                    btouch[_find(parent, iv)] = 1
            else:
                if not in_cl[u]:
                    in_cl[u] = 1
                if not in_cl[v]:
                    in_cl[v] = 1
                ru = _find(parent, u)
                rv = _find(parent, v)
                if ru != rv:
                    _union(parent, rank, parity, btouch, ru, rv)

    return support, parent, parity, btouch, in_cl, 0


@njit(cache=True)
def forest_kernel(n_v, boundary, eu, ev, support, order):
    """Kruskal maximum-weight spanning forest over erased edges.

    ``order`` lists edge ids by failure probability descending, ties by
    id ascending.  Boundary-incident erased edges always enter as open
    edges (status 2); interior edges enter as tree edges (status 1)
    when they do not close a cycle.
    """
    E = eu.shape[0]
    parent = np.arange(n_v, dtype=np.int32)
    rank = np.zeros(n_v, dtype=np.int8)
    status = np.zeros(E, dtype=np.int8)
    for k in range(E):
        e = order[k]
        if support[e] < 2:
            continue
        u = eu[e]
        v = ev[e]
        if boundary[u] or boundary[v]:
            status[e] = 2
        else:
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru != rv:
                if rank[ru] < rank[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                if rank[ru] == rank[rv]:
                    rank[ru] += 1
                status[e] = 1
    return status


@njit(cache=True)
def peel_kernel(n_v, boundary, eu, ev, status, marks_in):
    """Forced leaf moves: peel interior leaves carrying no open edges.

    A marked leaf's unique tree edge joins the correction and flips the
    neighbor's mark; an unmarked leaf's edge is dropped.  Returns
    (correction, residual marks, residual status, rc).
    """
    E = eu.shape[0]
    deg = np.zeros(n_v, dtype=np.int64)
    openc = np.zeros(n_v, dtype=np.int64)
    for e in range(E):
        if status[e] == 1:
            deg[eu[e]] += 1
            deg[ev[e]] += 1
        elif status[e] == 2:
            iv = ev[e] if boundary[eu[e]] else eu[e]
            openc[iv] += 1

    indptr = np.zeros(n_v + 1, dtype=np.int64)
    for v in range(n_v):
        indptr[v + 1] = indptr[v] + deg[v]
    adj_e = np.empty(indptr[n_v], dtype=np.int32)
    fill = indptr[:n_v].copy()
    for e in range(E):
        if status[e] == 1:
            adj_e[fill[eu[e]]] = e
            fill[eu[e]] += 1
            adj_e[fill[ev[e]]] = e
            fill[ev[e]] += 1

    corr = np.zeros(E, dtype=np.uint8)
    marks = marks_in.astype(np.uint8)
    alive = status.copy()
    adeg = deg.copy()
    stack = np.empty(n_v, dtype=np.int64)
    top = 0
    for v in range(n_v):
        if adeg[v] == 1 and openc[v] == 0 and not boundary[v]:
            stack[top] = v
            top += 1

    while top > 0:
        top -= 1
        v = stack[top]
        if adeg[v] != 1:
            continue
        e = -1
        for k in range(indptr[v], indptr[v + 1]):
            if alive[adj_e[k]] == 1:
                e = adj_e[k]
                break
        u = ev[e] if eu[e] == v else eu[e]
        if marks[v]:
            corr[e] = 1
            marks[v] = 0
            marks[u] ^= 1
        alive[e] = 0
        adeg[v] = 0
        adeg[u] -= 1
        if adeg[u] == 1 and openc[u] == 0 and not boundary[u]:
            stack[top] = u
            top += 1
        if adeg[u] == 0 and openc[u] == 0 and marks[u] and not boundary[u]:
            return corr, marks, alive, -1

    for v in range(n_v):
        if marks[v] and adeg[v] == 0 and openc[v] == 0 and not boundary[v]:
            return corr, marks, alive, -1
    return corr, marks, alive, 0


@njit(cache=True)
def dp_kernel(n_v, boundary, eu, ev, alive, marks, w):
    """Parity-constrained maximum-weight subset on the peeled forest.

    Per vertex and parent-edge state, children default to their better
    in/out state; a parity mismatch at the vertex flips the child with
    minimal |W_in - W_out|.  Open (boundary) edges are optional children
    with W_in = w_e, W_out = 0.  Returns (correction, rc).
    """
    E = eu.shape[0]
    corr = np.zeros(E, dtype=np.uint8)

    deg = np.zeros(n_v, dtype=np.int64)
    for e in range(E):
        if alive[e] == 1:
            deg[eu[e]] += 1
            deg[ev[e]] += 1
        elif alive[e] == 2:
            iv = ev[e] if boundary[eu[e]] else eu[e]
            deg[iv] += 1
    indptr = np.zeros(n_v + 1, dtype=np.int64)
    for v in range(n_v):
        indptr[v + 1] = indptr[v] + deg[v]
    adj_e = np.empty(indptr[n_v], dtype=np.int32)
    fill = indptr[:n_v].copy()
    for e in range(E):
        if alive[e] == 1:
            adj_e[fill[eu[e]]] = e
            fill[eu[e]] += 1
            adj_e[fill[ev[e]]] = e
            fill[ev[e]] += 1
        elif alive[e] == 2:
            iv = ev[e] if boundary[eu[e]] else eu[e]
            adj_e[fill[iv]] = e
            fill[iv] += 1

    visited = np.zeros(n_v, dtype=np.uint8)
    parent_edge = np.full(n_v, -1, dtype=np.int32)
    B0 = np.zeros(n_v, dtype=np.float64)
    B1 = np.zeros(n_v, dtype=np.float64)
    flip0 = np.full(n_v, -1, dtype=np.int64)
    flip1 = np.full(n_v, -1, dtype=np.int64)
    default = np.zeros(indptr[n_v], dtype=np.uint8)
    order = np.empty(n_v, dtype=np.int32)
    dstack = np.empty(n_v, dtype=np.int32)
    rstack_v = np.empty(n_v, dtype=np.int32)
    rstack_s = np.empty(n_v, dtype=np.uint8)

    for root in range(n_v):
        if boundary[root] or visited[root] or deg[root] == 0:
            continue
        # Pre-order traversal from the lowest-id vertex of the component.
        visited[root] = 1
        dstack[0] = root
        top = 1
        n_ord = 0
        while top > 0:
            top -= 1
            v = dstack[top]
            order[n_ord] = v
            n_ord += 1
            for k in range(indptr[v], indptr[v + 1]):
                e = adj_e[k]
                if e == parent_edge[v] or alive[e] != 1:
                    continue
                c = ev[e] if eu[e] == v else eu[e]
                if visited[c]:
                    return corr, -2  # cycle in the forest
                visited[c] = 1
                parent_edge[c] = e
                dstack[top] = c
                top += 1

        # Post-order DP.
        for i in range(n_ord - 1, -1, -1):
            v = order[i]
            base = 0.0
            cnt = 0
            best_d = 1e301
            best_slot = -1
            for k in range(indptr[v], indptr[v + 1]):
                e = adj_e[k]
                if e == parent_edge[v]:
                    continue
                if alive[e] == 2:
                    w_in = w[e]
                    w_out = 0.0
                else:
                    c = ev[e] if eu[e] == v else eu[e]
                    w_in = B1[c]
                    w_out = B0[c]
                if w_in >= w_out:
                    default[k] = 1
                    base += w_in
                    cnt ^= 1
                    d = w_in - w_out
                    flippable = w_out > NINF / 2
                else:
                    default[k] = 0
                    base += w_out
                    d = w_out - w_in
                    flippable = w_in > NINF / 2
                if flippable and d < best_d:
                    best_d = d
                    best_slot = k
            for s in range(2):
                if base < NINF / 2:
                    val = NINF
                    fl = -1
                elif cnt == (marks[v] ^ s):
                    val = base
                    fl = -1
                elif best_slot >= 0:
                    val = base - best_d
                    fl = best_slot
                else:
                    val = NINF
                    fl = -1
                if s == 0:
                    B0[v] = val
                    flip0[v] = fl
                else:
                    pe = parent_edge[v]
                    if pe >= 0 and val > NINF / 2:
                        val += w[pe]
                    B1[v] = val
                    flip1[v] = fl

        if B0[root] < NINF / 2:
            return corr, -1  # infeasible parity

        # Top-down reconstruction.
        rstack_v[0] = root
        rstack_s[0] = 0
        top = 1
        while top > 0:
            top -= 1
            v = rstack_v[top]
            s = rstack_s[top]
            fs = flip0[v] if s == 0 else flip1[v]
            for k in range(indptr[v], indptr[v + 1]):
                e = adj_e[k]
                if e == parent_edge[v]:
                    continue
                inc = default[k]
                if k == fs:
                    inc ^= 1
                if alive[e] == 2:
                    if inc:
                        corr[e] ^= 1
                else:
                    if inc:
                        corr[e] ^= 1
                    c = ev[e] if eu[e] == v else eu[e]
                    rstack_v[top] = c
                    rstack_s[top] = inc
                    top += 1

    return corr, 0
