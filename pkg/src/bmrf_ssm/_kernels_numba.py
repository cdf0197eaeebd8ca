"""Compiled inner loops. Same signatures and results as ``_kernels_numpy``.

Conventions shared by both kernel modules:

* spins are encoded as bits, 1 for ``+`` and 0 for ``-``;
* a pair table row holds ``beta(s_u, s_v)`` at column ``2 * s_u + s_v``;
* a field row holds ``h(-)`` in column 0 and ``h(+)`` in column 1;
* tree node states: 0 free, 1 fixed ``+``, -1 fixed ``-``, 2 frontier.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_BUDGET = 1

_RESYNC_MASK = 4095


@njit(cache=True)
def _energy(bits, h, eu, ev, tab, const):
    e = const
    for i in range(bits.shape[0]):
        e += h[i, bits[i]]
    for k in range(eu.shape[0]):
        e += tab[k, 2 * bits[eu[k]] + bits[ev[k]]]
    return e


@njit(cache=True)
def log_partition(h, eu, ev, tab, const):
    n = h.shape[0]
    m = eu.shape[0]
    bits = np.zeros(n, dtype=np.int64)
    if n == 0:
        return _energy(bits, h, eu, ev, tab, const)

    # incidence lists: for var i, (edge, other endpoint, var is the u side)
    count = np.zeros(n + 1, dtype=np.int64)
    for k in range(m):
        count[eu[k] + 1] += 1
        count[ev[k] + 1] += 1
    for i in range(n):
        count[i + 1] += count[i]
    fill = count[:-1].copy()
    inc_edge = np.empty(2 * m, dtype=np.int64)
    inc_other = np.empty(2 * m, dtype=np.int64)
    inc_is_u = np.empty(2 * m, dtype=np.bool_)
    for k in range(m):
        p = fill[eu[k]]
        inc_edge[p] = k
        inc_other[p] = ev[k]
        inc_is_u[p] = True
        fill[eu[k]] += 1
        p = fill[ev[k]]
        inc_edge[p] = k
        inc_other[p] = eu[k]
        inc_is_u[p] = False
        fill[ev[k]] += 1

    e = _energy(bits, h, eu, ev, tab, const)
    top = e
    acc = 1.0
    total = np.int64(1) << n
    for g in range(1, total):
        i = 0
        while (g >> i) & 1 == 0:
            i += 1
        old = bits[i]
        new = 1 - old
        de = h[i, new] - h[i, old]
        for p in range(count[i], count[i + 1]):
            k = inc_edge[p]
            o = bits[inc_other[p]]
            if inc_is_u[p]:
                de += tab[k, 2 * new + o] - tab[k, 2 * old + o]
            else:
                de += tab[k, 2 * o + new] - tab[k, 2 * o + old]
        bits[i] = new
        e += de
        if g & _RESYNC_MASK == 0:
            e = _energy(bits, h, eu, ev, tab, const)
        if e > top:
            acc = acc * np.exp(top - e) + 1.0
            top = e
        else:
            acc += np.exp(e - top)
    return top + np.log(acc)


@njit(cache=True)
def closing_spin(rank_end, rank_start):
    """Spin of a cycle-closing copy of ``w``.

    The closing edge ``(u, w)`` and the opening edge ``(w, next)`` share ``w``,
    so comparing their endpoint sums reduces to comparing ``u`` with ``next``.
    """
    return 1 if rank_end > rank_start else -1


@njit(cache=True)
def _grow(arr, size):
    out = np.empty(size, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def saw_build(indptr, indices, adj_edge, rank, cond, root, max_depth, max_nodes):
    n = indptr.shape[0] - 1
    cap = 1024
    vertex = np.empty(cap, dtype=np.int64)
    parent = np.empty(cap, dtype=np.int64)
    depth = np.empty(cap, dtype=np.int64)
    state = np.empty(cap, dtype=np.int8)
    edge = np.empty(cap, dtype=np.int64)

    vertex[0] = root
    parent[0] = -1
    depth[0] = 0
    edge[0] = -1
    state[0] = cond[root]
    tail = 1
    reached = 0

    path = np.empty(n + 1, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    head = 0
    while head < tail:
        node = head
        head += 1
        if state[node] != 0:
            continue
        k = depth[node]
        x = node
        for i in range(k, -1, -1):
            path[i] = vertex[x]
            x = parent[x]
        for i in range(k + 1):
            pos[path[i]] = i
        u = vertex[node]
        par_v = path[k - 1] if k > 0 else -1
        for p in range(indptr[u], indptr[u + 1]):
            w = indices[p]
            if w == par_v:
                continue
            if tail >= max_nodes:
                return STATUS_BUDGET, vertex[:tail], parent[:tail], depth[:tail], state[:tail], edge[:tail], k + 1
            if tail >= cap:
                cap *= 2
                vertex = _grow(vertex, cap)
                parent = _grow(parent, cap)
                depth = _grow(depth, cap)
                state = _grow(state, cap)
                edge = _grow(edge, cap)
            vertex[tail] = w
            parent[tail] = node
            depth[tail] = k + 1
            edge[tail] = adj_edge[p]
            if cond[w] != 0:
                state[tail] = cond[w]
            elif pos[w] >= 0:
                state[tail] = closing_spin(rank[u], rank[path[pos[w] + 1]])
            elif k + 1 == max_depth and indptr[w + 1] - indptr[w] > 1:
                state[tail] = 2
            else:
                state[tail] = 0
            if k + 1 > reached:
                reached = k + 1
            tail += 1
        for i in range(k + 1):
            pos[path[i]] = -1
    return STATUS_OK, vertex[:tail], parent[:tail], depth[:tail], state[:tail], edge[:tail], reached


@njit(cache=True)
def _edge_term(tab, k, ell):
    # log of (a R + b) / (c R + d) with R = exp(ell), parent on the row side
    if ell == np.inf:
        return tab[k, 3] - tab[k, 1]
    return np.logaddexp(tab[k, 3] + ell, tab[k, 2]) - np.logaddexp(tab[k, 1] + ell, tab[k, 0])


@njit(cache=True)
def tree_logodds(parent, depth, state, two_b, tab, frontier_lo, frontier_hi):
    size = parent.shape[0]
    acc_lo = np.zeros(size)
    acc_hi = np.zeros(size)
    lo = 0.0
    hi = 0.0
    for node in range(size - 1, -1, -1):
        s = state[node]
        if s == 1:
            lo = np.inf
            hi = np.inf
        elif s == -1:
            lo = -np.inf
            hi = -np.inf
        elif s == 2:
            lo = frontier_lo
            hi = frontier_hi
        else:
            lo = two_b[node] + acc_lo[node]
            hi = two_b[node] + acc_hi[node]
        par = parent[node]
        if par < 0:
            break
        t_lo = _edge_term(tab, node, lo)
        t_hi = _edge_term(tab, node, hi)
        if t_lo <= t_hi:
            acc_lo[par] += t_lo
            acc_hi[par] += t_hi
        else:
            acc_lo[par] += t_hi
            acc_hi[par] += t_lo
    return lo, hi


@njit(cache=True)
def path_density(indptr, indices, deg, v, length, budget):
    n = indptr.shape[0] - 1
    maxdeg = 0
    for i in range(n):
        if deg[i] > maxdeg:
            maxdeg = deg[i]
    path = np.empty(length + 1, dtype=np.int64)
    ptr = np.empty(length + 1, dtype=np.int64)
    onp = np.zeros(n, dtype=np.bool_)
    witness = np.empty(length + 1, dtype=np.int64)
    path[0] = v
    ptr[0] = indptr[v]
    onp[v] = True
    witness[0] = v
    best_len = 0
    k = 0
    cur = deg[v]
    best = cur
    expansions = 0
    while k >= 0:
        u = path[k]
        if k < length and ptr[k] < indptr[u + 1]:
            w = indices[ptr[k]]
            ptr[k] += 1
            if onp[w]:
                continue
            nc = cur + deg[w]
            if nc + (length - k - 1) * maxdeg <= best:
                continue
            expansions += 1
            if expansions > budget:
                return STATUS_BUDGET, best, witness[: best_len + 1].copy(), expansions
            k += 1
            path[k] = w
            ptr[k] = indptr[w]
            onp[w] = True
            cur = nc
            if cur > best:
                best = cur
                best_len = k
                for i in range(k + 1):
                    witness[i] = path[i]
        else:
            onp[u] = False
            cur -= deg[u]
            k -= 1
    return STATUS_OK, best, witness[: best_len + 1].copy(), expansions
