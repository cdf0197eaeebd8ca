"""Vectorised numpy versions of the compiled kernels.

Used when numba is unavailable or ``BMRF_SSM_DISABLE_JIT`` is set. Trees and
path sets are grown one level at a time as dense path matrices, so results
(including node order) match the compiled breadth-first kernels exactly.
"""

from __future__ import annotations

import numpy as np

STATUS_OK = 0
STATUS_BUDGET = 1

_CHUNK_BITS = 16


def log_partition(h, eu, ev, tab, const):
    n = h.shape[0]
    m = eu.shape[0]
    base = float(const) + float(h[:, 0].sum())
    slope = h[:, 1] - h[:, 0]
    if n == 0:
        return base
    chunk = 1 << min(n, _CHUNK_BITS)
    shifts = np.arange(n, dtype=np.int64)
    rows = np.arange(m)[None, :]
    top = -np.inf
    acc = 0.0
    for start in range(0, 1 << n, chunk):
        states = np.arange(start, start + chunk, dtype=np.int64)
        bits = ((states[:, None] >> shifts) & 1).astype(np.int64)
        e = base + bits @ slope
        if m:
            e = e + tab[rows, 2 * bits[:, eu] + bits[:, ev]].sum(axis=1)
        cmax = e.max()
        csum = np.exp(e - cmax).sum()
        if cmax > top:
            acc = acc * np.exp(top - cmax) + csum
            top = cmax
        else:
            acc += csum * np.exp(cmax - top)
    return float(top + np.log(acc))


def closing_spin(rank_end, rank_start):
    return np.where(rank_end > rank_start, 1, -1).astype(np.int8)


def _expand(paths, indptr, indices):
    """All one-step extensions of each path to a neighbour other than its parent.

    Returns (row of the extended path, new vertex, adjacency slot used).
    """
    last = paths[:, -1]
    counts = indptr[last + 1] - indptr[last]
    rows = np.repeat(np.arange(paths.shape[0]), counts)
    starts = np.repeat(indptr[last], counts)
    offsets = np.arange(rows.shape[0]) - np.repeat(np.cumsum(counts) - counts, counts)
    slots = starts + offsets
    w = indices[slots]
    if paths.shape[1] > 1:
        keep = w != paths[rows, -2]
        rows, w, slots = rows[keep], w[keep], slots[keep]
    return rows, w, slots


def saw_build(indptr, indices, adj_edge, rank, cond, root, max_depth, max_nodes):
    vertex = [np.array([root], dtype=np.int64)]
    parent = [np.array([-1], dtype=np.int64)]
    depth = [np.array([0], dtype=np.int64)]
    state = [np.array([cond[root]], dtype=np.int8)]
    edge = [np.array([-1], dtype=np.int64)]
    total = 1
    reached = 0

    # paths of the free (expandable) nodes on the current level, and their node ids
    paths = np.array([[root]], dtype=np.int64) if cond[root] == 0 else np.empty((0, 1), np.int64)
    ids = np.array([0], dtype=np.int64)[: paths.shape[0]]
    k = 0
    while paths.shape[0]:
        rows, w, slots = _expand(paths, indptr, indices)
        if rows.shape[0] == 0:
            break
        if total + rows.shape[0] > max_nodes:
            return (
                STATUS_BUDGET,
                np.concatenate(vertex),
                np.concatenate(parent),
                np.concatenate(depth),
                np.concatenate(state),
                np.concatenate(edge),
                k + 1,
            )
        on_path = paths[rows] == w[:, None]
        closes = on_path.any(axis=1)
        st = np.zeros(rows.shape[0], dtype=np.int8)
        if closes.any():
            at = on_path[closes].argmax(axis=1)
            nxt = paths[rows[closes], at + 1]
            u = paths[rows[closes], -1]
            st[closes] = closing_spin(rank[u], rank[nxt])
        fixed = cond[w] != 0
        st[fixed] = cond[w][fixed]
        if k + 1 == max_depth:
            deg_w = indptr[w + 1] - indptr[w]
            st[(st == 0) & (deg_w > 1)] = 2

        vertex.append(w)
        parent.append(ids[rows])
        depth.append(np.full(rows.shape[0], k + 1, dtype=np.int64))
        state.append(st)
        edge.append(adj_edge[slots])
        new_ids = total + np.arange(rows.shape[0], dtype=np.int64)
        total += rows.shape[0]
        reached = k + 1

        free = st == 0
        paths = np.hstack([paths[rows[free]], w[free, None]])
        ids = new_ids[free]
        k += 1
    return (
        STATUS_OK,
        np.concatenate(vertex),
        np.concatenate(parent),
        np.concatenate(depth),
        np.concatenate(state),
        np.concatenate(edge),
        reached,
    )


def _edge_term(tab, ell):
    plus = np.isposinf(ell)
    safe = np.where(plus, 0.0, ell)
    out = np.logaddexp(tab[:, 3] + safe, tab[:, 2]) - np.logaddexp(tab[:, 1] + safe, tab[:, 0])
    return np.where(plus, tab[:, 3] - tab[:, 1], out)


def tree_logodds(parent, depth, state, two_b, tab, frontier_lo, frontier_hi):
    size = parent.shape[0]
    acc_lo = np.zeros(size)
    acc_hi = np.zeros(size)
    order = np.argsort(depth, kind="stable")
    bounds = np.searchsorted(depth[order], np.arange(depth.max() + 2))
    for k in range(depth.max(), -1, -1):
        nodes = order[bounds[k] : bounds[k + 1]]
        s = state[nodes]
        lo = two_b[nodes] + acc_lo[nodes]
        hi = two_b[nodes] + acc_hi[nodes]
        lo = np.select([s == 1, s == -1, s == 2], [np.inf, -np.inf, frontier_lo], lo)
        hi = np.select([s == 1, s == -1, s == 2], [np.inf, -np.inf, frontier_hi], hi)
        if k == 0:
            return float(lo[0]), float(hi[0])
        t_lo = _edge_term(tab[nodes], lo)
        t_hi = _edge_term(tab[nodes], hi)
        par = parent[nodes]
        acc_lo += np.bincount(par, weights=np.minimum(t_lo, t_hi), minlength=size)
        acc_hi += np.bincount(par, weights=np.maximum(t_lo, t_hi), minlength=size)
    raise AssertionError("tree has no root")


def path_density(indptr, indices, deg, v, length, budget):
    maxdeg = int(deg.max()) if deg.shape[0] else 0
    paths = np.array([[v]], dtype=np.int64)
    sums = np.array([deg[v]], dtype=np.int64)
    best = int(deg[v])
    candidates = [(paths, sums)]
    expansions = 0
    for k in range(length):
        rows, w, _ = _expand(paths, indptr, indices)
        keep = ~(paths[rows] == w[:, None]).any(axis=1)
        rows, w = rows[keep], w[keep]
        nsums = sums[rows] + deg[w]
        # strict cut keeps every path that could tie the optimum
        keep = nsums + (length - k - 1) * maxdeg >= best
        rows, w, nsums = rows[keep], w[keep], nsums[keep]
        if rows.shape[0] == 0:
            break
        expansions += rows.shape[0]
        paths = np.hstack([paths[rows], w[:, None]])
        sums = nsums
        if expansions > budget:
            return STATUS_BUDGET, best, _first_best(candidates, best), expansions
        best = max(best, int(sums.max()))
        candidates.append((paths, sums))
    return STATUS_OK, best, _first_best(candidates, best), expansions


def _first_best(candidates, best):
    """Depth-first-preorder-first path among those with density ``best``."""
    width = max(p.shape[1] for p, _ in candidates)
    hits = []
    for p, s in candidates:
        sel = p[s == best]
        if sel.shape[0]:
            pad = np.full((sel.shape[0], width), -1, dtype=np.int64)
            pad[:, : sel.shape[1]] = sel
            hits.append(pad)
    allp = np.vstack(hits)
    first = np.lexsort(allp.T[::-1])[0]
    row = allp[first]
    return row[row >= 0].copy()
