"""Numba inner loops for partitioning and null-model rewiring.

Everything here operates on flat int64 arrays (CSR adjacency or edge
lists) and is deterministic: random choices are pre-drawn by the callers
with seeded generators.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba.core import types
from numba.typed import Dict


@njit(cache=True)
def cut_weight(indptr, indices, w, side):
    """Total weight of edges whose endpoints sit in different blocks."""
    cut = 0
    for v in range(side.shape[0]):
        sv = side[v]
        for e in range(indptr[v], indptr[v + 1]):
            if side[indices[e]] != sv:
                cut += w[e]
    return cut // 2


@njit(cache=True)
def hem_match(indptr, indices, w, node_wt, perm, max_wt):
    """Heavy-edge matching: visit nodes in ``perm`` order, match each
    unmatched node to its heaviest unmatched neighbour (combined weight
    capped at max_wt). Returns (match, matched_pairs); unmatched nodes are
    matched to themselves."""
    n = perm.shape[0]
    match = np.full(n, -1, dtype=np.int64)
    npairs = 0
    for k in range(n):
        v = perm[k]
        if match[v] >= 0:
            continue
        best_u = -1
        best_w = 0
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if u == v or match[u] >= 0:
                continue
            if node_wt[v] + node_wt[u] > max_wt:
                continue
            if w[e] > best_w:
                best_w = w[e]
                best_u = u
        if best_u >= 0:
            match[v] = best_u
            match[best_u] = v
            npairs += 1
        else:
            match[v] = v
    return match, npairs


@njit(cache=True)
def leaf_match(indptr, indices, node_wt, match, max_wt):
    """Pair unmatched degree-1 nodes hanging off the same neighbour.

    Two such leaves are interchangeable for any cut, so merging them is
    lossless; without this, star-shaped regions barely coarsen under
    heavy-edge matching. Returns the number of extra pairs."""
    n = node_wt.shape[0]
    pending = np.full(n, -1, dtype=np.int64)  # per-hub: waiting leaf
    extra = 0
    for v in range(n):
        if match[v] != v:
            continue
        if indptr[v + 1] - indptr[v] != 1:
            continue
        hub = indices[indptr[v]]
        u = pending[hub]
        if u >= 0 and node_wt[u] + node_wt[v] <= max_wt:
            match[u] = v
            match[v] = u
            pending[hub] = -1
            extra += 1
        else:
            pending[hub] = v
    return extra


@njit(cache=True)
def _bucket_remove(head, nxt, prv, inb, gain, offset, v):
    b = gain[v] + offset
    p = prv[v]
    nx = nxt[v]
    if p >= 0:
        nxt[p] = nx
    else:
        head[b] = nx
    if nx >= 0:
        prv[nx] = p
    prv[v] = -1
    nxt[v] = -1
    inb[v] = False


@njit(cache=True)
def _bucket_insert(head, nxt, prv, inb, gain, offset, v):
    b = gain[v] + offset
    nxt[v] = head[b]
    if head[b] >= 0:
        prv[head[b]] = v
    prv[v] = -1
    head[b] = v
    inb[v] = True
    return b


@njit(cache=True)
def fm_refine(indptr, indices, w, node_wt, side, cap, max_passes):
    """Boundary Fiduccia-Mattheyses refinement with best-prefix rollback.

    Mutates ``side`` in place and returns the final cut weight. A move is
    applied only when the target block stays at/below ``cap`` and the
    source block keeps weight >= 1, so balance holds at every accepted
    intermediate state. Each pass never increases the cut: the kept prefix
    includes the empty prefix.
    """
    n = side.shape[0]
    wt0 = 0
    wt1 = 0
    for v in range(n):
        if side[v] == 0:
            wt0 += node_wt[v]
        else:
            wt1 += node_wt[v]
    wmax = 1
    for v in range(n):
        s = 0
        for e in range(indptr[v], indptr[v + 1]):
            s += w[e]
        if s > wmax:
            wmax = s
    nbuck = 2 * wmax + 1
    head = np.full(nbuck, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prv = np.full(n, -1, dtype=np.int64)
    inb = np.zeros(n, dtype=np.bool_)
    locked = np.zeros(n, dtype=np.bool_)
    gain = np.zeros(n, dtype=np.int64)
    ext = np.zeros(n, dtype=np.int64)
    moves = np.empty(n, dtype=np.int64)

    cut = 0
    for _ in range(max_passes):
        cut = 0
        for v in range(n):
            g = 0
            ex = 0
            sv = side[v]
            for e in range(indptr[v], indptr[v + 1]):
                if side[indices[e]] != sv:
                    ex += w[e]
                    g += w[e]
                else:
                    g -= w[e]
            gain[v] = g
            ext[v] = ex
            cut += ex
        cut //= 2
        for b in range(nbuck):
            head[b] = -1
        maxb = 0
        for v in range(n):
            nxt[v] = -1
            prv[v] = -1
            locked[v] = False
            inb[v] = False
            if ext[v] > 0:
                b = _bucket_insert(head, nxt, prv, inb, gain, wmax, v)
                if b > maxb:
                    maxb = b

        nmoves = 0
        cum = 0
        best = 0
        best_idx = 0
        while True:
            b = maxb
            while b >= 0 and head[b] < 0:
                b -= 1
            maxb = b  # highest occupied bucket; occupied levels are never skipped
            pick = -1
            while b >= 0:
                v = head[b]
                while v >= 0:
                    if side[v] == 0:
                        if wt1 + node_wt[v] <= cap and wt0 - node_wt[v] >= 1:
                            pick = v
                            break
                    else:
                        if wt0 + node_wt[v] <= cap and wt1 - node_wt[v] >= 1:
                            pick = v
                            break
                    v = nxt[v]
                if pick >= 0:
                    break
                b -= 1
            if pick < 0:
                break
            v = pick
            _bucket_remove(head, nxt, prv, inb, gain, wmax, v)
            locked[v] = True
            sv = side[v]
            side[v] = 1 - sv
            if sv == 0:
                wt0 -= node_wt[v]
                wt1 += node_wt[v]
            else:
                wt1 -= node_wt[v]
                wt0 += node_wt[v]
            cum += gain[v]
            moves[nmoves] = v
            nmoves += 1
            if cum > best:
                best = cum
                best_idx = nmoves
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if locked[u]:
                    continue
                if side[u] == sv:
                    dg = 2 * w[e]
                    de = w[e]
                else:
                    dg = -2 * w[e]
                    de = -w[e]
                ext[u] += de
                if inb[u]:
                    _bucket_remove(head, nxt, prv, inb, gain, wmax, u)
                gain[u] += dg
                if ext[u] > 0:
                    b2 = _bucket_insert(head, nxt, prv, inb, gain, wmax, u)
                    if b2 > maxb:
                        maxb = b2

        for i in range(nmoves - 1, best_idx - 1, -1):
            v = moves[i]
            sv = side[v]
            side[v] = 1 - sv
            if sv == 0:
                wt0 -= node_wt[v]
                wt1 += node_wt[v]
            else:
                wt1 -= node_wt[v]
                wt0 += node_wt[v]
        cut -= best
        if best <= 0:
            break
    return cut


@njit(cache=True)
def region_grow(indptr, indices, w, node_wt, cap, target, seed_order):
    """Greedy region growing: fill block 0 from a random seed, always
    absorbing the frontier node with the strongest connection to the grown
    region, until its weight reaches ``target``. ``seed_order`` supplies
    fallback seeds for disconnected graphs. Returns the side array."""
    n = node_wt.shape[0]
    side = np.ones(n, dtype=np.int8)
    conn = np.zeros(n, dtype=np.int64)
    in_a = np.zeros(n, dtype=np.bool_)
    wt_a = 0
    seed_pos = 0
    while wt_a < target:
        best = -1
        best_conn = -1
        for v in range(n):
            if in_a[v] or wt_a + node_wt[v] > cap:
                continue
            if conn[v] > best_conn:
                best_conn = conn[v]
                best = v
        if best < 0:
            break
        if best_conn == 0:
            # no frontier: seed a fresh component, preferring the caller's order
            while seed_pos < n:
                s = seed_order[seed_pos]
                seed_pos += 1
                if not in_a[s] and wt_a + node_wt[s] <= cap:
                    best = s
                    break
        in_a[best] = True
        side[best] = 0
        wt_a += node_wt[best]
        for e in range(indptr[best], indptr[best + 1]):
            u = indices[e]
            if not in_a[u]:
                conn[u] += w[e]
    return side


@njit(cache=True)
def swap_edges(src, dst, n, ei, ej, cls, check_cls):
    """Directed double-edge swaps on distinct-pair edges.

    For each pre-drawn pair of edge indices, rewires (a->b),(c->d) to
    (a->d),(c->b) unless that would create a self-loop or duplicate edge.
    When ``check_cls`` is set, a swap must also keep the joint-degree
    matrix unchanged (endpoints b and d in the same degree class).
    Returns the number of swaps applied.
    """
    key_set = Dict.empty(types.int64, types.uint8)
    E = src.shape[0]
    one = np.uint8(1)
    for i in range(E):
        key_set[src[i] * n + dst[i]] = one
    swaps = 0
    for t in range(ei.shape[0]):
        i = ei[t]
        j = ej[t]
        if i == j:
            continue
        a = src[i]
        b = dst[i]
        c = src[j]
        d = dst[j]
        if a == d or c == b:
            continue
        if check_cls and cls[b] != cls[d]:
            continue
        k1 = a * n + d
        k2 = c * n + b
        if k1 in key_set or k2 in key_set:
            continue
        del key_set[a * n + b]
        del key_set[c * n + d]
        key_set[k1] = one
        key_set[k2] = one
        dst[i] = d
        dst[j] = b
        swaps += 1
    return swaps
