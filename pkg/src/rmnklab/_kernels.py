"""Compiled inner loops (numba).

Objective vectors are maximized throughout. Genotypes are integers indexing
rows of a full objective table, so one "evaluation" is one table lookup.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _weakly_geq(a, b):
    for c in range(a.shape[0]):
        if a[c] < b[c]:
            return False
    return True


@njit(cache=True)
def _dominates(a, b):
    strict = False
    for c in range(a.shape[0]):
        if a[c] < b[c]:
            return False
        if a[c] > b[c]:
            strict = True
    return strict


@njit(cache=True)
def ens_ranks(F):
    """Non-dominated sorting ranks of rows of ``F`` sorted lexicographically descending.

    Efficient non-dominated sort with binary search over fronts. Every point
    that dominates row ``i`` precedes it in this order, so row ``i`` only
    needs testing against fronts built so far; identical rows are adjacent
    and share the rank of their first copy.
    """
    N = F.shape[0]
    rank = np.empty(N, dtype=np.int64)
    last = np.full(N, -1, dtype=np.int64)
    prev = np.full(N, -1, dtype=np.int64)
    nf = 0
    for i in range(N):
        if i > 0:
            same = True
            for c in range(F.shape[1]):
                if F[i, c] != F[i - 1, c]:
                    same = False
                    break
            if same:
                r = rank[i - 1]
                rank[i] = r
                prev[i] = last[r]
                last[r] = i
                continue
        lo = 0
        hi = nf
        while lo < hi:
            mid = (lo + hi) // 2
            q = last[mid]
            dominated = False
            while q != -1:
                # q precedes i and differs from it, so q >= i means q dominates i
                if _weakly_geq(F[q], F[i]):
                    dominated = True
                    break
                q = prev[q]
            if dominated:
                lo = mid + 1
            else:
                hi = mid
        if lo == nf:
            nf += 1
        rank[i] = lo
        prev[i] = last[lo]
        last[lo] = i
    return rank


@njit(cache=True)
def ens_ranks_2d(F):
    """``ens_ranks`` for two objectives: a front dominates row i iff its max f2 >= f2[i]."""
    N = F.shape[0]
    rank = np.empty(N, dtype=np.int64)
    best = np.empty(N)
    nf = 0
    for i in range(N):
        if i > 0 and F[i, 0] == F[i - 1, 0] and F[i, 1] == F[i - 1, 1]:
            rank[i] = rank[i - 1]
            continue
        lo = 0
        hi = nf
        while lo < hi:
            mid = (lo + hi) // 2
            if best[mid] >= F[i, 1]:
                lo = mid + 1
            else:
                hi = mid
        if lo == nf:
            best[lo] = F[i, 1]
            nf += 1
        elif F[i, 1] > best[lo]:
            best[lo] = F[i, 1]
        rank[i] = lo
    return rank


@njit(cache=True)
def ens_ranks_3d(F, r2, R):
    """``ens_ranks`` for three objectives.

    ``r2`` is the dense ascending rank of f2 (``R`` distinct values). Each
    front keeps a Fenwick tree over reversed f2 rank holding the max f3, so
    "some member has f2 >= p2 and f3 >= p3" is a prefix-max query.
    """
    N = F.shape[0]
    rank = np.empty(N, dtype=np.int64)
    cap = 16
    tree = np.full((cap, R + 1), -np.inf)
    nf = 0
    for i in range(N):
        if i > 0 and F[i, 0] == F[i - 1, 0] and F[i, 1] == F[i - 1, 1] and F[i, 2] == F[i - 1, 2]:
            rank[i] = rank[i - 1]
            continue
        pos = R - r2[i]  # 1-based, larger f2 -> smaller position
        lo = 0
        hi = nf
        while lo < hi:
            mid = (lo + hi) // 2
            best = -np.inf
            j = pos
            while j > 0:
                if tree[mid, j] > best:
                    best = tree[mid, j]
                j -= j & (-j)
            if best >= F[i, 2]:
                lo = mid + 1
            else:
                hi = mid
        if lo == nf:
            if nf == cap:
                grown = np.full((2 * cap, R + 1), -np.inf)
                grown[:cap] = tree
                tree = grown
                cap *= 2
            nf += 1
        j = pos
        while j <= R:
            if tree[lo, j] < F[i, 2]:
                tree[lo, j] = F[i, 2]
            j += j & (-j)
        rank[i] = lo
    return rank


@njit(cache=True)
def crowding_distances(F, rank):
    """Crowding distance of every row within its own front (boundary rows get inf)."""
    N, m = F.shape
    dist = np.zeros(N)
    if N == 0:
        return dist
    nfronts = rank.max() + 1
    for r in range(nfronts):
        members = np.where(rank == r)[0]
        size = members.shape[0]
        if size <= 2:
            for i in range(size):
                dist[members[i]] = np.inf
            continue
        for c in range(m):
            vals = F[members, c]
            order = np.argsort(vals, kind="mergesort")
            lo = vals[order[0]]
            hi = vals[order[size - 1]]
            dist[members[order[0]]] = np.inf
            dist[members[order[size - 1]]] = np.inf
            if hi > lo:
                for t in range(1, size - 1):
                    dist[members[order[t]]] += (vals[order[t + 1]] - vals[order[t - 1]]) / (hi - lo)
    return dist


@njit(cache=True)
def archive_insert(ag, af, vis, size, g, f):
    """Insert genotype ``g`` with vector ``f`` into the archive prefix ``[0, size)``.

    Returns ``(new_size, accepted)``. Entries dominated by ``f`` are removed
    while preserving the order (and visited flags) of survivors.
    """
    for a in range(size):
        if ag[a] == g:
            return size, False
        if _dominates(af[a], f):
            return size, False
    w = 0
    for a in range(size):
        if _dominates(f, af[a]):
            continue
        if w != a:
            ag[w] = ag[a]
            af[w] = af[a]
            vis[w] = vis[a]
        w += 1
    ag[w] = g
    af[w] = f
    vis[w] = False
    return w + 1, True


@njit(cache=True)
def pls_loop(table, n, g0, max_evals):
    cap = table.shape[0]
    m = table.shape[1]
    ag = np.empty(cap, dtype=np.int64)
    af = np.empty((cap, m))
    vis = np.zeros(cap, dtype=np.bool_)
    size, _ = archive_insert(ag, af, vis, 0, g0, table[g0])
    evals = 1
    while evals < max_evals:
        best = -1
        for a in range(size):
            if not vis[a] and (best == -1 or ag[a] < ag[best]):
                best = a
        if best == -1:
            break
        cur = ag[best]
        for j in range(n):
            nb = cur ^ (1 << j)
            evals += 1
            size, _ = archive_insert(ag, af, vis, size, nb, table[nb])
        for a in range(size):
            if ag[a] == cur:
                vis[a] = True
                break
    return ag[:size].copy(), evals


@njit(cache=True)
def gsemo_loop(table, n, g0, sel_u, mut_u, budget):
    m = table.shape[1]
    cap = min(table.shape[0], budget) + 1
    ag = np.empty(cap, dtype=np.int64)
    af = np.empty((cap, m))
    vis = np.zeros(cap, dtype=np.bool_)
    size, _ = archive_insert(ag, af, vis, 0, g0, table[g0])
    evals = 1
    p = 1.0 / n
    t = 0
    while evals < budget:
        a = int(sel_u[t] * size)
        if a >= size:
            a = size - 1
        g = ag[a]
        for j in range(n):
            if mut_u[t, j] < p:
                g ^= 1 << j
        evals += 1
        size, _ = archive_insert(ag, af, vis, size, g, table[g])
        t += 1
    return ag[:size].copy(), evals
