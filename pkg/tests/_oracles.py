"""Independent reference computations shared by several test files."""

import heapq
import itertools

import numpy as np


def simplex_grid(m, steps):
    """All points of the (m-1)-simplex with coordinates in multiples of 1/steps."""
    for cut in itertools.combinations(range(steps + m - 1), m - 1):
        parts = np.diff((-1,) + cut + (steps + m - 1,)) - 1
        yield parts / steps


def grid_game_value(s, steps):
    """max over grid row strategies x of min_j (x^T S)_j, by full enumeration."""
    s = np.asarray(s, dtype=float)
    return max((x @ s).min() for x in simplex_grid(s.shape[0], steps))


def grid_game_value_bb(s, steps=1000):
    """Same quantity as grid_game_value, exact, by branch and bound.

    Nodes are boxes ``lo <= k <= hi`` of integer counts with sum ``steps``.
    The bound per column is a fractional knapsack (fill the largest payoffs
    first), which is an upper bound on ``k^T S_j / steps`` over the box, so
    the min over columns bounds the node.  Best-first search stops when no
    open box can beat the incumbent, which makes the result the exact grid
    maximum.
    """
    s = np.asarray(s, dtype=float)
    m, n = s.shape
    orders = [np.argsort(-s[:, j], kind="stable") for j in range(n)]

    def upper(lo, hi):
        best = np.inf
        for j in range(n):
            k = lo.astype(float)
            rem = steps - lo.sum()
            for i in orders[j]:
                add = min(hi[i] - lo[i], rem)
                k[i] += add
                rem -= add
                if rem == 0:
                    break
            best = min(best, k @ s[:, j])
        return best / steps

    def some_point(lo, hi):
        k = lo.copy()
        rem = steps - lo.sum()
        for i in range(m):
            add = min(hi[i] - lo[i], rem)
            k[i] += add
            rem -= add
        return k

    lo0 = np.zeros(m, dtype=int)
    hi0 = np.full(m, steps)
    best = -np.inf
    heap = [(-upper(lo0, hi0), 0, lo0, hi0)]
    counter = 1
    while heap:
        neg, _, lo, hi = heapq.heappop(heap)
        if -neg <= best + 1e-15:
            break
        k = some_point(lo, hi)
        best = max(best, (k @ s).min() / steps)
        width = hi - lo
        d = int(np.argmax(width))
        if width[d] == 0:
            continue
        mid = (lo[d] + hi[d]) // 2
        for a, b in ((lo[d], mid), (mid + 1, hi[d])):
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[d], hi2[d] = a, b
            if lo2.sum() > steps or hi2.sum() < steps:
                continue
            u = upper(lo2, hi2)
            if u > best:
                heapq.heappush(heap, (-u, counter, lo2, hi2))
                counter += 1
    return best
