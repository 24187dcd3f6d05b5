"""Compiled inner loops for the O(n^3) distance-matrix scans."""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _row_pair_min(ri, rk):
    # four independent accumulators let the compiler vectorize the reduction
    n = ri.shape[0]
    b0 = b1 = b2 = b3 = np.inf
    j = 0
    while j + 4 <= n:
        b0 = min(b0, ri[j] + rk[j])
        b1 = min(b1, ri[j + 1] + rk[j + 1])
        b2 = min(b2, ri[j + 2] + rk[j + 2])
        b3 = min(b3, ri[j + 3] + rk[j + 3])
        j += 4
    while j < n:
        b0 = min(b0, ri[j] + rk[j])
        j += 1
    return min(min(b0, b1), min(b2, b3))


@njit(cache=True)
def worst_triangle_violations(dist, tol):
    """For every pair i < k, the largest excess d(i,k) - d(i,j) - d(j,k).

    Returns arrays (excess, via) of shape (n, n); only entries with i < k are
    filled, and ``excess`` is 0 where no intermediate point beats the
    tolerance.  Expects a symmetric matrix (rows double as columns).
    """
    n = dist.shape[0]
    excess = np.zeros((n, n))
    via = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        ri = dist[i]
        for k in range(i + 1, n):
            rk = dist[k]
            gap = dist[i, k] - _row_pair_min(ri, rk)
            if gap > tol:
                arg = 0
                best = np.inf
                for j in range(n):
                    if ri[j] + rk[j] < best:
                        best = ri[j] + rk[j]
                        arg = j
                excess[i, k] = dist[i, k] - best
                via[i, k] = arg
    return excess, via


@njit(cache=True, fastmath=True)
def min_plus_via(left, right):
    """out[x, y] = min_s left[x, s] + right[y, s]."""
    nx, m = left.shape
    ny = right.shape[0]
    out = np.empty((nx, ny))
    for x in range(nx):
        lx = left[x]
        for y in range(ny):
            ry = right[y]
            best = np.inf
            for s in range(m):
                v = lx[s] + ry[s]
                if v < best:
                    best = v
            out[x, y] = best
    return out
