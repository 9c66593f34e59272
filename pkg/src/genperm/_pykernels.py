"""NumPy fallbacks for the compiled kernels in ``_kernels.pyx``."""

import math
from itertools import combinations, islice

import numpy as np


def _row_kadane(S, sign):
    """Kadane along axis 1 for every row of ``S`` at once.

    ``sign=+1`` maximises, ``-1`` minimises.  Returns per-row best values,
    start and end (exclusive) indices, using the same strict-improvement
    tie-break as the compiled loop.
    """
    R, P = S.shape
    cur = S[:, 0].copy()
    start = np.zeros(R, dtype=np.int64)
    best = cur.copy()
    bstart = np.zeros(R, dtype=np.int64)
    bend = np.ones(R, dtype=np.int64)
    for x in range(1, P):
        a = S[:, x]
        extend = sign * cur > 0
        cur = np.where(extend, cur + a, a)
        start = np.where(extend, start, x)
        better = sign * cur > sign * best
        best = np.where(better, cur, best)
        bstart = np.where(better, start, bstart)
        bend = np.where(better, x + 1, bend)
    return best, bstart, bend


def max_rect_discrepancy(D):
    P, Q = D.shape
    results = {}
    for sign in (1, -1):
        best_val, best_wit = None, None
        for y0 in range(Q):
            S = np.cumsum(D[:, y0:], axis=1).T  # row r <-> y1 = y0 + r
            vals, starts, ends = _row_kadane(np.ascontiguousarray(S), sign)
            r = int(np.argmax(sign * vals))
            v = vals[r]
            if best_val is None or sign * v > sign * best_val:
                best_val = v
                best_wit = (int(starts[r]), int(ends[r]), y0, y0 + r + 1)
        results[sign] = (best_val.item() if hasattr(best_val, "item") else best_val, best_wit)
    return results[1][0], results[1][1], results[-1][0], results[-1][1]


def cdf_gap(ix1, fx1, iy1, fy1, M1, ix2, fx2, iy2, fy2, M2):
    def refine(ix, fx, iy, fy, M):
        Mp = np.zeros((M.shape[0] + 1, M.shape[1] + 1))
        Mp[:-1, :-1] = M
        return Mp[ix][:, iy] * np.outer(fx, fy)

    D = refine(ix1, fx1, iy1, fy1, M1) - refine(ix2, fx2, iy2, fy2, M2)
    F = np.abs(np.cumsum(np.cumsum(D, axis=0), axis=1))
    a, b = np.unravel_index(int(np.argmax(F)), F.shape)
    return float(F[a, b]), int(a), int(b)


def pattern_counts(values, k, chunk=1 << 18):
    values = np.asarray(values, dtype=np.int64)
    m = len(values)
    counts = np.zeros(math.factorial(k), dtype=np.int64)
    if k > m or k < 1:
        return counts
    fact = [math.factorial(k - 1 - i) for i in range(k)]
    it = combinations(range(m), k)
    while True:
        block = np.array(list(islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        vals = values[block]
        rank = np.zeros(len(block), dtype=np.int64)
        for i in range(k):
            smaller = (vals[:, i + 1:] < vals[:, i:i + 1]).sum(axis=1)
            rank += smaller * fact[i]
        counts += np.bincount(rank, minlength=len(counts))
    return counts
