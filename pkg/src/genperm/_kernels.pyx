# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Signatures mirror ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

ctypedef fused num_t:
    cnp.int64_t
    double


def max_rect_discrepancy(const num_t[:, ::1] D):
    """Largest and smallest sum over contiguous sub-rectangles of ``D``.

    Returns ``(max_sum, max_witness, min_sum, min_witness)``; witnesses are
    half-open index boxes ``(x0, x1, y0, y1)``.
    """
    cdef Py_ssize_t P = D.shape[0], Q = D.shape[1]
    cdef Py_ssize_t y0, y1, x, smax = 0, smin = 0
    cdef num_t cur_max, cur_min, best_max = 0, best_min = 0, a
    cdef bint have = False
    cdef Py_ssize_t wmax0 = 0, wmax1 = 0, wmax2 = 0, wmax3 = 0
    cdef Py_ssize_t wmin0 = 0, wmin1 = 0, wmin2 = 0, wmin3 = 0
    if num_t is double:
        colsum_arr = np.zeros(P, dtype=np.float64)
    else:
        colsum_arr = np.zeros(P, dtype=np.int64)
    cdef num_t[::1] colsum = colsum_arr

    for y0 in range(Q):
        for x in range(P):
            colsum[x] = 0
        for y1 in range(y0, Q):
            for x in range(P):
                colsum[x] = colsum[x] + D[x, y1]
            cur_max = 0
            cur_min = 0
            for x in range(P):
                a = colsum[x]
                if x > 0 and cur_max > 0:
                    cur_max = cur_max + a
                else:
                    cur_max = a
                    smax = x
                if x > 0 and cur_min < 0:
                    cur_min = cur_min + a
                else:
                    cur_min = a
                    smin = x
                if not have or cur_max > best_max:
                    best_max = cur_max
                    wmax0 = smax; wmax1 = x + 1; wmax2 = y0; wmax3 = y1 + 1
                if not have or cur_min < best_min:
                    best_min = cur_min
                    wmin0 = smin; wmin1 = x + 1; wmin2 = y0; wmin3 = y1 + 1
                have = True
    return (best_max, (wmax0, wmax1, wmax2, wmax3),
            best_min, (wmin0, wmin1, wmin2, wmin3))


def cdf_gap(const cnp.int64_t[::1] ix1, const double[::1] fx1, const cnp.int64_t[::1] iy1, const double[::1] fy1,
            const double[:, ::1] M1,
            const cnp.int64_t[::1] ix2, const double[::1] fx2, const cnp.int64_t[::1] iy2, const double[::1] fy2,
            const double[:, ::1] M2):
    """Max of ``|F1 - F2|`` over the corners of a common refinement.

    Union cell ``(a, b)`` carries ``M[ix[a], iy[b]] * fx[a] * fy[b]`` of each
    measure (index -1 means outside the grid).  Returns ``(gap, a, b)`` where
    the maximum sits at the upper-right corner of union cell ``(a, b)``.
    """
    cdef Py_ssize_t U = ix1.shape[0], V = iy1.shape[0]
    cdef Py_ssize_t a, b, best_a = 0, best_b = 0
    cdef double row, d, m1, m2, g, best = -1.0
    cdef cnp.int64_t i1, i2, j1, j2
    colcum_arr = np.zeros(V, dtype=np.float64)
    cdef double[::1] colcum = colcum_arr
    for a in range(U):
        i1 = ix1[a]
        i2 = ix2[a]
        row = 0.0
        for b in range(V):
            j1 = iy1[b]
            j2 = iy2[b]
            m1 = 0.0
            m2 = 0.0
            if i1 >= 0 and j1 >= 0:
                m1 = M1[i1, j1] * fx1[a] * fy1[b]
            if i2 >= 0 and j2 >= 0:
                m2 = M2[i2, j2] * fx2[a] * fy2[b]
            d = m1 - m2
            colcum[b] += d
            row += colcum[b]
            g = fabs(row)
            if g > best:
                best = g
                best_a = a
                best_b = b
    return best, best_a, best_b


def pattern_counts(const cnp.int64_t[::1] values, int k):
    """Histogram over lexicographic pattern ranks of all k-subsequences."""
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t i, j, total = 1, rank, smaller
    cdef cnp.int64_t vi
    for i in range(2, k + 1):
        total *= i
    counts_arr = np.zeros(total, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    if k > m or k < 1:
        return counts_arr
    fact_arr = np.ones(k, dtype=np.int64)
    cdef cnp.int64_t[::1] fact = fact_arr
    for i in range(1, k):
        fact[i] = fact[i - 1] * i
    idx_arr = np.arange(k, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = idx_arr
    while True:
        rank = 0
        for i in range(k):
            vi = values[idx[i]]
            smaller = 0
            for j in range(i + 1, k):
                if values[idx[j]] < vi:
                    smaller += 1
            rank += smaller * fact[k - 1 - i]
        counts[rank] += 1
        # next combination in lexicographic order
        i = k - 1
        while i >= 0 and idx[i] == m - k + i:
            i -= 1
        if i < 0:
            break
        idx[i] += 1
        for j in range(i + 1, k):
            idx[j] = idx[j - 1] + 1
    return counts_arr
