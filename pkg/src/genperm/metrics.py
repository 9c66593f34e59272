"""Joint CDFs and the two distances between step measures.

Both distances are computed on the union of the two grids.  On a union cell
both measures have constant density, so ``F1 - F2`` is bilinear there and its
extremes sit at union-grid corners; likewise the discrepancy of a rectangle is
multilinear in its four sides, so an optimal rectangle has union-grid sides.
Cells are half-open internally; since the measures have no atoms this agrees
with closed rectangles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from . import kernels
from .core import StepPermuton

# int64 kernel is safe while the total absolute integer mass stays below this
_INT_LIMIT = 1 << 62


@dataclass(frozen=True)
class DistanceResult:
    """``value`` plus a witness: a point ``(x, y)`` for ``d_inf`` or a
    rectangle ``(x0, x1, y0, y1)`` for ``d_square``."""

    value: object
    witness: tuple

    def __float__(self) -> float:
        return float(self.value)


def union_cuts(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == object and b.dtype == object:
        return np.array(sorted(set(a.tolist()) | set(b.tolist())), dtype=object)
    return np.union1d(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def refine_index(cuts: np.ndarray, union: np.ndarray):
    """For each union cell: the index of the containing cell of ``cuts``
    (``-1`` when outside) and the fraction of that cell it covers."""
    mids = (union[:-1] + union[1:]) / 2
    if union.dtype == object:
        idx = np.array([np.searchsorted(cuts, m, side="right") - 1 for m in mids], dtype=np.int64)
    else:
        idx = np.searchsorted(np.asarray(cuts, dtype=float), mids, side="right").astype(np.int64) - 1
    inside = (idx >= 0) & (idx < len(cuts) - 1)
    idx = np.where(inside, idx, -1)
    widths = np.diff(cuts)
    safe = np.where(inside, idx, 0)
    frac = np.diff(union) / widths[safe]
    if union.dtype == object:
        frac = np.array([f if ok else Fraction(0) for f, ok in zip(frac, inside)], dtype=object)
    else:
        frac = np.where(inside, frac, 0.0).astype(float)
    return idx, frac


def refined_mass(mu: StepPermuton, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Cell masses of ``mu`` on the grid ``X x Y`` (which must refine it
    where ``mu`` carries mass)."""
    ix, fx = refine_index(mu.x_cuts, X)
    iy, fy = refine_index(mu.y_cuts, Y)
    M = mu.cell_mass
    pad = np.zeros((M.shape[0] + 1, M.shape[1] + 1), dtype=M.dtype)
    if M.dtype == object:
        pad.fill(Fraction(0))
    pad[:-1, :-1] = M
    return pad[ix][:, iy] * np.outer(fx, fy)


def _common(mu1: StepPermuton, mu2: StepPermuton):
    if mu1.exact != mu2.exact:
        mu1, mu2 = mu1.to_float(), mu2.to_float()
    X = union_cuts(mu1.x_cuts, mu2.x_cuts)
    Y = union_cuts(mu1.y_cuts, mu2.y_cuts)
    return mu1, mu2, X, Y


def joint_cdf_eval(mu: StepPermuton, x, y):
    """``mu([0, x] x [0, y])`` by direct summation over cells."""
    w, h = mu.widths, mu.heights
    fx = np.array([min(max((x - a) / d, 0), 1) for a, d in zip(mu.x_cuts[:-1], w)],
                  dtype=mu.cell_mass.dtype)
    fy = np.array([min(max((y - b) / d, 0), 1) for b, d in zip(mu.y_cuts[:-1], h)],
                  dtype=mu.cell_mass.dtype)
    return fx @ mu.cell_mass @ fy


def _coverage(points, cuts, widths, exact):
    """Fraction of each cell lying left of (below) each probe point."""
    if exact:
        out = np.empty((len(points), len(widths)), dtype=object)
        for a, p in enumerate(points):
            for i, (c, w) in enumerate(zip(cuts[:-1], widths)):
                out[a, i] = min(max((p - c) / w, 0), 1)
        return out
    pts = np.asarray(points, dtype=float)
    return np.clip((pts[:, None] - cuts[None, :-1]) / widths[None, :], 0.0, 1.0)


def joint_cdf_grid(mu: StepPermuton, xs, ys) -> np.ndarray:
    """``F(xs[i], ys[j])`` for whole probe vectors.  Exact when ``mu`` and
    the probes are exact, float otherwise."""
    xs, ys = list(xs), list(ys)
    exact = mu.exact and all(isinstance(v, (int, Fraction)) for v in xs + ys)
    if not exact:
        mu = mu.to_float()
    Ax = _coverage(xs, mu.x_cuts, mu.widths, exact)
    Ay = _coverage(ys, mu.y_cuts, mu.heights, exact)
    return Ax @ mu.cell_mass @ Ay.T


def rectangle_masses(mu: StepPermuton, xs, ys) -> np.ndarray:
    """Masses of the cells ``[xs[i], xs[i+1]) x [ys[j], ys[j+1])`` of an
    arbitrary grid, by inclusion-exclusion on the joint CDF."""
    F = joint_cdf_grid(mu, xs, ys)
    return F[1:, 1:] - F[:-1, 1:] - F[1:, :-1] + F[:-1, :-1]


def d_inf(mu1: StepPermuton, mu2: StepPermuton) -> DistanceResult:
    """``sup |F1 - F2|`` over the unit square, with a maximising corner."""
    mu1, mu2, X, Y = _common(mu1, mu2)
    if mu1.exact:
        D = refined_mass(mu1, X, Y) - refined_mass(mu2, X, Y)
        F = np.abs(np.cumsum(np.cumsum(D, axis=0), axis=1))
        a, b = np.unravel_index(int(np.argmax(F)), F.shape)
        return DistanceResult(F[a, b], (X[a + 1], Y[b + 1]))
    ix1, fx1 = refine_index(mu1.x_cuts, X)
    iy1, fy1 = refine_index(mu1.y_cuts, Y)
    ix2, fx2 = refine_index(mu2.x_cuts, X)
    iy2, fy2 = refine_index(mu2.y_cuts, Y)
    gap, a, b = kernels.cdf_gap(
        ix1, fx1, iy1, fy1, np.ascontiguousarray(mu1.cell_mass, dtype=float),
        ix2, fx2, iy2, fy2, np.ascontiguousarray(mu2.cell_mass, dtype=float))
    return DistanceResult(float(gap), (float(X[a + 1]), float(Y[b + 1])))


def _integerize(D: np.ndarray):
    """Scale an exact matrix to integers; returns (int matrix, scale)."""
    scale = 1
    for v in D.flat:
        scale = lcm(scale, v.denominator)
    ints = np.empty(D.shape, dtype=object)
    for idx, v in np.ndenumerate(D):
        ints[idx] = v.numerator * (scale // v.denominator)
    return ints, scale


def d_square_cost(mu1: StepPermuton, mu2: StepPermuton) -> int:
    """Inner-loop iterations of :func:`d_square` (``P * Q * (Q + 1) / 2``)."""
    P = len(union_cuts(mu1.x_cuts, mu2.x_cuts)) - 1
    Q = len(union_cuts(mu1.y_cuts, mu2.y_cuts)) - 1
    return P * Q * (Q + 1) // 2


def d_square(mu1: StepPermuton, mu2: StepPermuton) -> DistanceResult:
    """``sup |mu1(R) - mu2(R)|`` over axis-parallel rectangles ``R``.

    Runs a maximum/minimum contiguous-sum scan over x for every pair of
    union y-cuts, ``O(Q^2 P)``.  Exact inputs are scaled to integers so the
    result is an exact Fraction.
    """
    mu1, mu2, X, Y = _common(mu1, mu2)
    D = refined_mass(mu1, X, Y) - refined_mass(mu2, X, Y)
    if mu1.exact:
        ints, scale = _integerize(D)
        if sum(abs(v) for v in ints.flat) < _INT_LIMIT:
            hi, whi, lo, wlo = kernels.max_rect_discrepancy(np.ascontiguousarray(ints, dtype=np.int64))
        else:
            hi, whi, lo, wlo = kernels.python.max_rect_discrepancy(ints)
        hi, lo = Fraction(int(hi), scale), Fraction(int(lo), scale)
    else:
        hi, whi, lo, wlo = kernels.max_rect_discrepancy(np.ascontiguousarray(D, dtype=float))
        hi, lo = float(hi), float(lo)
    if hi >= -lo:
        value, (x0, x1, y0, y1) = hi, whi
    else:
        value, (x0, x1, y0, y1) = -lo, wlo
    wit = (X[x0], X[x1], Y[y0], Y[y1])
    if not mu1.exact:
        wit = tuple(float(v) for v in wit)
    return DistanceResult(value, wit)
