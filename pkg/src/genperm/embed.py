"""Ordered selections as step measures, marginals and quantile subdivisions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    TOL,
    OrderedSelection,
    Permutation,
    PiecewiseLinearCDF,
    StepPermuton,
    StructureError,
    DomainError,
    quantile,
)


def _zeros(shape, exact: bool):
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def embed_selection(nu: OrderedSelection) -> StepPermuton:
    """Step measure giving mass ``1/m`` to each square ``S_{h, nu(h)}``.

    The x-grid stops at ``m/n``; the y-grid covers ``[0, 1]`` in steps of
    ``1/n``.  All data is exact.
    """
    n, m = nu.n, nu.m
    x_cuts = [Fraction(i, n) for i in range(m + 1)]
    y_cuts = [Fraction(j, n) for j in range(n + 1)]
    mass = _zeros((m, n), exact=True)
    for h, v in enumerate(nu.values):
        mass[h, v - 1] = Fraction(1, m)
    return StepPermuton(x_cuts, y_cuts, mass, Fraction(m, n))


def embed_permutation(sigma: Permutation) -> StepPermuton:
    return embed_selection(OrderedSelection.from_permutation(sigma))


def _close(a, b, exact: bool) -> bool:
    return a == b if exact else abs(float(a) - float(b)) <= TOL


def extract_selection(mu: StepPermuton) -> OrderedSelection:
    """Inverse of :func:`embed_selection`.

    Raises :class:`StructureError` naming the first column that does not
    carry exactly one active square of mass ``1/m`` on the ``1/n`` grid.
    """
    exact = mu.exact
    P, Q = mu.shape
    n, m = Q, P
    if m > n:
        raise StructureError(f"{m} columns exceed {n} rows")
    for j, y in enumerate(mu.y_cuts):
        if not _close(y, Fraction(j, n), exact):
            raise StructureError(f"y-grid is not the uniform 1/{n} grid (cut {j})")
    for i, x in enumerate(mu.x_cuts):
        if not _close(x, Fraction(i, n), exact):
            raise StructureError(f"x-grid is not the uniform 1/{n} grid (cut {i})")
    if not _close(mu.lam, Fraction(m, n), exact):
        raise StructureError(f"lambda {mu.lam} differs from m/n = {m}/{n}")
    values = []
    seen = set()
    for h in range(m):
        col = mu.cell_mass[h]
        active = [j for j in range(n) if not _close(col[j], 0, exact)]
        if len(active) != 1:
            raise StructureError(f"column {h + 1} has {len(active)} active cells, expected 1")
        j = active[0]
        if not _close(col[j], Fraction(1, m), exact):
            raise StructureError(f"column {h + 1} carries mass {col[j]}, expected 1/{m}")
        if j in seen:
            raise StructureError(f"column {h + 1} reuses row {j + 1}")
        seen.add(j)
        values.append(j + 1)
    return OrderedSelection(n, m, tuple(values))


def marginals(mu: StepPermuton) -> tuple[PiecewiseLinearCDF, PiecewiseLinearCDF]:
    """The x- and y-marginal CDFs as broken lines over the grid cuts."""
    zero = mu.cell_mass.flat[0] * 0
    col = np.concatenate([[zero], np.cumsum(mu.cell_mass.sum(axis=1))])
    row = np.concatenate([[zero], np.cumsum(mu.cell_mass.sum(axis=0))])
    return (PiecewiseLinearCDF(mu.x_cuts, col), PiecewiseLinearCDF(mu.y_cuts, row))


@dataclass(frozen=True)
class KSubdivision:
    """Marginal ``i/k``-quantiles ``x_0 = 0 < ... < x_k = lam`` and
    ``y_0 = 0 < ... < y_k = 1``."""

    x_quantiles: np.ndarray
    y_quantiles: np.ndarray

    def __post_init__(self):
        for name in ("x_quantiles", "y_quantiles"):
            arr = getattr(self, name)
            if np.any(np.diff(arr) <= 0):
                raise StructureError(f"{name} are not strictly increasing: {list(arr)}")

    @property
    def k(self) -> int:
        return len(self.x_quantiles) - 1


def k_subdivision(mu: StepPermuton, k: int) -> KSubdivision:
    if k < 1:
        raise DomainError("k must be positive")
    Fx, Fy = marginals(mu)
    exact = mu.exact
    one = Fraction(1) if exact else 1.0
    levels = [Fraction(i, k) if exact else i / k for i in range(1, k)]
    xs = [0 * one] + [quantile(Fx, q) for q in levels] + [mu.lam]
    ys = [0 * one] + [quantile(Fy, q) for q in levels] + [one]
    dtype = object if exact else np.float64
    return KSubdivision(np.array(xs, dtype=dtype), np.array(ys, dtype=dtype))


def mu_sigma(mu: StepPermuton, sigma: Permutation) -> StepPermuton:
    """Mass ``1/k`` spread uniformly on each ``R_{i, sigma(i)}`` of the
    k-subdivision of ``mu``."""
    k = sigma.k
    sub = k_subdivision(mu, k)
    exact = mu.exact
    mass = _zeros((k, k), exact)
    w = Fraction(1, k) if exact else 1.0 / k
    for i, s in enumerate(sigma.values):
        mass[i, s - 1] = w
    return StepPermuton(sub.x_quantiles, sub.y_quantiles, mass, mu.lam)

