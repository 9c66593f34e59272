"""Domain types shared by every module.

Numbers live in one of two representations.  Data built from integers
(embeddings, quantile grids of exact measures, ``"p/q"`` strings read from
JSON) is held in ``object`` arrays of :class:`fractions.Fraction` so that all
identities hold with zero tolerance.  Anything else is ``float64`` and is
compared with an absolute tolerance of ``TOL``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-12


class GenpermError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GenpermError, ValueError):
    """An argument lies outside the domain of the operation."""


class StructureError(GenpermError, ValueError):
    """A measure or selection does not have the required structure."""


class ShapeError(GenpermError, ValueError):
    """Sizes of the inputs do not fit together."""


class BudgetExceededError(GenpermError, RuntimeError):
    """Exact computation would exceed the configured work budget."""


class TieError(GenpermError, ValueError):
    """Two sample points share a coordinate."""


# -- numeric helpers -------------------------------------------------------

def _is_rational_scalar(v) -> bool:
    return isinstance(v, (Integral, Rational)) and not isinstance(v, bool)


def to_number(v):
    """Coerce a scalar: ints, Fractions and ``"p/q"`` strings stay exact."""
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (np.integer,)):
        return Fraction(int(v))
    if _is_rational_scalar(v):
        return Fraction(v)
    return float(v)


def as_number_array(values, ndim: int = 1) -> np.ndarray:
    """Build an exact (object/Fraction) array if every entry is rational,
    otherwise a float64 array."""
    if isinstance(values, np.ndarray) and values.dtype.kind == "f":
        if values.ndim != ndim:
            raise ShapeError(f"expected a {ndim}-d array, got shape {values.shape}")
        return values.astype(np.float64, copy=False)
    raw = np.asarray(values, dtype=object)
    if raw.ndim != ndim:
        raise ShapeError(f"expected a {ndim}-d array, got shape {raw.shape}")
    flat = [to_number(v) for v in raw.ravel()]
    if all(isinstance(v, Fraction) for v in flat):
        out = np.empty(len(flat), dtype=object)
        out[:] = flat
        return out.reshape(raw.shape)
    return np.array([float(v) for v in flat], dtype=np.float64).reshape(raw.shape)


def is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def tol_for(*arrays: np.ndarray) -> float:
    return 0.0 if all(is_exact(a) for a in arrays) else TOL


def to_float_array(arr: np.ndarray) -> np.ndarray:
    return np.asarray(arr, dtype=np.float64) if is_exact(arr) else arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


# -- permutations and ordered selections -----------------------------------

@dataclass(frozen=True)
class Permutation:
    """A pattern: a bijection of ``{1..k}`` written as ``(s(1), ..., s(k))``."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 1:
            raise DomainError("a permutation needs k >= 1")
        if sorted(vals) != list(range(1, len(vals) + 1)):
            raise DomainError(f"{vals} is not a permutation of 1..{len(vals)}")

    @property
    def k(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.values)) + ")"

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Parse ``"2,3,1"``, ``"(2,3,1)"`` or ``"231"`` (k <= 9)."""
        body = text.strip().strip("()[] ")
        if "," in body:
            parts = [p for p in body.split(",") if p.strip()]
        elif " " in body:
            parts = body.split()
        else:
            parts = list(body)
        return cls(tuple(int(p) for p in parts))

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls(tuple(range(1, k + 1)))


@dataclass(frozen=True)
class OrderedSelection:
    """An (n, m)-permutation: m distinct values of ``[n]`` in a fixed order."""

    n: int
    m: int
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        n, m = int(self.n), int(self.m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        if n < 1 or m < 1:
            raise DomainError("n and m must be positive")
        if m > n:
            raise DomainError(f"m={m} exceeds n={n}")
        if len(vals) != m:
            raise ShapeError(f"expected {m} values, got {len(vals)}")
        if any(v < 1 or v > n for v in vals):
            raise DomainError(f"values must lie in [1, {n}]")
        if len(set(vals)) != m:
            raise DomainError("values must be pairwise distinct")

    @property
    def lam(self) -> Fraction:
        return Fraction(self.m, self.n)

    def pattern(self) -> Permutation:
        """Relative order of the selected values, as a permutation of [m]."""
        order = sorted(range(self.m), key=lambda i: self.values[i])
        ranks = [0] * self.m
        for r, i in enumerate(order):
            ranks[i] = r + 1
        return Permutation(tuple(ranks))

    @classmethod
    def from_permutation(cls, sigma: Permutation) -> "OrderedSelection":
        return cls(sigma.k, sigma.k, sigma.values)


# -- one-dimensional CDFs ------------------------------------------------

@dataclass(frozen=True)
class PiecewiseLinearCDF:
    """Continuous CDF given by breakpoints and its values there.

    ``lipschitz_lambda``, when set, tags the CDF with slope bound ``1/lambda``
    and is checked on construction.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    lipschitz_lambda: object = None

    def __post_init__(self):
        bp = as_number_array(self.breakpoints)
        vals = as_number_array(self.values)
        if is_exact(bp) != is_exact(vals):
            bp, vals = to_float_array(bp), to_float_array(vals)
        if len(bp) != len(vals) or len(bp) < 1:
            raise ShapeError("breakpoints and values must have the same non-zero length")
        if np.any(np.diff(bp) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        if bp[0] < 0 or bp[-1] > 1:
            raise DomainError("breakpoints must lie in [0, 1]")
        tol = tol_for(bp, vals)
        if np.any(np.diff(vals) < -tol):
            raise DomainError("CDF values must be non-decreasing")
        if abs(vals[0]) > tol or abs(vals[-1] - 1) > tol:
            raise DomainError("CDF values must start at 0 and end at 1")
        if self.lipschitz_lambda is not None:
            lam = self.lipschitz_lambda
            excess = np.diff(vals) - np.diff(bp) / lam
            if np.any(excess > tol):
                raise DomainError(f"CDF slope exceeds 1/lambda = {1 / lam}")
        object.__setattr__(self, "breakpoints", _frozen(bp))
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def exact(self) -> bool:
        return is_exact(self.breakpoints)

    def __call__(self, x):
        return cdf_eval(self, x)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)


def cdf_eval(F: PiecewiseLinearCDF, x):
    """Value of the broken line at ``x``; 0 left of the first breakpoint and
    1 right of the last."""
    bp, vals = F.breakpoints, F.values
    if x <= bp[0]:
        return vals[0] * 0
    if x >= bp[-1]:
        return vals[-1] * 0 + 1
    j = bisect.bisect_right(bp, x) - 1
    t = (x - bp[j]) / (bp[j + 1] - bp[j])
    return vals[j] + t * (vals[j + 1] - vals[j])


def quantile(F: PiecewiseLinearCDF, q):
    """``sup {x : F(x) = q}`` for ``0 < q < 1``.

    On a flat piece at level ``q`` this is its right endpoint.
    """
    if not 0 < q < 1:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    bp, vals = F.breakpoints, F.values
    if not F.exact:
        q = float(q)
    # last breakpoint whose value does not exceed q
    j = bisect.bisect_right(list(vals), q) - 1
    if vals[j] == q:
        return bp[j]
    return bp[j] + (q - vals[j]) * (bp[j + 1] - bp[j]) / (vals[j + 1] - vals[j])


# -- step measures -------------------------------------------------------

@dataclass(frozen=True)
class StepPermuton:
    """Probability measure with constant density on each cell of a grid.

    ``cell_mass[i, j]`` is the mass of ``[x_cuts[i], x_cuts[i+1]) x
    [y_cuts[j], y_cuts[j+1])``.  Marginal and mass conditions are not enforced
    here; use :func:`validate_lambda_permuton`.
    """

    x_cuts: np.ndarray
    y_cuts: np.ndarray
    cell_mass: np.ndarray
    lam: object = None

    def __post_init__(self):
        xc = as_number_array(self.x_cuts)
        yc = as_number_array(self.y_cuts)
        cm = as_number_array(self.cell_mass, ndim=2)
        lam = self.lam if self.lam is not None else xc[-1]
        lam = to_number(lam)
        exact = is_exact(xc) and is_exact(yc) and is_exact(cm) and isinstance(lam, Fraction)
        if not exact:
            xc, yc, cm = to_float_array(xc), to_float_array(yc), to_float_array(cm)
            lam = float(lam)
        if len(xc) < 2 or len(yc) < 2:
            raise ShapeError("need at least one cell in each direction")
        if cm.shape != (len(xc) - 1, len(yc) - 1):
            raise ShapeError(
                f"cell_mass shape {cm.shape} does not match cuts "
                f"({len(xc) - 1}, {len(yc) - 1})")
        if xc[0] != 0 or yc[0] != 0:
            raise DomainError("cuts must start at 0")
        if np.any(np.diff(xc) <= 0) or np.any(np.diff(yc) <= 0):
            raise DomainError("cuts must be strictly increasing")
        if xc[-1] > 1 + TOL or yc[-1] > 1 + TOL:
            raise DomainError("cuts must lie in [0, 1]")
        if not 0 < lam <= 1:
            raise DomainError(f"lambda must lie in (0, 1], got {lam}")
        if np.any(cm < 0):
            raise DomainError("cell masses must be non-negative")
        object.__setattr__(self, "x_cuts", _frozen(xc))
        object.__setattr__(self, "y_cuts", _frozen(yc))
        object.__setattr__(self, "cell_mass", _frozen(cm))
        object.__setattr__(self, "lam", lam)

    @property
    def exact(self) -> bool:
        return is_exact(self.cell_mass)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cell_mass.shape

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.x_cuts)

    @property
    def heights(self) -> np.ndarray:
        return np.diff(self.y_cuts)

    def density(self) -> np.ndarray:
        return self.cell_mass / np.outer(self.widths, self.heights)

    def total_mass(self):
        return self.cell_mass.sum()

    def to_float(self) -> "StepPermuton":
        if not self.exact:
            return self
        return StepPermuton(to_float_array(self.x_cuts), to_float_array(self.y_cuts),
                            to_float_array(self.cell_mass), float(self.lam))

    def active_cells(self) -> list[tuple[int, int]]:
        return [tuple(int(a) for a in ij) for ij in zip(*np.nonzero(self.cell_mass > 0))]

    def __eq__(self, other):
        if not isinstance(other, StepPermuton):
            return NotImplemented
        return (self.lam == other.lam and self.shape == other.shape
                and np.array_equal(self.x_cuts, other.x_cuts)
                and np.array_equal(self.y_cuts, other.y_cuts)
                and np.array_equal(self.cell_mass, other.cell_mass))

    __hash__ = None

    @classmethod
    def uniform(cls, lam=Fraction(1)) -> "StepPermuton":
        """Single cell ``[0, lam) x [0, 1)`` carrying all the mass."""
        lam = to_number(lam)
        one = Fraction(1) if isinstance(lam, Fraction) else 1.0
        return cls([0 * one, lam], [0 * one, one], [[one]], lam)


class JointCDF:
    """On-demand evaluation of ``F(x, y) = mu([0, x] x [0, y])``."""

    def __init__(self, mu: StepPermuton):
        self.mu = mu

    def __call__(self, x, y):
        from .metrics import joint_cdf_eval
        return joint_cdf_eval(self.mu, x, y)


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    invariant: str   # "mass" | "support" | "uniform-x" | "y-lipschitz"
    index: object
    magnitude: object

    def __str__(self) -> str:
        return f"{self.invariant} at {self.index}: {self.magnitude}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.invariant for v in self.violations}


def validate_lambda_permuton(mu: StepPermuton) -> ValidationReport:
    """Check mass, support, uniform x-marginal on ``[0, lam]`` and the
    ``1/lam`` slope bound of the y-marginal.  Problems are reported, never
    raised."""
    tol = 0 if mu.exact else TOL
    lam = mu.lam
    out: list[Violation] = []

    total = mu.total_mass()
    if abs(total - 1) > tol:
        out.append(Violation("mass", None, total - 1))

    col_mass = mu.cell_mass.sum(axis=1)
    widths = mu.widths
    for i in range(len(widths)):
        lo, hi = mu.x_cuts[i], mu.x_cuts[i + 1]
        if lo >= lam - tol:
            if col_mass[i] > tol:
                out.append(Violation("support", i, col_mass[i]))
        elif hi > lam + tol:
            # column straddles lam: mass beyond lam can't be ruled out
            out.append(Violation("support", i, hi - lam))
        else:
            dens = col_mass[i] / widths[i]
            if abs(dens - 1 / lam) > tol:
                out.append(Violation("uniform-x", i, dens - 1 / lam))
    if mu.x_cuts[-1] < lam - tol:
        out.append(Violation("uniform-x", len(widths), lam - mu.x_cuts[-1]))

    row_mass = mu.cell_mass.sum(axis=0)
    heights = mu.heights
    for j in range(len(heights)):
        excess = row_mass[j] / heights[j] - 1 / lam
        if excess > tol:
            out.append(Violation("y-lipschitz", j, excess))
    return ValidationReport(tuple(out))


def binom(n: int, k: int) -> int:
    return math.comb(n, k)


def permutations_of(k: int) -> Iterable[Permutation]:
    """All of ``P_k`` in lexicographic order."""
    from itertools import permutations
    for p in permutations(range(1, k + 1)):
        yield Permutation(p)


def perm_rank(values: Sequence[int]) -> int:
    """Lexicographic rank of a permutation (0-based) among all of ``P_k``."""
    k = len(values)
    rank = 0
    for i in range(k):
        smaller = sum(1 for j in range(i + 1, k) if values[j] < values[i])
        rank += smaller * math.factorial(k - 1 - i)
    return rank


def perm_unrank(rank: int, k: int) -> Permutation:
    pool = list(range(1, k + 1))
    out = []
    for i in range(k):
        f = math.factorial(k - 1 - i)
        q, rank = divmod(rank, f)
        out.append(pool.pop(q))
    return Permutation(tuple(out))
