"""Pattern densities in ordered selections and in step measures."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, permutations, product

import numpy as np

from . import kernels
from .core import (
    BudgetExceededError,
    DomainError,
    OrderedSelection,
    Permutation,
    StepPermuton,
    TieError,
    binom,
    perm_rank,
)
from .embed import embed_selection

DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class PatternDensityResult:
    tau: Permutation
    value: object
    method: str            # "exact-enumeration" | "monte-carlo"
    std_error: float = 0.0
    sample_count: int = 0

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise DomainError(f"density {self.value} outside [0, 1]")

    def to_record(self) -> dict:
        return {
            "tau": list(self.tau.values),
            "value": self.value,
            "method": self.method,
            "std_error": self.std_error,
            "samples": self.sample_count,
        }


def pattern_of_points(points) -> Permutation:
    """``sigma(i)`` = rank of the y-coordinate of the point with the i-th
    smallest x-coordinate."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    xs, ys = pts[:, 0], pts[:, 1]
    if len(np.unique(xs)) < len(xs) or len(np.unique(ys)) < len(ys):
        raise TieError("points share an x- or y-coordinate")
    order = np.argsort(xs)
    yrank = np.empty(len(ys), dtype=np.int64)
    yrank[np.argsort(ys)] = np.arange(1, len(ys) + 1)
    return Permutation(tuple(int(v) for v in yrank[order]))


def selection_pattern_counts(nu: OrderedSelection, k: int) -> np.ndarray:
    """``Gamma(tau, nu)`` for every ``tau`` in ``P_k``, indexed by
    lexicographic rank."""
    if k > nu.m:
        raise DomainError(f"pattern length {k} exceeds m = {nu.m}")
    return kernels.pattern_counts(np.asarray(nu.values, dtype=np.int64), k)


def count_occurrences(tau: Permutation, nu: OrderedSelection) -> int:
    return int(selection_pattern_counts(nu, tau.k)[perm_rank(tau.values)])


def density_in_selection(tau: Permutation, nu: OrderedSelection) -> PatternDensityResult:
    value = Fraction(count_occurrences(tau, nu), binom(nu.m, tau.k))
    return PatternDensityResult(tau, value, "exact-enumeration")


def _assignment_patterns(cols, rows) -> Counter:
    """Pattern ranks over all equally likely coordinate orders of points
    placed in the given cells.

    Points sharing a column have exchangeable x-coordinates (likewise rows
    and y), and distinct columns of one grid never partially overlap, so
    every order compatible with the column/row order is equally likely.
    """
    k = len(cols)
    xgroups = [[p for p in range(k) if cols[p] == c] for c in sorted(set(cols))]
    ygroups = [[p for p in range(k) if rows[p] == r] for r in sorted(set(rows))]
    out = Counter()
    for xparts in product(*(permutations(g) for g in xgroups)):
        xorder = [p for part in xparts for p in part]
        for yparts in product(*(permutations(g) for g in ygroups)):
            yrank = [0] * k
            for r, p in enumerate(pt for part in yparts for pt in part):
                yrank[p] = r + 1
            out[perm_rank([yrank[p] for p in xorder])] += 1
    return out


def pattern_distribution_exact(mu: StepPermuton, k: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``t(tau, mu)`` for every ``tau`` in ``P_k`` (indexed by rank).

    Enumerates multisets of active cells with multinomial weights; exact for
    exact measures.
    """
    if k < 1:
        raise DomainError("k must be positive")
    cells = mu.active_cells()
    terms = math.comb(len(cells) + k - 1, k)
    if terms > budget:
        raise BudgetExceededError(
            f"{terms} cell assignments exceed the budget of {budget}; "
            "use the Monte Carlo estimator")
    masses = [mu.cell_mass[c] for c in cells]
    zero = mu.cell_mass.flat[0] * 0
    dist = np.empty(math.factorial(k), dtype=object if mu.exact else float)
    dist.fill(zero)
    kfact = math.factorial(k)
    for combo in combinations_with_replacement(range(len(cells)), k):
        mult = kfact
        for c in Counter(combo).values():
            mult //= math.factorial(c)
        weight = mult * math.prod(masses[c] for c in combo)
        if weight == 0:
            continue
        pats = _assignment_patterns([cells[c][0] for c in combo], [cells[c][1] for c in combo])
        total = sum(pats.values())
        for rank, cnt in pats.items():
            dist[rank] += weight * (Fraction(cnt, total) if mu.exact else cnt / total)
    return dist


def density_in_step_permuton_exact(tau: Permutation, mu: StepPermuton,
                                   budget: int = DEFAULT_BUDGET) -> PatternDensityResult:
    dist = pattern_distribution_exact(mu, tau.k, budget)
    return PatternDensityResult(tau, dist[perm_rank(tau.values)], "exact-enumeration")


def density_in_permuton_mc(tau: Permutation, mu: StepPermuton, samples: int, seed: int,
                           workers: int = 1, chunk: int = 1 << 16) -> PatternDensityResult:
    """Frequency of ``tau`` among ``samples`` independent draws of the
    ``mu``-random permutation of order ``k``.

    Draws are split into fixed chunks, chunk ``c`` using substream ``c`` of
    ``seed``; the result does not depend on ``workers``.
    """
    from .sampling import count_patterns

    if samples < 1:
        raise DomainError("samples must be positive")
    k = tau.k
    if k == 1:
        return PatternDensityResult(tau, 1.0, "monte-carlo", 0.0, samples)
    target = perm_rank(tau.values)
    sizes = [min(chunk, samples - s) for s in range(0, samples, chunk)]

    def run(c):
        counts, _ = count_patterns(mu, k, sizes[c], seed, stream=c)
        return int(counts[target])

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            hits = sum(ex.map(run, range(len(sizes))))
    else:
        hits = sum(run(c) for c in range(len(sizes)))
    p = hits / samples
    return PatternDensityResult(tau, p, "monte-carlo", math.sqrt(p * (1 - p) / samples), samples)


def embedding_density_gap(tau: Permutation, nu: OrderedSelection):
    """``(|t(tau, nu) - t(tau, mu_nu)|, C(k, 2) / m)``, both exact."""
    t_sel = density_in_selection(tau, nu).value
    t_mu = density_in_step_permuton_exact(tau, embed_selection(nu)).value
    return abs(t_sel - t_mu), Fraction(binom(tau.k, 2), nu.m)
