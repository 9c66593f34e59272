"""Sampling from step measures, mu-random permutations and the
concentration experiment for random subpermutons."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, Permutation, StepPermuton
from .embed import mu_sigma
from .metrics import d_inf, d_square, d_square_cost
from .patterns import pattern_of_points
from .rng import make_rng

log = logging.getLogger(__name__)

DEFAULT_D_SQUARE_BUDGET = 5 * 10**7


@dataclass(frozen=True)
class SampleBatch:
    points: np.ndarray      # shape (k, 2)
    seed: int
    resample_count: int = 0

    @property
    def k(self) -> int:
        return len(self.points)


class _Sampler:
    """Cell lookup tables for repeated draws from one measure."""

    def __init__(self, mu: StepPermuton):
        mu = mu.to_float()
        P, Q = mu.shape
        flat = mu.cell_mass.ravel()
        self.cum = np.cumsum(flat)
        self.total = self.cum[-1]
        self.last_active = int(np.flatnonzero(flat > 0)[-1])
        self.col = np.repeat(np.arange(P), Q)
        self.row = np.tile(np.arange(Q), P)
        self.x0, self.w = mu.x_cuts[:-1], mu.widths
        self.y0, self.h = mu.y_cuts[:-1], mu.heights

    def draw(self, rng: np.random.Generator, shape):
        u = rng.random(shape) * self.total
        cell = np.minimum(np.searchsorted(self.cum, u, side="right"), self.last_active)
        c, r = self.col[cell], self.row[cell]
        xs = self.x0[c] + self.w[c] * rng.random(shape)
        ys = self.y0[r] + self.h[r] * rng.random(shape)
        return xs, ys


def _has_ties(a: np.ndarray) -> np.ndarray:
    s = np.sort(a, axis=-1)
    return np.any(np.diff(s, axis=-1) == 0, axis=-1)


def _draw_distinct(sampler: _Sampler, rng, rows: int, k: int):
    xs, ys = sampler.draw(rng, (rows, k))
    resamples = 0
    bad = _has_ties(xs) | _has_ties(ys)
    while bad.any():
        idx = np.flatnonzero(bad)
        resamples += len(idx)
        nx, ny = sampler.draw(rng, (len(idx), k))
        xs[idx], ys[idx] = nx, ny
        bad = _has_ties(xs) | _has_ties(ys)
    if resamples:
        log.info("resampled %d tied draws", resamples)
    return xs, ys, resamples


def sample_points(mu: StepPermuton, k: int, seed: int, stream: int = 0) -> SampleBatch:
    """``k`` iid points: a cell chosen by mass, then a uniform point in it."""
    if k < 1:
        raise DomainError("k must be positive")
    rng = make_rng(seed, stream)
    xs, ys, resamples = _draw_distinct(_Sampler(mu), rng, 1, k)
    return SampleBatch(np.column_stack([xs[0], ys[0]]), seed, resamples)


def random_pattern(mu: StepPermuton, k: int, seed: int, stream: int = 0) -> Permutation:
    return pattern_of_points(sample_points(mu, k, seed, stream).points)


def random_subpermuton(mu: StepPermuton, k: int, seed: int, stream: int = 0) -> StepPermuton:
    return mu_sigma(mu, random_pattern(mu, k, seed, stream))


def pattern_ranks(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Lexicographic ranks of the patterns of many small point sets
    (one per row)."""
    k = xs.shape[1]
    order = np.argsort(xs, axis=1)
    yrank = np.argsort(np.argsort(ys, axis=1), axis=1)
    pat = np.take_along_axis(yrank, order, axis=1)
    rank = np.zeros(len(xs), dtype=np.int64)
    for i in range(k - 1):
        smaller = (pat[:, i + 1:] < pat[:, i:i + 1]).sum(axis=1)
        rank += smaller * math.factorial(k - 1 - i)
    return rank


def count_patterns(mu: StepPermuton, k: int, draws: int, seed: int, stream: int = 0,
                   sampler: _Sampler | None = None):
    """Histogram of ``draws`` independent mu-random permutations of order
    ``k`` (by lexicographic rank), plus the number of resampled draws."""
    rng = make_rng(seed, stream)
    sampler = sampler or _Sampler(mu)
    xs, ys, resamples = _draw_distinct(sampler, rng, draws, k)
    counts = np.bincount(pattern_ranks(xs, ys), minlength=math.factorial(k))
    return counts, resamples


@dataclass
class ConcentrationReport:
    k: int
    trials: int
    seed: int
    d_inf: list = field(default_factory=list)
    d_square: list = field(default_factory=list)   # None where skipped

    @property
    def threshold_inf(self) -> float:
        return 4 * self.k ** -0.25

    @property
    def threshold_square(self) -> float:
        return 16 * self.k ** -0.25

    @property
    def exceed_inf(self) -> float:
        return float(np.mean(np.asarray(self.d_inf) > self.threshold_inf))

    @property
    def exceed_square(self):
        vals = [v for v in self.d_square if v is not None]
        if not vals:
            return None
        return float(np.mean(np.asarray(vals) > self.threshold_square))

    @property
    def median_inf(self) -> float:
        return float(np.median(self.d_inf))

    def summary(self) -> dict:
        q = np.quantile(self.d_inf, [0.0, 0.25, 0.5, 0.75, 1.0])
        return {
            "k": self.k, "trials": self.trials, "seed": self.seed,
            "threshold_inf": self.threshold_inf,
            "threshold_square": self.threshold_square,
            "exceed_inf": self.exceed_inf,
            "exceed_square": self.exceed_square,
            "d_inf_quantiles": dict(zip(["min", "q25", "median", "q75", "max"], map(float, q))),
        }

    def rows(self):
        for t, (a, b) in enumerate(zip(self.d_inf, self.d_square)):
            yield t, a, b, self.threshold_inf, self.threshold_square


def concentration_experiment(mu: StepPermuton, k: int, trials: int, seed: int,
                             d_square_budget: int = DEFAULT_D_SQUARE_BUDGET) -> ConcentrationReport:
    """Distance from ``mu`` to ``trials`` independent mu-random
    subpermutons of order ``k``; trial ``t`` uses substream ``t``.

    ``d_square`` is computed only while its ``O(Q^2 P)`` cost stays within
    ``d_square_budget``.
    """
    if k < 1 or trials < 1:
        raise DomainError("k and trials must be positive")
    muf = mu.to_float()
    report = ConcentrationReport(k, trials, seed)
    for t in range(trials):
        sub = random_subpermuton(muf, k, seed, stream=t)
        report.d_inf.append(float(d_inf(muf, sub).value))
        if d_square_cost(muf, sub) <= d_square_budget:
            report.d_square.append(float(d_square(muf, sub).value))
        else:
            report.d_square.append(None)
    return report
