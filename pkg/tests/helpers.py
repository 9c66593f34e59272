"""Shared fixtures and generators for the test suite."""

from __future__ import annotations

from fractions import Fraction as F
from itertools import permutations, product

import numpy as np
from hypothesis import strategies as st

from genperm.core import OrderedSelection, Permutation, StepPermuton, perm_rank
from genperm.embed import embed_selection
from genperm.metrics import joint_cdf_eval


def small_selection() -> OrderedSelection:
    return OrderedSelection(5, 3, (2, 4, 1))


def quantile_grid() -> StepPermuton:
    """lambda = 4/5, uniform 4 x 4 masses on quantile cuts .4/.55/.75."""
    x = [F(0), F(1, 5), F(2, 5), F(3, 5), F(4, 5)]
    y = [F(0), F(2, 5), F(11, 20), F(3, 4), F(1)]
    mass = np.full((4, 4), F(1, 16), dtype=object)
    return StepPermuton(x, y, mass, F(4, 5))


def stripe_target() -> StepPermuton:
    """lambda = 3/5 target whose y-marginal has 1/3, 2/3 quantiles .25 and .74."""
    x = [F(0), F(1, 5), F(2, 5), F(3, 5)]
    y = [F(0), F(1, 4), F(37, 50), F(1)]
    mass = np.array([[F(2, 9), F(1, 9), F(0)],
                     [F(1, 9), F(0), F(2, 9)],
                     [F(0), F(2, 9), F(1, 9)]], dtype=object)
    return StepPermuton(x, y, mass, F(3, 5))


STRIPE_SEED = 69   # digitizes the stripe target to (2,3,6,1,5,4) at size 6


def half_width_target() -> StepPermuton:
    """lambda = 1/2 with a non-uniform y-marginal of slope <= 2."""
    x = [F(0), F(1, 4), F(1, 2)]
    y = [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
    mass = np.array([[F(1, 4), F(1, 8), F(0), F(1, 8)],
                     [F(1, 8), F(0), F(1, 8), F(1, 4)]], dtype=object)
    return StepPermuton(x, y, mass, F(1, 2))


def doubly_stochastic(n: int, seed: int, swaps: int = 40) -> StepPermuton:
    """A lambda = 1 step permuton on the uniform n-grid: an average of
    random permutation matrices, kept exact."""
    rng = np.random.default_rng(seed)
    counts = np.zeros((n, n), dtype=np.int64)
    for _ in range(swaps):
        counts[np.arange(n), rng.permutation(n)] += 1
    mass = np.empty((n, n), dtype=object)
    for idx, c in np.ndenumerate(counts):
        mass[idx] = F(int(c), swaps * n)
    cuts = [F(i, n) for i in range(n + 1)]
    return StepPermuton(cuts, cuts, mass, F(1))


def random_cuts(rng, cells: int, top=F(1), den: int = 60):
    inner = sorted(set(int(v) for v in rng.integers(1, den, size=cells - 1)))
    return [F(0)] + [F(v, den) * top for v in inner] + [top]


def random_measure(rng, max_cells: int = 20, lam=None) -> StepPermuton:
    """An exact probability step measure on a random rational grid.

    With ``lam`` given the x-marginal is uniform on ``[0, lam]`` (so the
    measure has the lambda-permuton x-structure); rows are unconstrained.
    """
    P = int(rng.integers(1, max_cells + 1))
    Q = int(rng.integers(1, max_cells + 1))
    xs = random_cuts(rng, P, lam if lam is not None else F(1))
    ys = random_cuts(rng, Q)
    w = rng.integers(0, 6, size=(len(xs) - 1, len(ys) - 1))
    w[:, 0] += 1
    mass = np.empty(w.shape, dtype=object)
    if lam is None:
        tot = int(w.sum())
        for idx, v in np.ndenumerate(w):
            mass[idx] = F(int(v), tot)
    else:
        widths = np.diff(xs)
        for i in range(w.shape[0]):
            row = int(w[i].sum())
            for j in range(w.shape[1]):
                mass[i, j] = F(int(w[i, j]), row) * widths[i] / lam
    return StepPermuton(xs, ys, mass, lam if lam is not None else xs[-1])


def random_selection(rng, n_max: int = 20) -> OrderedSelection:
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, n + 1))
    vals = tuple(int(v) + 1 for v in rng.choice(n, m, replace=False))
    return OrderedSelection(n, m, vals)


@st.composite
def selections(draw, n_max: int = 8):
    n = draw(st.integers(1, n_max))
    m = draw(st.integers(1, n))
    vals = draw(st.permutations(range(1, n + 1)))[:m]
    return OrderedSelection(n, m, tuple(vals))


@st.composite
def step_measures(draw, max_cells: int = 5):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_measure(np.random.default_rng(seed), max_cells)


@st.composite
def lambda_permutons(draw, max_n: int = 6):
    """Embeddings of selections and mixtures of them on a common board
    (all genuine lambda-permutons, exact)."""
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, n))
    parts = draw(st.integers(1, 3))
    mass = np.empty((m, n), dtype=object)
    mass.fill(F(0))
    for _ in range(parts):
        vals = draw(st.permutations(range(n)))[:m]
        for h, v in enumerate(vals):
            mass[h, v] += F(1, m * parts)
    return StepPermuton([F(i, n) for i in range(m + 1)], [F(j, n) for j in range(n + 1)],
                        mass, F(m, n))


# -- independent oracles ---------------------------------------------------

def rectangle_oracle(mu1: StepPermuton, mu2: StepPermuton):
    """Max |mu1(R) - mu2(R)| over all rectangles with sides on the union
    grid, from corner tables of the directly summed joint CDFs."""
    X = sorted(set(mu1.x_cuts.tolist()) | set(mu2.x_cuts.tolist()))
    Y = sorted(set(mu1.y_cuts.tolist()) | set(mu2.y_cuts.tolist()))
    G = [[joint_cdf_eval(mu1, x, y) - joint_cdf_eval(mu2, x, y) for y in Y] for x in X]
    best = 0
    for a in range(len(X)):
        for b in range(a + 1, len(X)):
            for c in range(len(Y)):
                for d in range(c + 1, len(Y)):
                    v = abs(G[b][d] - G[a][d] - G[b][c] + G[a][c])
                    if v > best:
                        best = v
    return best


def pattern_oracle(mu: StepPermuton, k: int) -> dict:
    """``t(tau, mu)`` for all tau of length k by brute force: every ordered
    k-tuple of cells, and for each the share of coordinate orders (among all
    k! x k!) compatible with the cell positions."""
    cells = [(i, j) for i in range(mu.shape[0]) for j in range(mu.shape[1])
             if mu.cell_mass[i, j] != 0]
    out = {}
    orders = list(permutations(range(k)))
    for tup in product(cells, repeat=k):
        w = F(1)
        for c in tup:
            w *= mu.cell_mass[c]
        cols = [c[0] for c in tup]
        rows = [c[1] for c in tup]

        def ok(order, key):
            return all(key[order[a]] <= key[order[a + 1]] for a in range(k - 1))

        xo = [o for o in orders if ok(o, cols)]
        yo = [o for o in orders if ok(o, rows)]
        share = F(1, len(xo) * len(yo))
        for ox in xo:
            yrank = [0] * k
            for oy in yo:
                for r, p in enumerate(oy):
                    yrank[p] = r + 1
                tau = tuple(yrank[p] for p in ox)
                out[tau] = out.get(tau, F(0)) + w * share
    return out


def oracle_vector(mu: StepPermuton, k: int) -> list:
    d = pattern_oracle(mu, k)
    vec = [F(0)] * len(list(permutations(range(k))))
    for tau, v in d.items():
        vec[perm_rank(tau)] = v
    return vec


def selection_density_oracle(tau: Permutation, nu: OrderedSelection) -> F:
    from itertools import combinations
    hits = total = 0
    for idx in combinations(range(nu.m), tau.k):
        vals = [nu.values[i] for i in idx]
        srt = sorted(vals)
        total += 1
        hits += tuple(srt.index(v) + 1 for v in vals) == tau.values
    return F(hits, total)
