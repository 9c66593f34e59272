from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genperm.core import (
    OrderedSelection,
    Permutation,
    StepPermuton,
    StructureError,
    cdf_eval,
    validate_lambda_permuton,
)
from genperm.embed import (
    KSubdivision,
    embed_permutation,
    embed_selection,
    extract_selection,
    k_subdivision,
    marginals,
    mu_sigma,
)
from genperm.metrics import rectangle_masses

from helpers import small_selection, quantile_grid, lambda_permutons


def test_small_selection_cells_and_density():
    mu = embed_selection(small_selection())
    assert mu.lam == F(3, 5)
    assert mu.active_cells() == [(0, 1), (1, 3), (2, 0)]
    assert all(mu.cell_mass[c] == F(1, 3) for c in mu.active_cells())
    assert all(mu.density()[c] == F(25, 3) for c in mu.active_cells())
    assert validate_lambda_permuton(mu).ok


def test_small_selection_y_marginal_slopes():
    _, Fy = marginals(embed_selection(small_selection()))
    probe = {F(1, 10): F(5, 3), F(3, 10): F(5, 3), F(1, 2): 0, F(7, 10): F(5, 3), F(9, 10): 0}
    eps = F(1, 100)
    for y, slope in probe.items():
        assert (cdf_eval(Fy, y + eps) - cdf_eval(Fy, y - eps)) / (2 * eps) == slope


def test_trivial_embeddings():
    one = embed_selection(OrderedSelection(1, 1, (1,)))
    assert one == StepPermuton.uniform()
    diag = embed_permutation(Permutation((1, 2)))
    assert diag.cell_mass.tolist() == [[F(1, 2), 0], [0, F(1, 2)]]
    _, Fy = marginals(embed_selection(OrderedSelection(2, 2, (2, 1))))
    assert cdf_eval(Fy, F(1, 4)) == F(1, 4) and cdf_eval(Fy, F(3, 4)) == F(3, 4)


def test_extract_roundtrip_exhaustive():
    for n in range(1, 8):
        for m in range(1, n + 1):
            for vals in permutations(range(1, n + 1), m):
                nu = OrderedSelection(n, m, vals)
                assert extract_selection(embed_selection(nu)) == nu


def test_extract_rejects_two_cells_per_column():
    mass = np.full((2, 2), F(1, 4), dtype=object)
    mu = StepPermuton([0, F(1, 2), 1], [0, F(1, 2), 1], mass, 1)
    with pytest.raises(StructureError, match="column 1"):
        extract_selection(mu)


def test_extract_accepts_float_embeddings():
    nu = OrderedSelection(7, 4, (3, 7, 1, 5))
    assert extract_selection(embed_selection(nu).to_float()) == nu


def test_uniform_marginals():
    Fx, Fy = marginals(StepPermuton.uniform())
    assert cdf_eval(Fx, F(1, 3)) == F(1, 3) and cdf_eval(Fy, F(2, 7)) == F(2, 7)


class TestSubdivision:
    def test_uniform(self):
        sub = k_subdivision(StepPermuton.uniform(), 4)
        quarters = [F(i, 4) for i in range(5)]
        assert list(sub.x_quantiles) == quarters and list(sub.y_quantiles) == quarters

    def test_quantile_grid(self):
        sub = k_subdivision(quantile_grid(), 4)
        assert list(sub.x_quantiles) == [0, F(1, 5), F(2, 5), F(3, 5), F(4, 5)]
        assert list(sub.y_quantiles) == [0, F(2, 5), F(11, 20), F(3, 4), 1]

    def test_small_selection_k3(self):
        sub = k_subdivision(embed_selection(small_selection()), 3)
        assert sub.y_quantiles[1] == F(1, 5) and sub.y_quantiles[2] == F(3, 5)

    def test_strictness_asserted(self):
        with pytest.raises(StructureError):
            KSubdivision((0, F(1, 2), F(1, 2), 1), (0, F(1, 3), F(2, 3), 1))


class TestMuSigma:
    def test_uniform_identity(self):
        mu = mu_sigma(StepPermuton.uniform(), Permutation.identity(3))
        assert all(mu.cell_mass[i, j] == (F(1, 3) if i == j else 0)
                   for i in range(3) for j in range(3))

    def test_quantile_grid_rectangles(self):
        mu = mu_sigma(quantile_grid(), Permutation((2, 3, 1, 4)))
        xs = [0, F(1, 5), F(2, 5), F(3, 5), F(4, 5)]
        ys = [0, F(2, 5), F(11, 20), F(3, 4), 1]
        R = rectangle_masses(mu, xs, ys)
        expected = {(0, 1), (1, 2), (2, 0), (3, 3)}
        for i in range(4):
            for j in range(4):
                assert R[i, j] == (F(1, 4) if (i, j) in expected else 0)

    def test_k1_collapses(self):
        mu = mu_sigma(embed_selection(small_selection()), Permutation((1,)))
        assert mu.shape == (1, 1) and mu.cell_mass[0, 0] == 1
        assert list(mu.x_cuts) == [0, F(3, 5)] and list(mu.y_cuts) == [0, 1]


@settings(max_examples=50, deadline=None)
@given(lambda_permutons(), st.data())
def test_mu_sigma_properties(mu, data):
    k = data.draw(st.integers(1, 5))
    sigma = Permutation(tuple(data.draw(st.permutations(range(1, k + 1)))))
    out = mu_sigma(mu, sigma)
    assert out.lam == mu.lam
    assert validate_lambda_permuton(out).ok
    sub = k_subdivision(mu, k)
    R = rectangle_masses(out, sub.x_quantiles, sub.y_quantiles)
    for i in range(k):
        for j in range(k):
            assert R[i, j] == (F(1, k) if sigma.values[i] == j + 1 else 0)
    # quantile fixed point
    again = k_subdivision(out, k)
    assert list(again.x_quantiles) == list(sub.x_quantiles)
    assert list(again.y_quantiles) == list(sub.y_quantiles)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 9), st.data())
def test_embedding_valid_with_exact_lambda(n, data):
    m = data.draw(st.integers(1, n))
    vals = data.draw(st.permutations(range(1, n + 1)))[:m]
    mu = embed_selection(OrderedSelection(n, m, tuple(vals)))
    assert mu.lam == F(m, n)
    assert validate_lambda_permuton(mu).ok
