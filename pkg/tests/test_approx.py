from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genperm.approx import (
    approximate,
    build_stripes,
    digitize_permuton,
    insert_white,
    interpolate_parameters,
    magnify,
    rationalize_lambda,
    remove_white,
    shrink,
    shrink_and_insert_white,
    transfer_to_black,
)
from genperm.core import (
    DomainError,
    OrderedSelection,
    Permutation,
    ShapeError,
    StepPermuton,
    StructureError,
    validate_lambda_permuton,
)
from genperm.embed import embed_permutation, embed_selection, extract_selection, marginals
from genperm.metrics import d_inf

from helpers import STRIPE_SEED, doubly_stochastic, stripe_target, half_width_target

SIGMA41 = Permutation((2, 3, 6, 1, 5, 4))


def uniform_half():
    return StepPermuton([0, F(1, 2)], [0, 1], [[1]], F(1, 2))


class TestStripes:
    def test_stripe_target(self):
        st_ = build_stripes(stripe_target(), 5, 3)
        assert st_.black == [(F(1, 5), F(2, 5)), (F(3, 5), F(4, 5)), (F(4, 5), 1)]
        assert st_.white == [(0, F(1, 5)), (F(2, 5), F(3, 5))]
        assert list(st_.y_quantiles) == [0, F(1, 4), F(37, 50), 1]

    def test_uniform_square_no_white(self):
        st_ = build_stripes(StepPermuton.uniform(), 2, 2)
        assert st_.black == [(0, F(1, 2)), (F(1, 2), 1)] and st_.white == []

    def test_half_width_uniform_y(self):
        assert build_stripes(uniform_half(), 4, 2).black_rows == (2, 4)

    def test_lambda_mismatch(self):
        with pytest.raises(DomainError):
            build_stripes(stripe_target(), 4, 3)

    def test_quantiles_inside_black(self):
        for mu, N, M in [(stripe_target(), 5, 3), (half_width_target(), 8, 4),
                         (doubly_stochastic(5, 1), 7, 7)]:
            st_ = build_stripes(mu, N, M)
            for y, (lo, hi) in zip(st_.y_quantiles[1:], st_.black):
                assert lo < y <= hi
            rows = set(st_.black_rows) | set(st_.white_rows)
            assert rows == set(range(1, N + 1))


class TestTransfer:
    def test_lambda_one_own_grid_is_identity(self):
        mu = doubly_stochastic(4, 2)
        st_ = build_stripes(mu, 4, 4)
        assert transfer_to_black(mu, st_) == mu

    def test_stripe_target_mass_on_black_rows(self):
        mu = stripe_target()
        st_ = build_stripes(mu, 5, 3)
        tilde = transfer_to_black(mu, st_)
        row_mass = tilde.cell_mass.sum(axis=0)
        assert [row_mass[r] for r in (0, 2)] == [0, 0]
        assert [row_mass[r] for r in (1, 3, 4)] == [F(1, 3)] * 3
        assert validate_lambda_permuton(tilde).ok
        assert d_inf(mu, tilde).value <= F(2, 3)

    @pytest.mark.parametrize("seed", range(5))
    def test_transfer_gap_bound(self, seed):
        mu = doubly_stochastic(6, seed)
        for M in (2, 3, 6):
            st_ = build_stripes(mu, M, M)
            assert d_inf(mu, transfer_to_black(mu, st_)).value <= F(2, M)
        st_ = build_stripes(half_width_target(), 10, 5)
        assert d_inf(half_width_target(), transfer_to_black(half_width_target(), st_)).value <= F(2, 5)


class TestRemoveMagnify:
    def test_stripe_target_support(self):
        mu = stripe_target()
        st_ = build_stripes(mu, 5, 3)
        lam = remove_white(transfer_to_black(mu, st_), st_)
        assert lam.x_cuts[-1] == F(3, 5) and lam.y_cuts[-1] == F(3, 5)
        assert lam.total_mass() == 1
        Fx, Fy = marginals(lam)
        assert Fy(F(3, 10)) == F(1, 2) and Fx(F(3, 10)) == F(1, 2)
        unit = magnify(lam)
        assert unit.lam == 1 and validate_lambda_permuton(unit).ok

    def test_no_white_is_identity(self):
        mu = doubly_stochastic(3, 0)
        st_ = build_stripes(mu, 3, 3)
        assert remove_white(mu, st_) == mu

    def test_white_mass_rejected(self):
        mu = stripe_target()
        st_ = build_stripes(mu, 5, 3)
        y = [F(r, 5) for r in range(6)]
        bad = StepPermuton([0, F(3, 5)], y, [[F(1, 5)] * 5], F(3, 5))
        with pytest.raises(StructureError, match="white row 1"):
            remove_white(bad, st_)

    def test_insert_white_inverts(self):
        mu = stripe_target()
        st_ = build_stripes(mu, 5, 3)
        tilde = transfer_to_black(mu, st_)
        assert insert_white(remove_white(tilde, st_), st_) == tilde

    def test_magnify_trivial(self):
        assert magnify(StepPermuton.uniform()) == StepPermuton.uniform()
        full = StepPermuton([0, F(2, 5)], [0, F(2, 5)], [[1]], F(2, 5))
        assert magnify(full) == StepPermuton.uniform()

    def test_magnify_preserves_d_inf(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            lam = F(int(rng.integers(1, 6)), 6)
            a = shrink(doubly_stochastic(4, int(rng.integers(1000))), lam)
            b = shrink(doubly_stochastic(3, int(rng.integers(1000))), lam)
            assert d_inf(a, b).value == d_inf(magnify(a), magnify(b)).value


class TestDigitize:
    def test_stripe_target_pinned_seed(self):
        mu = stripe_target()
        st_ = build_stripes(mu, 5, 3)
        unit = magnify(remove_white(transfer_to_black(mu, st_), st_))
        sigma, eps = digitize_permuton(unit, 6, STRIPE_SEED)
        assert sigma == SIGMA41
        assert eps == d_inf(unit, embed_permutation(sigma)).value

    def test_size_one(self):
        sigma, eps = digitize_permuton(StepPermuton.uniform(), 1, 0)
        assert sigma == Permutation((1,)) and eps <= 1

    def test_diagonal(self):
        s = 12
        diag = embed_permutation(Permutation.identity(s))
        good = sum(digitize_permuton(diag, s, seed)[1] <= F(2, s) for seed in range(100))
        assert good >= 95

    def test_requires_lambda_one(self):
        with pytest.raises(DomainError):
            digitize_permuton(uniform_half(), 3, 0)


class TestShrinkInsert:
    def test_stripe_target(self):
        st_ = build_stripes(stripe_target(), 5, 3)
        beta = shrink_and_insert_white(SIGMA41, st_, 2)
        assert extract_selection(beta) == OrderedSelection(10, 6, (4, 7, 10, 3, 9, 8))

    def test_lambda_one_no_white(self):
        sigma = Permutation((3, 1, 4, 2))
        st_ = build_stripes(StepPermuton.uniform(), 2, 2)
        assert shrink_and_insert_white(sigma, st_, 2) == embed_permutation(sigma)

    def test_shape_error(self):
        st_ = build_stripes(stripe_target(), 5, 3)
        with pytest.raises(ShapeError):
            shrink_and_insert_white(SIGMA41, st_, 3)

    def test_distance_preserved(self):
        mu = stripe_target()
        st_ = build_stripes(mu, 5, 3)
        tilde = transfer_to_black(mu, st_)
        lam = remove_white(tilde, st_)
        for seed in range(5):
            sigma, _ = digitize_permuton(magnify(lam), 9, seed)
            beta = shrink_and_insert_white(sigma, st_, 3)
            assert d_inf(tilde, beta).value == d_inf(lam, shrink(embed_permutation(sigma), lam.lam)).value


class TestApproximate:
    def test_stripe_target(self):
        res = approximate(stripe_target(), 5, 3, 2, STRIPE_SEED)
        assert res.selection.values == (4, 7, 10, 3, 9, 8)
        assert res.certified

    def test_permutation_target(self):
        target = embed_permutation(Permutation((3, 1, 4, 2, 5)))
        res = approximate(target, 5, 5, 1, seed=0)
        assert res.d_inf_to_target <= res.two_over_M + res.epsilon_k

    def test_median_trend_in_k(self):
        mu = doubly_stochastic(5, 3)
        meds = [np.median([float(approximate(mu, 5, 5, k, s).d_inf_to_target) for s in range(9)])
                for k in (1, 4, 16)]
        assert meds[0] >= meds[1] >= meds[2]

    def test_rationalize(self):
        assert rationalize_lambda(0.6180339887, 100) == 62
        assert rationalize_lambda(1e-6, 10) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]), st.integers(1, 3))
def test_certificate_soundness(seed, M, k):
    mu = doubly_stochastic(4, seed % 97)
    res = approximate(mu, M, M, k, seed)
    assert res.d_inf_to_target <= res.certificate + F(1, 10**10)
    assert res.transfer_gap <= F(2, M)
    assert extract_selection(embed_selection(res.selection)) == res.selection


class TestInterpolation:
    def test_stripe_target_parameters(self):
        beta = embed_selection(approximate(stripe_target(), 5, 3, 3, STRIPE_SEED).selection)
        rep = interpolate_parameters(beta, 5, 3, 2)
        assert rep.cumulative_bound == F(13, 6)
        assert [s.phase for s in rep.steps] == ["start"] + ["a"] * 3 + ["b"] * 2
        assert rep.steps[-1].selection.n == 10 and rep.steps[-1].selection.m == 6
        assert rep.within_bounds
        for s in rep.steps:
            assert validate_lambda_permuton(s.permuton).ok

    def test_lambda_one_has_no_phase_b(self):
        mu = doubly_stochastic(4, 0)
        beta = embed_selection(approximate(mu, 4, 4, 3, 0).selection)
        rep = interpolate_parameters(beta, 4, 4, 2)
        assert {s.phase for s in rep.steps[1:]} == {"a"}
        assert rep.cumulative <= F(3, 2)

    def test_malformed_board(self):
        beta = embed_selection(OrderedSelection(9, 6, (1, 2, 3, 4, 5, 6)))
        with pytest.raises(StructureError):
            interpolate_parameters(beta, 5, 3, 2)
