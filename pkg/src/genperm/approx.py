"""Constructive approximation of a lambda-permuton by ordered selections.

Pipeline for ``lam = M/N``:

1. split the y-axis into ``M`` gray stripes at the ``j/M``-quantiles of the
   y-marginal and pick, for each quantile, the ``1/N`` grid row containing
   it (black stripes; the remaining rows are white);
2. move the mass of every gray cell onto the matching black row;
3. delete the white rows and magnify ``(0, lam]^2`` to the unit square;
4. digitize the resulting permuton into a permutation of ``[M k]``;
5. shrink back and re-insert the white rows, giving an
   ``(N k, M k)``-selection.

The distance to the target is always measured, and certified against
``2/M + eps_k`` with ``eps_k`` the measured digitization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    TOL,
    DomainError,
    OrderedSelection,
    Permutation,
    ShapeError,
    StepPermuton,
    StructureError,
    quantile,
    validate_lambda_permuton,
)
from .embed import embed_permutation, embed_selection, extract_selection, marginals
from .metrics import d_inf, rectangle_masses
from .sampling import random_pattern


@dataclass(frozen=True)
class StripeDecomposition:
    N: int
    M: int
    y_quantiles: tuple            # y_0 = 0 < y_1 < ... < y_M = 1
    black_rows: tuple[int, ...]   # l_1 < ... < l_M; black stripe j is ((l_j - 1)/N, l_j/N]

    @property
    def lam(self) -> Fraction:
        return Fraction(self.M, self.N)

    @property
    def black(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(l - 1, self.N), Fraction(l, self.N)) for l in self.black_rows]

    @property
    def white_rows(self) -> list[int]:
        black = set(self.black_rows)
        return [r for r in range(1, self.N + 1) if r not in black]

    @property
    def white(self) -> list[tuple[Fraction, Fraction]]:
        """Non-empty white intervals ``(Zbar_{j-1}, Zlow_j]``."""
        out = []
        prev = 0
        for l in self.black_rows:
            if l - 1 > prev:
                out.append((Fraction(prev, self.N), Fraction(l - 1, self.N)))
            prev = l
        return out


def _check_lambda(mu: StepPermuton, N: int, M: int):
    if not 1 <= M <= N:
        raise DomainError(f"need 1 <= M <= N, got M={M}, N={N}")
    lam = Fraction(M, N)
    if mu.exact:
        ok = mu.lam == lam
    else:
        ok = abs(mu.lam - float(lam)) <= TOL
    if not ok:
        raise DomainError(f"target has lambda={mu.lam}, expected M/N = {lam}; "
                          "rationalize lambda first")


def rationalize_lambda(lam, N: int) -> int:
    """``M = round(lam * N)`` (at least 1), the pipeline's rational
    stand-in for an arbitrary ``lam``."""
    return max(1, min(N, round(lam * N)))


def build_stripes(mu_target: StepPermuton, N: int, M: int, validate: bool = True) -> StripeDecomposition:
    _check_lambda(mu_target, N, M)
    if validate:
        report = validate_lambda_permuton(mu_target)
        if not report.ok:
            raise StructureError(f"target is not a lambda-permuton: {report.violations[0]}")
    _, Fy = marginals(mu_target)
    exact = mu_target.exact
    ys = [Fraction(0) if exact else 0.0]
    for j in range(1, M):
        ys.append(quantile(Fy, Fraction(j, M) if exact else j / M))
    ys.append(Fraction(1) if exact else 1.0)
    rows = []
    for y in ys[1:]:
        l = math.ceil(N * y) if exact else math.ceil(N * y - 1e-9)
        rows.append(max(l, 1))
    for j in range(1, M):
        if rows[j] <= rows[j - 1]:
            raise StructureError(
                f"black stripes {j} and {j + 1} coincide (row {rows[j]}); "
                "the y-marginal is steeper than 1/lambda")
    return StripeDecomposition(N, M, tuple(ys), tuple(rows))


def _zero_matrix(shape, exact):
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def transfer_to_black(mu_target: StepPermuton, stripes: StripeDecomposition) -> StepPermuton:
    """Spread the mass of each gray cell uniformly over the same column
    inside its black stripe; white rows end up empty."""
    N, M = stripes.N, stripes.M
    exact = mu_target.exact
    xs = [Fraction(i, N) for i in range(M + 1)]
    if not exact:
        xs = [float(v) for v in xs]
    R = rectangle_masses(mu_target, xs, list(stripes.y_quantiles))
    mass = _zero_matrix((M, N), exact)
    for j, l in enumerate(stripes.black_rows):
        mass[:, l - 1] = R[:, j]
    y_cuts = [Fraction(r, N) for r in range(N + 1)]
    return StepPermuton(xs, y_cuts if exact else [float(v) for v in y_cuts], mass, mu_target.lam)


def _check_row_grid(mu: StepPermuton, rows: int, N: int):
    expected = [Fraction(r, N) for r in range(rows + 1)]
    if len(mu.y_cuts) != rows + 1 or any(
            abs(float(a) - float(b)) > TOL for a, b in zip(mu.y_cuts, expected)):
        raise StructureError(f"expected the y-grid 0, 1/{N}, ..., {rows}/{N}")


def remove_white(mu_tilde: StepPermuton, stripes: StripeDecomposition) -> StepPermuton:
    """Delete the white rows, stacking the black stripes onto ``(0, lam]``."""
    N, M = stripes.N, stripes.M
    _check_row_grid(mu_tilde, N, N)
    tol = 0 if mu_tilde.exact else TOL
    for r in stripes.white_rows:
        w = mu_tilde.cell_mass[:, r - 1].sum()
        if abs(w) > tol:
            raise StructureError(f"white row {r} carries mass {w}")
    idx = [l - 1 for l in stripes.black_rows]
    y_cuts = [Fraction(r, N) for r in range(M + 1)]
    if not mu_tilde.exact:
        y_cuts = [float(v) for v in y_cuts]
    return StepPermuton(mu_tilde.x_cuts, y_cuts, mu_tilde.cell_mass[:, idx], mu_tilde.lam)


def insert_white(mu_lambda: StepPermuton, stripes: StripeDecomposition) -> StepPermuton:
    """Inverse of :func:`remove_white` on the ``1/N`` row grid."""
    N, M = stripes.N, stripes.M
    _check_row_grid(mu_lambda, M, N)
    mass = _zero_matrix((mu_lambda.shape[0], N), mu_lambda.exact)
    for j, l in enumerate(stripes.black_rows):
        mass[:, l - 1] = mu_lambda.cell_mass[:, j]
    y_cuts = [Fraction(r, N) for r in range(N + 1)]
    if not mu_lambda.exact:
        y_cuts = [float(v) for v in y_cuts]
    return StepPermuton(mu_lambda.x_cuts, y_cuts, mass, mu_lambda.lam)


def magnify(mu_lambda: StepPermuton) -> StepPermuton:
    """Push forward under ``(x, y) -> (x/lam, y/lam)``."""
    lam = mu_lambda.lam
    tol = 0 if mu_lambda.exact else TOL
    if mu_lambda.y_cuts[-1] > lam + tol or mu_lambda.x_cuts[-1] > lam + tol:
        raise DomainError("support is not inside (0, lambda]^2")
    return StepPermuton(mu_lambda.x_cuts / lam, mu_lambda.y_cuts / lam,
                        mu_lambda.cell_mass, lam / lam)


def shrink(permuton: StepPermuton, lam) -> StepPermuton:
    """Push forward under ``(x, y) -> (lam x, lam y)``."""
    return StepPermuton(permuton.x_cuts * lam, permuton.y_cuts * lam, permuton.cell_mass, lam)


def digitize_permuton(permuton: StepPermuton, size: int, seed: int):
    """A permutation of ``[size]`` drawn as the mu-random permutation, and
    the measured ``eps = d_inf(permuton, embedding of it)``."""
    if size < 1:
        raise DomainError("size must be positive")
    if permuton.lam != 1:
        raise DomainError("digitization needs a permuton with lambda = 1")
    sigma = random_pattern(permuton, size, seed)
    eps = d_inf(permuton, embed_permutation(sigma)).value
    return sigma, eps


def insert_white_selection(sigma: Permutation, stripes: StripeDecomposition, k: int) -> OrderedSelection:
    """The ``(N k, M k)``-selection obtained by spreading the ``M k`` rows of
    ``sigma`` over the black stripes, ``k`` rows per stripe."""
    N, M = stripes.N, stripes.M
    if sigma.k != M * k:
        raise ShapeError(f"|sigma| = {sigma.k} but M*k = {M * k}")
    values = []
    for r in sigma.values:
        b, s = divmod(r - 1, k)
        values.append((stripes.black_rows[b] - 1) * k + s + 1)
    return OrderedSelection(N * k, M * k, tuple(values))


def shrink_and_insert_white(sigma: Permutation, stripes: StripeDecomposition, k: int) -> StepPermuton:
    return embed_selection(insert_white_selection(sigma, stripes, k))


@dataclass(frozen=True)
class CertifiedApproximation:
    selection: OrderedSelection
    d_inf_to_target: object
    two_over_M: Fraction
    epsilon_k: object
    sigma: Permutation = None
    stripes: StripeDecomposition = None
    transfer_gap: object = None     # measured d_inf(target, transferred)

    @property
    def certificate(self):
        return self.two_over_M + self.epsilon_k

    @property
    def certified(self) -> bool:
        return self.d_inf_to_target <= self.certificate + 1e-10

    def to_record(self) -> dict:
        return {
            "n": self.selection.n,
            "m": self.selection.m,
            "values": list(self.selection.values),
            "d_inf_to_target": self.d_inf_to_target,
            "bound_components": {"two_over_M": self.two_over_M, "epsilon_k": self.epsilon_k},
            "certificate": self.certificate,
            "certified": self.certified,
            "transfer_gap": self.transfer_gap,
            "sigma": list(self.sigma.values) if self.sigma else None,
            "black_rows": list(self.stripes.black_rows) if self.stripes else None,
        }


def approximate(mu_target: StepPermuton, N: int, M: int, k: int, seed: int,
                validate: bool = True) -> CertifiedApproximation:
    if k < 1:
        raise DomainError("k must be positive")
    stripes = build_stripes(mu_target, N, M, validate=validate)
    tilde = transfer_to_black(mu_target, stripes)
    unit = magnify(remove_white(tilde, stripes))
    sigma, eps = digitize_permuton(unit, M * k, seed)
    beta = shrink_and_insert_white(sigma, stripes, k)
    return CertifiedApproximation(
        selection=extract_selection(beta),
        d_inf_to_target=d_inf(mu_target, beta).value,
        two_over_M=Fraction(2, M),
        epsilon_k=eps,
        sigma=sigma,
        stripes=stripes,
        transfer_gap=d_inf(mu_target, tilde).value,
    )


# -- interpolation between consecutive approximations ----------------------

@dataclass(frozen=True)
class InterpolationStep:
    phase: str                 # "start" | "a" | "b"
    selection: OrderedSelection
    permuton: StepPermuton
    d_inf_step: object         # to the previous intermediate
    bound: object


@dataclass
class InterpolationReport:
    N: int
    M: int
    k: int
    steps: list = field(default_factory=list)
    cumulative: object = None       # d_inf(first, last)
    cumulative_bound: object = None
    path_length: object = None      # sum of step distances

    @property
    def within_bounds(self) -> bool:
        steps_ok = all(s.d_inf_step <= s.bound for s in self.steps[1:])
        return steps_ok and self.cumulative <= self.cumulative_bound

    def to_records(self) -> list[dict]:
        return [{
            "phase": s.phase, "n": s.selection.n, "m": s.selection.m,
            "lambda": s.permuton.lam, "values": list(s.selection.values),
            "d_inf_step": s.d_inf_step, "bound": s.bound,
        } for s in self.steps]


def _drop_column(nu: OrderedSelection) -> OrderedSelection:
    v = nu.values[-1]
    vals = tuple(x - 1 if x > v else x for x in nu.values[:-1])
    return OrderedSelection(nu.n - 1, nu.m - 1, vals)


def _drop_empty_row(nu: OrderedSelection) -> OrderedSelection:
    used = set(nu.values)
    r = max(x for x in range(1, nu.n + 1) if x not in used)
    vals = tuple(x - 1 if x > r else x for x in nu.values)
    return OrderedSelection(nu.n - 1, nu.m, vals)


def interpolate_parameters(beta_next: StepPermuton, N: int, M: int, k: int) -> InterpolationReport:
    """Walk from an embedding in ``W_{N(k+1), M(k+1)}`` down to
    ``W_{Nk, Mk}``.

    Phase a removes the black square of the rightmost column ``M`` times
    (its row and column are deleted and the remaining squares renormalised);
    phase b removes the topmost empty row ``N - M`` times.  Every step is
    measured exactly against its bound.
    """
    if k < 1 or not 1 <= M <= N:
        raise DomainError("need k >= 1 and 1 <= M <= N")
    nu = extract_selection(beta_next)
    if nu.n != N * (k + 1) or nu.m != M * (k + 1):
        raise StructureError(
            f"board is {nu.n} x {nu.m}, expected {N * (k + 1)} x {M * (k + 1)}")
    report = InterpolationReport(N, M, k)
    start = embed_selection(nu)
    report.steps.append(InterpolationStep("start", nu, start, Fraction(0), Fraction(0)))
    prev = start
    path = Fraction(0)
    plan = [("a", _drop_column, Fraction(3, M * k))] * M + \
           [("b", _drop_empty_row, Fraction(2, M * k))] * (N - M)
    for phase, move, bound in plan:
        nu = move(nu)
        cur = embed_selection(nu)
        step = d_inf(prev, cur).value
        path += step
        report.steps.append(InterpolationStep(phase, nu, cur, step, bound))
        prev = cur
    report.cumulative = d_inf(start, prev).value
    report.cumulative_bound = Fraction(2 * N + M, M * k)
    report.path_length = path
    return report
