"""Generalized permutons: limits of ordered selections ((n, m)-permutations)
as step measures on ``[0, lam] x [0, 1]``."""

__version__ = "0.1.0"

from .core import (
    BudgetExceededError,
    DomainError,
    GenpermError,
    JointCDF,
    OrderedSelection,
    Permutation,
    PiecewiseLinearCDF,
    ShapeError,
    StepPermuton,
    StructureError,
    TieError,
    ValidationReport,
    cdf_eval,
    quantile,
    validate_lambda_permuton,
)
from .embed import embed_permutation, embed_selection, extract_selection, k_subdivision, marginals, mu_sigma
from .metrics import d_inf, d_square
from .patterns import (
    density_in_permuton_mc,
    density_in_selection,
    density_in_step_permuton_exact,
    embedding_density_gap,
    pattern_distribution_exact,
)
from .sampling import concentration_experiment, random_pattern, random_subpermuton, sample_points
from .approx import (
    CertifiedApproximation,
    StripeDecomposition,
    approximate,
    build_stripes,
    digitize_permuton,
    interpolate_parameters,
    magnify,
    remove_white,
    shrink_and_insert_white,
    transfer_to_black,
)
from .kernels import HAVE_EXTENSION
