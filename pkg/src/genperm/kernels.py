"""Kernel selection: the compiled extension when importable, else NumPy.

Set ``GENPERM_PURE_PYTHON=1`` to force the fallback.
"""

import os

HAVE_EXTENSION = False

if not os.environ.get("GENPERM_PURE_PYTHON"):
    try:
        from ._kernels import cdf_gap, max_rect_discrepancy, pattern_counts
        HAVE_EXTENSION = True
    except ImportError:  # extension not built
        pass

if not HAVE_EXTENSION:
    from ._pykernels import cdf_gap, max_rect_discrepancy, pattern_counts

from . import _pykernels as python  # noqa: E402  (always available for benchmarks/tests)

__all__ = ["HAVE_EXTENSION", "cdf_gap", "max_rect_discrepancy", "pattern_counts", "python"]
