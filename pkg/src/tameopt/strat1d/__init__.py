"""Univariate semialgebraic machinery: exact roots, set algebra, monotonicity, limits."""

from .algebraic import Real, between, real_roots
from .piecewise import (
    CONSTANT,
    DECREASING,
    INCREASING,
    MonotoneDecomposition,
    PiecewisePoly,
    PiecewiseRational,
    asymptotic_exponent,
    monotonicity_decomposition,
    one_sided_limit,
)
from .saset import (
    Component,
    UnivariateSASet,
    interval,
    is_normal_form,
    parse_saset,
    point,
    sa_complement,
    sa_intersect,
    sa_union,
    solve_poly_inequality,
)

__all__ = [name for name in dir() if not name.startswith("_")]
