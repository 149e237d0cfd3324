"""Selection AD, Clarke hulls, min-norm elements and LASSO strata."""

from .ad import DEFAULT_POLICY, KinkPolicy, ad_derivative, one_sided_derivatives, value_and_grad
from .chain import Curve, chain_rule_residual
from .clarke import (
    SubgradientHull,
    clarke_generators,
    dedupe,
    goldstein_hull,
    hausdorff,
    is_clarke_critical,
)
from .lasso import (
    StratumModel,
    lasso_expr,
    lasso_hull,
    lasso_value,
    riemannian_grad_lasso,
    smooth_grad,
)
from .minnorm import MinNorm, certify, min_norm_element, wolfe_min_norm

__all__ = [name for name in dir() if not name.startswith("_")]
