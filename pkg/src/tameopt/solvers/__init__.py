"""Subgradient, proximal and quasi-Newton methods with convergence diagnostics."""

from .diagnostics import (
    NEVER,
    DiagnosticReport,
    LimitPoint,
    detect_stratum_identification,
    diagnose_trajectory,
    longest_zero_run,
    tail_clusters,
)
from .instances import DEFAULT_LASSO, LassoInstance, load_lasso
from .noise import NoiseModel
from .nsbfgs import nsbfgs_run, weak_wolfe
from .prox import lipschitz_step, prox_grad_run, soft_threshold
from .sard import (
    lasso_critical_points,
    lasso_critical_values,
    pwaffine_critical_values,
    pwaffine_expr,
    pwaffine_value,
)
from .schedule import ScheduleVerdict, StepSchedule, validate_schedule
from .ssm import DIVERGENCE_BOUND, ssm_run
from .trajectory import Trajectory, read_csv

__all__ = [name for name in dir() if not name.startswith("_")]
