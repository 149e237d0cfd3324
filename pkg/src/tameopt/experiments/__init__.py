"""Desk-scale experiments behind the command-line interface."""

from .config import RunConfig, csv_text, load_config_file, write_csv
from .lasso_compare import METHODS, MethodResult, lasso_compare, path_figure, run_method
from .relu_activity import (
    CellResult,
    ReluActivityReport,
    binomial_interval,
    count_hits,
    relu_activity,
)
from .svg import Figure

__all__ = [name for name in dir() if not name.startswith("_")]
