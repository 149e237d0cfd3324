"""Moment relaxations of small polynomial programs and an embedded SDP solver."""

from .polyprog import (
    GridResult,
    PolyProgram,
    auto_ball,
    grid_minimum,
    monomials,
    n_monomials,
    poly_degree,
    poly_eval,
    poly_from_terms,
)
from .relaxation import (
    BoundSequence,
    Extraction,
    MomentRelaxation,
    RelaxationResult,
    bound_sequence,
    build_relaxation,
    extract_minimizer,
    solve_relaxation,
)
from .sdp import INFEASIBLE, MAX_ITER_STATUS, OPTIMAL, SDPProblem, SDPResult, solve_sdp

__all__ = [name for name in dir() if not name.startswith("_")]
