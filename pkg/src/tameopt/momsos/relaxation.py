"""Moment relaxations of polynomial programs and the bound sequence ``f_d``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from ..errors import OrderTooSmall
from .polyprog import GridResult, PolyProgram, grid_minimum, monomials, poly_degree, poly_eval
from .sdp import OPTIMAL, SDPProblem, SDPResult, solve_sdp

RANK_TOL = 1e-6


@dataclass
class MomentRelaxation:
    """Order-``d`` relaxation: ``M_d(y)`` and localizing matrices as one SDP.

    The moments ``y_alpha`` with ``|alpha| <= 2d`` are listed in ``moments``
    (graded-lex); ``y_0 = 1`` is substituted, and the remaining moments are
    the dual variables of ``sdp``, so ``sdp.slack(y)`` is the block-diagonal
    matrix ``diag(M_d(y), M_{d-d_1}(g_1 y), ...)``.
    """

    program: PolyProgram
    order: int
    basis: list
    moments: list
    index: dict
    moment_index: np.ndarray  # M_d(y)[i, j] = y[moment_index[i, j]]
    localizing: list  # (g, d_g, basis_g) per constraint
    sdp: SDPProblem
    f0: float
    c: np.ndarray = field(repr=False)

    @property
    def basis_size(self) -> int:
        return len(self.basis)

    def full_moments(self, y) -> np.ndarray:
        return np.concatenate([[1.0], np.asarray(y, dtype=float)])

    def moment_matrix(self, y) -> np.ndarray:
        return self.full_moments(y)[self.moment_index]

    def localizing_matrix(self, k: int, y) -> np.ndarray:
        g, _, basis_g = self.localizing[k]
        yy = self.full_moments(y)
        s = len(basis_g)
        L = np.zeros((s, s))
        for i, a in enumerate(basis_g):
            for j, b in enumerate(basis_g):
                L[i, j] = sum(c * yy[self.index[_add(a, b, e)]] for e, c in g.items())
        return L

    def value(self, y) -> float:
        return float(self.f0 + self.c @ y)


def _add(*es):
    return tuple(sum(v) for v in zip(*es))


def build_relaxation(prog: PolyProgram, d: int) -> MomentRelaxation:
    """Moment relaxation of order ``d``: ``min sum f_a y_a`` s.t. ``M_d(y), M_{d-d_g}(g y) >= 0``, ``y_0 = 1``."""
    gs = prog.all_constraints()
    if 2 * d < poly_degree(prog.objective) or any(2 * d < poly_degree(g) for g in gs):
        raise OrderTooSmall(f"order {d} is below half the largest degree ({prog.degree})")
    n = prog.n
    basis = monomials(n, d)
    moments = monomials(n, 2 * d)
    index = {e: i for i, e in enumerate(moments)}
    m = len(moments) - 1
    s = len(basis)
    moment_index = np.array([[index[_add(a, b)] for b in basis] for a in basis])

    # B[k] is the coefficient matrix of y_k in the block-diagonal slack
    block_sizes = [s]
    pieces: list[list[np.ndarray]] = [[np.zeros((s, s)) for _ in range(m + 1)]]
    for i in range(s):
        for j in range(s):
            pieces[0][moment_index[i, j]][i, j] += 1.0
    localizing = []
    for g in gs:
        dg = math.ceil(poly_degree(g) / 2)
        basis_g = monomials(n, d - dg)
        sg = len(basis_g)
        blk = [np.zeros((sg, sg)) for _ in range(m + 1)]
        for i, a in enumerate(basis_g):
            for j, b in enumerate(basis_g):
                for e, c in g.items():
                    blk[index[_add(a, b, e)]][i, j] += c
        pieces.append(blk)
        block_sizes.append(sg)
        localizing.append((g, dg, basis_g))

    def assemble(k):
        return block_diag(*[p[k] for p in pieces])

    C = assemble(0)
    A = np.array([-assemble(k) for k in range(1, m + 1)])
    cvec = np.zeros(m)
    f0 = 0.0
    for e, c in prog.objective.items():
        if sum(e) == 0:
            f0 += c
        else:
            cvec[index[e] - 1] += c
    sdp = SDPProblem(tuple(block_sizes), C, A, -cvec)
    return MomentRelaxation(prog, d, basis, moments, index, moment_index, localizing, sdp, f0, cvec)


@dataclass
class RelaxationResult:
    relaxation: MomentRelaxation
    sdp: SDPResult
    value: float
    moments: np.ndarray

    @property
    def status(self) -> str:
        return self.sdp.status


def solve_relaxation(relax: MomentRelaxation, tol: float = 1e-9) -> RelaxationResult:
    res = solve_sdp(relax.sdp, tol=tol)
    value = relax.f0 - res.dual
    return RelaxationResult(relax, res, value, relax.full_moments(res.y))


@dataclass
class Extraction:
    x: np.ndarray
    certified: bool
    rank_one: bool
    gap: float
    message: str = ""


def extract_minimizer(result: RelaxationResult) -> Extraction:
    """First-order moments as a candidate minimiser.

    Certified when ``M_d(y)`` is numerically rank one (second eigenvalue at
    most ``1e-6`` times the trace) and the candidate's value is within
    ``1e-4`` of the bound. A constant objective makes the certificate
    vacuous: any feasible point is optimal.
    """
    relax = result.relaxation
    n = relax.program.n
    y = result.moments
    x = np.array([y[relax.index[tuple(int(i == j) for i in range(n))]] for j in range(n)])
    ev = np.sort(np.linalg.eigvalsh(relax.moment_matrix(y[1:])))[::-1]
    rank_one = len(ev) < 2 or ev[1] <= RANK_TOL * max(ev.sum(), 1e-300)
    gap = float(poly_eval(relax.program.objective, x) - result.value)
    certified = bool(rank_one and gap <= 1e-4)
    msg = ""
    if not rank_one:
        msg = "moment matrix has rank > 1; the optimum may not be unique and x is uncertified"
        warnings.warn(msg, stacklevel=2)
    elif not certified:
        msg = f"rank-one moment matrix but f(x) - f_d = {gap:.3g} exceeds 1e-4"
    return Extraction(x, certified, bool(rank_one), gap, msg)


@dataclass
class BoundSequence:
    orders: list
    values: list
    results: list
    grid: GridResult | None
    monotone: bool
    below_grid: bool
    tol: float

    def table(self) -> list[tuple[int, float, str]]:
        return [(d, v, r.status) for d, v, r in zip(self.orders, self.values, self.results)]


def bound_sequence(
    prog: PolyProgram,
    d_max: int,
    tol: float = 1e-6,
    grid_points: int = 10**6,
    d_min: int | None = None,
) -> BoundSequence:
    """Values ``f_d`` for ``d = d_min .. d_max`` with monotonicity and grid checks.

    ``d_min`` defaults to the smallest admissible order. The report flags
    whether ``f_d <= f_{d+1} + 2 tol`` throughout and whether the last
    value stays below the grid upper bound plus ``tol``.
    """
    d0 = prog.min_order() if d_min is None else d_min
    orders, values, results = [], [], []
    for d in range(d0, d_max + 1):
        r = solve_relaxation(build_relaxation(prog, d))
        orders.append(d)
        values.append(r.value)
        results.append(r)
    monotone = all(a <= b + 2 * tol for a, b in zip(values, values[1:]))
    grid = None
    below = True
    try:
        grid = grid_minimum(prog, grid_points)
        below = bool(values[-1] <= grid.value + tol) if values else True
    except ValueError:
        pass
    return BoundSequence(orders, values, results, grid, monotone, below, tol)
