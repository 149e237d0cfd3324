import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tameopt.errors import DimensionError, OrderTooSmall, ParseError
from tameopt.momsos import (
    INFEASIBLE,
    OPTIMAL,
    PolyProgram,
    SDPProblem,
    bound_sequence,
    build_relaxation,
    extract_minimizer,
    grid_minimum,
    monomials,
    n_monomials,
    poly_eval,
    solve_relaxation,
    solve_sdp,
)
from tameopt.suite import random_polyprog

INTERVAL = {(0,): 1.0, (2,): -1.0}  # 1 - x^2 >= 0


def prog1(objective, **kw):
    return PolyProgram(1, objective, [INTERVAL], **kw)


# programs and the text format ------------------------------------------------------

def test_graded_lex_order():
    assert monomials(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert monomials(1, 3) == [(0,), (1,), (2,), (3,)]


@pytest.mark.parametrize("n,d", [(1, 1), (1, 3), (2, 2), (2, 3), (3, 2)])
def test_basis_size_is_binomial(n, d):
    prog = PolyProgram(n, {tuple([2] + [0] * (n - 1)): 1.0}, [], ball=1.0)
    relax = build_relaxation(prog, d)
    assert relax.basis_size == math.comb(n + d, n) == n_monomials(n, d)
    assert len(relax.moments) == math.comb(n + 2 * d, n)


def test_program_json_roundtrip(tmp_path):
    p = PolyProgram(2, {(2, 0): 1.0, (1, 1): -0.5, (0, 0): 3.0}, [{(0, 0): 1.0, (0, 2): -1.0}], ball=2.0, box=1.5)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_dict()))
    q = PolyProgram.load(path)
    assert q.objective == p.objective and q.constraints == p.constraints and q.ball == 2.0 and q.box == 1.5


def test_program_validation():
    with pytest.raises(DimensionError):
        PolyProgram(4, {(0, 0, 0, 0): 1.0})
    with pytest.raises(DimensionError):
        PolyProgram(1, {(5,): 1.0})
    with pytest.raises(DimensionError):
        PolyProgram(2, {(1,): 1.0})
    with pytest.raises(ParseError):
        PolyProgram.load({"n": 1, "objective": [[1.0, [1, 0]]]})
    with pytest.raises(ParseError):
        PolyProgram.load({"objective": []})


def test_auto_ball_uses_grid_minimiser():
    p = PolyProgram.load({"n": 1, "objective": [[-2.0, [1]], [1.0, [2]]], "box": 3.0, "ball": "auto"})
    assert p.ball == pytest.approx(2.0, abs=1e-3)  # 1 + |x*|^2 with x* = 1


# relaxation layout ----------------------------------------------------------------

def test_order_one_layout_by_hand():
    relax = build_relaxation(prog1({(2,): 1.0}), 1)
    y = np.array([0.3, 0.5])  # y1, y2
    np.testing.assert_array_equal(relax.moment_matrix(y), [[1.0, 0.3], [0.3, 0.5]])
    np.testing.assert_array_equal(relax.localizing_matrix(0, y), [[0.5]])  # 1 - y2
    assert relax.value(y) == 0.5
    # the slack of the embedded SDP is diag(M_1(y), 1 - y2)
    np.testing.assert_allclose(relax.sdp.slack(y), [[1.0, 0.3, 0.0], [0.3, 0.5, 0.0], [0.0, 0.0, 0.5]])
    assert relax.full_moments(y)[0] == 1.0


def test_order_too_small():
    with pytest.raises(OrderTooSmall):
        build_relaxation(prog1({(4,): 1.0}), 1)
    with pytest.raises(OrderTooSmall):
        build_relaxation(PolyProgram(1, {(1,): 1.0}, [{(0,): 1.0, (3,): -1.0}]), 1)


# SDP solver -------------------------------------------------------------------------

def test_diagonal_sdp_value_is_dimension():
    k = 4
    # min tr X s.t. X_ii = 1
    A = []
    for i in range(k):
        E = np.zeros((k, k))
        E[i, i] = 1.0
        A.append(E)
    res = solve_sdp(SDPProblem((k,), np.eye(k), np.array(A), np.ones(k)))
    assert res.status == OPTIMAL and res.value == pytest.approx(k, abs=1e-7)


def test_infeasible_toy():
    one = np.array([[1.0]])
    res = solve_sdp(SDPProblem((1,), one, np.array([one, one]), np.array([1.0, 2.0])))
    assert res.status == INFEASIBLE


def test_conic_infeasibility_is_certified_by_rays():
    # X_11 = -1 has no PSD solution; the dual ray y -> -inf proves it
    res = solve_sdp(SDPProblem((1,), np.array([[1.0]]), np.array([[[1.0]]]), np.array([-1.0])))
    assert res.status == INFEASIBLE
    # min -tr X with only X_12 = 0 fixed is unbounded below
    res = solve_sdp(SDPProblem((2,), -np.eye(2), np.array([[[0.0, 1.0], [1.0, 0.0]]]), np.array([0.0])))
    assert res.status == INFEASIBLE


def test_two_by_two_sdp_against_eigenvalue_oracle():
    # min <C, X> s.t. tr X = 1 has value lambda_min(C)
    rng = np.random.default_rng(4)
    M = rng.normal(size=(3, 3))
    C = M + M.T
    res = solve_sdp(SDPProblem((3,), C, np.eye(3)[None], np.array([1.0])))
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(np.linalg.eigvalsh(C)[0], abs=1e-7)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_optimal_solutions_satisfy_residual_bounds(seed):
    prog = random_polyprog(np.random.default_rng(seed), n=2, degree=4)
    r = solve_relaxation(build_relaxation(prog, 2))
    assert r.status == OPTIMAL
    res = r.sdp.residuals
    assert res["primal"] <= 1e-8 and res["gap"] <= 1e-8 * max(1.0, abs(r.value))
    relax = r.relaxation
    assert np.linalg.eigvalsh(relax.moment_matrix(r.moments[1:])).min() >= -1e-8
    assert np.linalg.eigvalsh(relax.sdp.slack(r.sdp.y)).min() >= -1e-8


def test_block_size_limits():
    with pytest.raises(ValueError):
        SDPProblem((51,), np.eye(51), np.eye(51)[None], np.ones(1))
    with pytest.raises(ValueError):
        SDPProblem((2,), np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2)[None], np.ones(1))


# bound sequence and extraction ---------------------------------------------------

def test_convex_example_is_exact_at_order_one():
    r = solve_relaxation(build_relaxation(prog1({(2,): 1.0}), 1))
    assert r.status == OPTIMAL and abs(r.value) <= 1e-6
    ex = extract_minimizer(r)
    assert ex.certified and abs(ex.x[0]) < 1e-4


def test_concave_example_splits_mass():
    bs = bound_sequence(prog1({(2,): -1.0}), 2)
    for v in bs.values:
        assert v == pytest.approx(-1.0, abs=1e-5)
    assert bs.grid.value == pytest.approx(-1.0, abs=1e-9)
    with pytest.warns(UserWarning, match="rank"):
        ex = extract_minimizer(bs.results[-1])
    assert not ex.certified and not ex.rank_one


def test_quartic_example():
    bs = bound_sequence(prog1({(4,): 1.0, (2,): -1.0}), 3)
    assert bs.orders == [2, 3]
    assert bs.values[0] == pytest.approx(-0.25, abs=1e-4)
    assert bs.grid.value == pytest.approx(-0.25, abs=1e-9)
    assert np.abs(bs.grid.point[0]) == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert bs.monotone and bs.below_grid


def test_higher_order_on_nearly_singular_iterates():
    # order 3 drives the Gram and moment iterates close to singular together
    prog = PolyProgram(2, {(4, 0): 1.0, (2, 0): -1.0, (0, 2): 1.0}, [], ball=2.0)
    bs = bound_sequence(prog, 4, grid_points=10**4)
    assert all(r.status == OPTIMAL for r in bs.results)
    assert bs.values == pytest.approx([-0.25] * 3, abs=1e-6)


def test_constant_objective():
    bs = bound_sequence(prog1({(0,): 5.0}), 3)
    assert all(v == pytest.approx(5.0, abs=1e-7) for v in bs.values)


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_bounds_are_monotone_and_below_grid(seed, degree):
    prog = random_polyprog(np.random.default_rng(seed), n=2, degree=degree)
    bs = bound_sequence(prog, prog.min_order() + 1, grid_points=10**4)
    assert bs.monotone
    # the grid value is an upper bound on f*, so every f_d stays below it
    for v in bs.values:
        assert v <= bs.grid.value + 1e-4


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_convex_quadratic_exact_at_order_one(seed):
    prog = random_polyprog(np.random.default_rng(seed), convex_quadratic=True)
    r = solve_relaxation(build_relaxation(prog, 1))
    g = grid_minimum(prog, 10**6)
    assert r.value == pytest.approx(g.value, abs=1e-5)


def test_grid_is_feasible_upper_bound():
    prog = PolyProgram(2, {(1, 0): 1.0, (0, 1): 1.0}, [], ball=1.0)
    g = grid_minimum(prog, 10**4)
    assert prog.feasible(g.point, 1e-9)[0]
    assert g.value == pytest.approx(-math.sqrt(2), abs=1e-6)
    assert poly_eval(prog.objective, g.point) == pytest.approx(g.value)


def test_grid_without_region_uses_default_box():
    g = grid_minimum(PolyProgram(1, {(2,): 1.0, (1,): -6.0}), 10**4)
    assert g.value == pytest.approx(-9.0, abs=1e-9)
