import json
import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

import tameopt.expr as E
from tameopt.errors import DimensionError, DivergenceError, LineSearchFailure, ParseError
from tameopt.solvers import (
    DEFAULT_LASSO,
    NEVER,
    NoiseModel,
    StepSchedule,
    Trajectory,
    detect_stratum_identification,
    diagnose_trajectory,
    lasso_critical_points,
    lasso_critical_values,
    lipschitz_step,
    load_lasso,
    longest_zero_run,
    nsbfgs_run,
    prox_grad_run,
    pwaffine_critical_values,
    pwaffine_expr,
    pwaffine_value,
    read_csv,
    soft_threshold,
    ssm_run,
    tail_clusters,
    validate_schedule,
    weak_wolfe,
)
from tameopt.solvers.schedule import INVALID, UNDECIDABLE, VALID
from tameopt.expr.networks import split_risk
from tameopt.subdiff import clarke_generators, lasso_expr, lasso_value, value_and_grad

x = E.var(0)
HARMONIC = StepSchedule.power(1.0, 1.0)


# schedules -------------------------------------------------------------------------

def test_schedule_examples():
    assert validate_schedule(StepSchedule.power(2.0, 1.0)).verdict == VALID
    assert validate_schedule(StepSchedule.power(1.0, 0.4)).verdict == INVALID
    assert validate_schedule(StepSchedule.constant(0.1)).verdict == INVALID
    v = validate_schedule(StepSchedule.custom([1, 0.5, 0.25]))
    assert v.verdict == UNDECIDABLE and v.partial_sum == 1.75 and v.partial_sum_squares == 1.3125


@pytest.mark.parametrize("alpha", [round(a, 2) for a in np.arange(0.0, 2.01, 0.05)])
def test_power_family_gate_on_grid(alpha):
    assert validate_schedule(StepSchedule.power(1.0, alpha)).valid == (0.5 < alpha <= 1.0)


def test_schedule_text_and_dict_forms():
    for s in [StepSchedule.power(0.5, 0.75), StepSchedule.constant(0.1), StepSchedule.custom([0.3, 0.2])]:
        assert StepSchedule.from_dict(s.to_dict()) == s
    assert StepSchedule.parse("power:2:0.75") == StepSchedule.power(2.0, 0.75)
    assert StepSchedule.parse("custom:1,0.5") == StepSchedule.custom([1, 0.5])
    with pytest.raises(ValueError):
        StepSchedule.parse("cosine:1")
    with pytest.raises(ValueError):
        StepSchedule.power(-1.0)
    with pytest.raises(ValueError):
        StepSchedule.custom([1.0, 0.0])
    with pytest.raises(IndexError):
        StepSchedule.custom([1.0])(2)


def test_ssm_refuses_invalid_schedule_unless_overridden():
    with pytest.raises(ValueError):
        ssm_run(E.abs_(x), [1.0], StepSchedule.constant(0.1), iters=5)
    t = ssm_run(E.abs_(x), [1.0], StepSchedule.constant(0.1), iters=5, allow_invalid=True)
    assert t.iterations == 5


# subgradient method ----------------------------------------------------------------

def test_ssm_on_square_follows_closed_form():
    t = ssm_run(E.square(x), [1.0], HARMONIC, iters=1000)
    # x_{k+1} = x_k (1 - 2/k): -1 after one step, exactly 0 after two
    assert t.xs[1, 0] == -1.0 and np.all(t.xs[2:, 0] == 0.0)
    assert np.all(np.diff(t.fs[2:]) <= 0)


def test_ssm_on_abs_has_critical_limit_at_zero():
    t = ssm_run(E.abs_(x), [1.0], HARMONIC, iters=2000)
    tail = t.xs[-200:, 0]
    assert np.abs(tail).max() <= 10 * t.gammas[-200]
    rep = diagnose_trajectory(t, E.abs_(x))
    assert len(rep.limit_points) == 1
    lp = rep.limit_points[0]
    assert abs(lp.center[0]) < 1e-2 and lp.critical and lp.distance == 0.0
    assert rep.f_convergent and not rep.unbounded


def test_zero_iterations():
    t = ssm_run(E.abs_(x), [0.3], HARMONIC, iters=0)
    assert t.iterations == 0 and t.xs.tolist() == [[0.3]]


def test_ssm_dimension_check():
    with pytest.raises(DimensionError):
        ssm_run(E.abs_(x), [1.0, 2.0], HARMONIC, iters=1)


def test_divergence_is_reported_with_partial_trajectory():
    with pytest.raises(DivergenceError) as info:
        ssm_run(E.scale(-1.0, x), [0.0], StepSchedule.constant(1e7), iters=100, allow_invalid=True)
    traj = info.value.trajectory
    assert traj.reason == "diverged" and abs(traj.xs[-1, 0]) > 1e8
    rep = diagnose_trajectory(traj, E.scale(-1.0, x))
    assert rep.unbounded and not rep.limit_points


def test_linear_drift_with_constant_step_flagged_unbounded():
    t = ssm_run(E.scale(-1.0, x), [0.0], StepSchedule.constant(0.5), iters=400, allow_invalid=True)
    rep = diagnose_trajectory(t, E.scale(-1.0, x))
    assert rep.unbounded and not rep.limit_points


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_noiseless_steps_lie_in_clarke_hull(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 2))
    b = rng.normal(size=3)
    f = lasso_expr(A, b, 0.5)
    t = ssm_run(f, rng.normal(size=2), StepSchedule.power(0.1, 1.0), iters=60)
    for k in range(0, 60, 12):
        assert clarke_generators(f, t.xs[k]).contains(-t.ys[k], 1e-6)


def test_replay_is_exact_with_noise():
    A, b = DEFAULT_LASSO.A, DEFAULT_LASSO.b
    f = lasso_expr(A, b, 0.5)
    t = ssm_run(f, DEFAULT_LASSO.x0, StepSchedule.power(0.5, 0.75), NoiseModel.gaussian(0.1, seed=7), iters=300)
    assert np.array_equal(t.replay(), t.xs)
    again = ssm_run(f, DEFAULT_LASSO.x0, StepSchedule.power(0.5, 0.75), NoiseModel.gaussian(0.1, seed=7), iters=300)
    assert np.array_equal(again.xs, t.xs)
    other = ssm_run(f, DEFAULT_LASSO.x0, StepSchedule.power(0.5, 0.75), NoiseModel.gaussian(0.1, seed=8), iters=300)
    assert not np.array_equal(other.xs, t.xs)


def test_clarke_source_runs():
    t = ssm_run(E.abs_(x), [0.5], HARMONIC, iters=50, source="clarke")
    assert t.method == "ssm-clarke" and abs(t.final[0]) < 0.1
    with pytest.raises(ValueError):
        ssm_run(E.abs_(x), [0.5], HARMONIC, iters=1, source="oracle")


# noise -----------------------------------------------------------------------------

def test_gaussian_noise_has_zero_mean_and_recorded_variance():
    nm = NoiseModel.gaussian(0.5, seed=3)
    draws = np.concatenate([nm.gaussian_draw(k, 4) for k in range(5000)])
    se = 0.5 / math.sqrt(draws.size)
    assert abs(draws.mean()) < 5 * se
    assert draws.var() == pytest.approx(0.25, rel=0.05)
    assert nm.variance_bound == 0.25
    assert NoiseModel.from_dict(nm.to_dict()) == nm


def _risk():
    net = E.build_mlp(E.NetworkSpec(1, ([[1.0]],), ("identity",)), parametric=True)
    data = E.Dataset([[1.0], [2.0], [-1.0], [0.5]], [[1.0], [0.0], [2.0], [1.0]])
    return E.build_empirical_risk(net, data, E.loss_expr("absolute"), 1)


def test_minibatch_noise_averages_to_zero():
    risk = _risk()
    nm = NoiseModel.minibatch(2, seed=1)
    t = ssm_run(risk, [0.3], HARMONIC, nm, iters=1)
    # with x fixed, the mean over every 2-subset of the batch gradient is the full gradient
    terms = split_risk(risk)
    full = value_and_grad(risk, [0.3])[1]
    per = [value_and_grad(term, [0.3])[1] for term in terms]
    means = [sum(per[i] for i in c) / 2 for c in combinations(range(len(terms)), 2)]
    np.testing.assert_allclose(np.mean([full - m for m in means], axis=0), 0.0, atol=1e-12)
    assert t.noise == {"kind": "minibatch", "seed": 1, "batch": 2}
    with pytest.raises(ValueError):
        ssm_run(risk, [0.3], HARMONIC, NoiseModel.minibatch(9), iters=1)
    with pytest.raises(ValueError):
        ssm_run(E.abs_(x), [0.3], HARMONIC, NoiseModel.minibatch(1), iters=1)


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel("uniform")
    with pytest.raises(ValueError):
        NoiseModel.minibatch(0)


# trajectory export ---------------------------------------------------------------

def test_trajectory_csv_roundtrip(tmp_path):
    t = ssm_run(E.abs_(E.add(E.var(0, 2), E.var(1, 2))), [1.0, -0.3], HARMONIC, iters=25)
    p = tmp_path / "t.csv"
    t.write_csv(p, comment="run")
    raw = p.read_bytes()
    assert raw.startswith(b"# run\r\n") and raw.count(b"\r\n") == 28
    back = read_csv(p)
    assert back["header"] == ["k", "x0", "x1", "f", "ynorm", "gamma", "seed"]
    assert np.array_equal(back["xs"], t.xs) and np.array_equal(back["fs"], t.fs)


def test_trajectory_length_validation():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 1)), np.zeros(3), np.zeros((1, 1)), np.zeros((1, 1)), np.zeros(1), "x")


# proximal gradient ---------------------------------------------------------------

def test_soft_threshold_examples():
    assert float(soft_threshold(1.0, 0.3)) == 0.7
    np.testing.assert_array_equal(soft_threshold([-2.0, 0.1, 0.5], 0.5), [-1.5, 0.0, 0.0])


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6), st.lists(st.floats(-10, 10), min_size=1, max_size=6),
       st.floats(0, 5))
def test_soft_threshold_is_firmly_nonexpansive(u, v, tau):
    n = min(len(u), len(v))
    u, v = np.array(u[:n]), np.array(v[:n])
    d = soft_threshold(u, tau) - soft_threshold(v, tau)
    assert np.linalg.norm(d) <= np.linalg.norm(u - v) + 1e-12
    assert d @ (u - v) >= d @ d - 1e-9


def _lasso_reference(A, b, lam):
    # split x = p - q with p, q >= 0 turns the problem into a smooth bound-constrained one
    n = A.shape[1]

    def fun(z):
        p, q = z[:n], z[n:]
        r = A @ (p - q) - b
        g = 2 * A.T @ r
        return r @ r + lam * z.sum(), np.concatenate([g + lam, -g + lam])

    res = minimize(fun, np.zeros(2 * n), jac=True, method="L-BFGS-B", bounds=[(0, None)] * (2 * n),
                   options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000})
    return res.x[:n] - res.x[n:]


def test_prox_example_zeroes_first_coordinate():
    A, b = np.eye(2), np.array([0.2, 1.0])
    t = prox_grad_run(A, b, 0.5, [1.0, 1.0], step=0.4, iters=50)
    first_zero = int(np.argmax(t.xs[:, 0] == 0.0))
    assert first_zero > 0 and np.all(t.xs[first_zero:, 0] == 0.0)
    np.testing.assert_allclose(t.final, _lasso_reference(A, b, 0.5), atol=1e-7)


def test_prox_with_zero_lambda_is_gradient_descent():
    rng = np.random.default_rng(0)
    A, b = rng.normal(size=(5, 3)), rng.normal(size=5)
    step = 0.9 * lipschitz_step(A)
    t = prox_grad_run(A, b, 0.0, np.zeros(3), step=step, iters=20)
    xk = np.zeros(3)
    for k in range(20):
        xk = xk - step * 2 * A.T @ (A @ xk - b)
        np.testing.assert_allclose(t.xs[k + 1], xk, rtol=1e-13, atol=1e-14)


@given(st.integers(0, 10**6))
def test_prox_converges_to_reference_minimizer(seed):
    rng = np.random.default_rng(seed)
    A, b = rng.normal(size=(6, 3)), rng.normal(size=6)
    lam = float(rng.uniform(0.1, 3.0))
    t = prox_grad_run(A, b, lam, np.zeros(3), iters=3000)
    ref = _lasso_reference(A, b, lam)
    assert lasso_value(A, b, lam, t.final) <= lasso_value(A, b, lam, ref) + 1e-8
    assert np.all(np.diff(t.fs) <= 1e-12)


def test_prox_step_guard():
    A = np.eye(2)
    with pytest.raises(ValueError):
        prox_grad_run(A, [0, 0], 0.5, [1, 1], step=0.6)
    t = prox_grad_run(A, [0, 0], 0.5, [1, 1], step=0.6, iters=3, force=True)
    assert t.gammas.tolist() == [0.6] * 3
    with pytest.raises(DimensionError):
        prox_grad_run(A, [0, 0, 0], 0.5, [1, 1])


# nonsmooth BFGS --------------------------------------------------------------------

def test_nsbfgs_on_quadratic():
    Q = np.array([[3.0, 1.0], [1.0, 2.0]])
    c = np.array([1.0, -1.0])
    f = E.add(E.poly([(1.5, (2, 0)), (1.0, (1, 1)), (1.0, (0, 2))], E.var(0, 2), E.var(1, 2)),
              E.affine([[-1.0, 1.0]], [0.0], E.var(0, 2), E.var(1, 2)))
    t = nsbfgs_run(f, [2.0, 2.0], iters=50)
    np.testing.assert_allclose(t.final, np.linalg.solve(Q, c), atol=1e-8)


def test_nsbfgs_stops_at_critical_start():
    t = nsbfgs_run(E.square(E.add(x, E.const(-2.0))), [2.0], iters=10)
    assert t.iterations == 0 and t.reason == "stationary"


def test_nsbfgs_oscillates_on_abs():
    t = nsbfgs_run(E.abs_(x), [0.7], iters=20)
    xs = t.xs[:, 0]
    assert np.all(np.sign(xs[1:]) == -np.sign(xs[:-1]))
    assert np.all(np.diff(t.fs) < 0)


def test_nsbfgs_from_one_lands_on_the_kink():
    t = nsbfgs_run(E.abs_(x), [1.0], iters=20)
    assert t.xs[:, 0].tolist() == [1.0, 0.0] and t.reason == "stationary"


def test_weak_wolfe_failure():
    def fg(z):
        return float(-z[0]), np.array([1.0])  # reported slope contradicts the values

    with pytest.raises(LineSearchFailure):
        weak_wolfe(fg, np.array([0.0]), 0.0, np.array([1.0]), np.array([-1.0]), max_steps=5)


def test_nsbfgs_reports_line_search_failure_on_lasso():
    inst = DEFAULT_LASSO
    t = nsbfgs_run(lasso_expr(inst.A, inst.b, inst.lam), inst.x0, iters=100)
    assert t.reason in ("line-search-failure", "max-iterations", "stationary")
    assert np.all(np.diff(t.fs) <= 0)
    assert lasso_value(inst.A, inst.b, inst.lam, t.final) <= lasso_value(inst.A, inst.b, inst.lam, inst.minimizer()) + 1e-6


# smooth sanity floor -----------------------------------------------------------

def test_all_solvers_reach_small_gradient_on_strongly_convex_quadratic():
    A = np.array([[2.0, 0.0], [0.5, 1.0]])
    b = np.array([1.0, -1.0])
    f = E.add(*[E.square(E.affine([row], [-bi], E.var(0, 2), E.var(1, 2))) for row, bi in zip(A, b)])

    def grad(z):
        return 2 * A.T @ (A @ z - b)

    t = ssm_run(f, [0.0, 0.0], StepSchedule.power(0.2, 0.6), iters=20000)
    assert np.linalg.norm(grad(t.final)) < 1e-6
    t = prox_grad_run(A, b, 0.0, [0.0, 0.0], iters=2000)
    assert np.linalg.norm(grad(t.final)) < 1e-6
    t = nsbfgs_run(f, [0.0, 0.0], iters=50)
    assert np.linalg.norm(grad(t.final)) < 1e-6


def test_descent_profile_ratio_on_quadratic():
    t = ssm_run(E.square(x), [1.0], StepSchedule.power(0.01, 1.0), iters=500)
    rep = diagnose_trajectory(t, E.square(x))
    assert 0.5 <= rep.descent_ratio <= 2.0


# stratum identification -------------------------------------------------------

def test_prox_identifies_stratum_and_ssm_does_not():
    inst = DEFAULT_LASSO
    t = prox_grad_run(inst.A, inst.b, inst.lam, inst.x0, iters=500)
    k = detect_stratum_identification(t)
    assert k is not NEVER and k < 50
    assert t.final[0] == 0.0 and t.final[1] > 0
    assert longest_zero_run(t, 0) == 501 - k
    s = ssm_run(lasso_expr(inst.A, inst.b, inst.lam), inst.x0, HARMONIC, iters=5000)
    assert detect_stratum_identification(s) is NEVER


def test_identification_at_start():
    xs = np.tile([0.0, 1.0], (200, 1))
    t = Trajectory(xs, np.zeros(200), np.zeros((199, 2)), np.zeros((199, 2)), np.ones(199), "fixed")
    assert detect_stratum_identification(t) == 0


def test_identification_needs_a_hold_period():
    xs = np.tile([1.0, 1.0], (1000, 1))
    xs[-5:, 0] = 0.0
    t = Trajectory(xs, np.zeros(1000), np.zeros((999, 2)), np.zeros((999, 2)), np.ones(999), "late")
    assert detect_stratum_identification(t) is NEVER


# weak Sard ---------------------------------------------------------------------------

def test_pwaffine_expression_matches_formula():
    breaks, slopes = [-1.0, 0.5, 2.0], [-2.0, 1.0, 0.0, 3.0]
    f = pwaffine_expr(breaks, slopes, 0.25)
    for t in np.linspace(-4, 4, 41):
        assert E.evaluate(f, [t]) == pytest.approx(pwaffine_value(breaks, slopes, 0.25, t), abs=1e-12)


@given(st.integers(0, 10**6))
def test_pwaffine_critical_values_match_dense_scan(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    breaks = sorted(rng.choice(np.arange(-8, 9) / 2, size=k, replace=False).tolist())
    slopes = rng.integers(-3, 4, size=k + 1).astype(float).tolist()
    vals = pwaffine_critical_values(breaks, slopes, 0.0)
    f = pwaffine_expr(breaks, slopes)
    # every breakpoint where 0 lies in the Clarke hull contributes its value
    expected = set()
    for bi in breaks:
        lo, hi = clarke_generators(f, [bi]).interval()
        if lo <= 0 <= hi:
            expected.add(round(pwaffine_value(breaks, slopes, 0.0, bi), 9))
    for i, s in enumerate(slopes):
        if s == 0:
            anchor = breaks[i - 1] if i > 0 else breaks[0]
            expected.add(round(pwaffine_value(breaks, slopes, 0.0, anchor), 9))
    assert {round(v, 9) for v in vals} == expected


def test_lasso_critical_values_and_limit_points():
    inst = DEFAULT_LASSO
    vals = lasso_critical_values(inst.A, inst.b, inst.lam)
    assert len(vals) == 1  # convex: one critical value
    pts = lasso_critical_points(inst.A, inst.b, inst.lam)
    np.testing.assert_allclose(pts[0], _lasso_reference(inst.A, inst.b, inst.lam), atol=1e-7)
    f = lasso_expr(inst.A, inst.b, inst.lam)
    t = ssm_run(f, inst.x0, HARMONIC, iters=3000)
    rep = diagnose_trajectory(t, f)
    for lp in rep.limit_points:
        assert min(abs(lp.value - v) for v in vals) < 1e-4


def test_nonconvex_pwaffine_limit_values_fall_in_critical_set():
    breaks, slopes = [-1.0, 0.0, 1.0], [-1.0, 1.0, -1.0, 1.0]
    f = pwaffine_expr(breaks, slopes)
    vals = pwaffine_critical_values(breaks, slopes)
    assert vals == [1.0, 2.0]  # minima at -1 and 1, maximum at 0
    for x0 in (-2.0, 0.3, 1.7):
        rep = diagnose_trajectory(ssm_run(f, [x0], HARMONIC, iters=2000), f)
        assert rep.limit_points and all(min(abs(lp.value - v) for v in vals) < 1e-4 for lp in rep.limit_points)


def test_tail_clusters_split_far_groups():
    pts = np.array([[0.0, 0.0], [0.01, 0.0], [5.0, 5.0], [5.0, 5.02]])
    groups = sorted(map(list, tail_clusters(pts, 0.1)))
    assert groups == [[0, 1], [2, 3]]


# instances --------------------------------------------------------------------

def test_default_instance_is_optimal_on_stratum():
    xs = DEFAULT_LASSO.verify()
    assert xs[0] == 0.0 and xs[1] == pytest.approx(0.95 / 1.16, abs=1e-12)


def test_load_lasso(tmp_path):
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(DEFAULT_LASSO.to_dict()))
    inst = load_lasso(p)
    assert np.array_equal(inst.A, DEFAULT_LASSO.A) and inst.lam == 0.5
    assert load_lasso({"A": [[1.0]], "b": [1.0], "lam": 0.1}).x0.tolist() == [0.0]
    p.write_text('{"A": [[1]], "b": [1]}')
    with pytest.raises(ParseError, match="missing lambda"):
        load_lasso(p)
    p.write_text("{")
    with pytest.raises(ParseError):
        load_lasso(p)
    with pytest.raises(ParseError):
        load_lasso({"A": [[1.0, 2.0]], "b": [1.0, 2.0], "lambda": 0.1})
