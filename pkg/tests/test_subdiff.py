import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import linprog

import tameopt.expr as E
from tameopt.errors import ConvergenceError, DomainError, NonLipschitzWarning
from tameopt.subdiff import (
    DEFAULT_POLICY,
    Curve,
    KinkPolicy,
    StratumModel,
    SubgradientHull,
    ad_derivative,
    certify,
    chain_rule_residual,
    clarke_generators,
    is_clarke_critical,
    lasso_expr,
    lasso_hull,
    min_norm_element,
    riemannian_grad_lasso,
    value_and_grad,
    wolfe_min_norm,
)
from tameopt.suite import pathology_exprs

from conftest import exprs

x = E.var(0)
F, G = pathology_exprs()


# selection AD ---------------------------------------------------------------------

def test_ad_pathology_values_are_exact():
    assert ad_derivative(F, [0.0])[0] == 0.0
    assert ad_derivative(G, [0.0])[0] == 1.0
    assert ad_derivative(E.square(x), [3.0])[0] == 6.0


def test_g_is_identically_zero():
    # the true derivative is 0 everywhere, yet AD reports 1 at the kink
    for t in [-2.0, -1e-9, 1e-9, 3.0]:
        assert E.evaluate(G, [t]) == 0.0
        assert ad_derivative(G, [t])[0] == 0.0
    assert clarke_generators(G, [0.0]).interval() == (0.0, 0.0)


def test_policy_choices_at_the_kink():
    r = E.relu(x)
    assert ad_derivative(r, [0.0], KinkPolicy((("relu", "right"),)))[0] == 1.0
    assert ad_derivative(r, [0.0], KinkPolicy((("relu", "left"),)))[0] == 0.0
    assert ad_derivative(r, [0.0], DEFAULT_POLICY.with_rules(relu=0.25))[0] == 0.25
    a = E.abs_(x)
    assert ad_derivative(a, [0.0], DEFAULT_POLICY.with_rules(abs="left"))[0] == -1.0
    m = E.max2(x, E.scale(2.0, x))
    assert ad_derivative(m, [0.0])[0] == 1.0
    assert ad_derivative(m, [0.0], DEFAULT_POLICY.with_rules(max2="second"))[0] == 2.0
    assert ad_derivative(m, [0.0], DEFAULT_POLICY.with_rules(max2=0.5))[0] == 1.5


@pytest.mark.parametrize("rules", [(("relu", 2.0),), (("abs", -1.5),), (("max2", 1.2),), (("relu", "middle"),), (("tanh", 0.0),)])
def test_policy_values_must_lie_in_the_slope_hull(rules):
    with pytest.raises(ValueError):
        KinkPolicy(rules)


def _fd(e, p, h):
    p = np.asarray(p, dtype=float)
    out = np.empty(len(p))
    for i in range(len(p)):
        d = np.zeros(len(p))
        d[i] = h
        out[i] = (E.evaluate(e, p + d) - E.evaluate(e, p - d)) / (2 * h)
    return out


@given(exprs(arity=3), st.integers(0, 10**6))
def test_ad_matches_finite_differences_off_kinks(e, seed):
    assume(e.arity >= 1)
    p = np.random.default_rng(seed).normal(size=e.arity)
    _, g, hit = value_and_grad(e, p)
    assume(not hit)
    fd1, fd2 = _fd(e, p, 1e-6), _fd(e, p, 1e-7)
    # a kink inside the stencil shows up as disagreement between step sizes
    assume(np.allclose(fd1, fd2, rtol=1e-3, atol=1e-6))
    assert np.allclose(g, fd1, rtol=1e-5, atol=1e-5 * max(1.0, np.abs(fd1).max()))


@given(st.sampled_from(["relu", "abs", "hinge"]), st.floats(-2, 2).map(lambda v: round(v, 2)),
       st.floats(-2, 2).map(lambda v: round(v, 2)), st.booleans())
def test_ad_lies_in_exact_hull_single_kink(kink, a, b, at_kink):
    s = 0.37
    e = E.add(E.scale(a, E.prim(kink, E.add(x, E.const(-s)))), E.scale(b, E.square(x)))
    pt = [s + (1.0 if kink == "hinge" else 0.0)] if at_kink else [1.3]
    h = clarke_generators(e, pt)
    assert h.exact
    assert h.contains(ad_derivative(e, pt), 1e-6)


def test_stacked_kinks_can_leave_the_hull():
    e = E.add(E.scale(2.0, E.relu(x)), E.scale(-1.0, E.abs_(x)))  # equals x near 0
    assert clarke_generators(e, [0.0]).interval() == (1.0, 1.0)
    assert ad_derivative(e, [0.0])[0] == 0.0


# Clarke hulls ----------------------------------------------------------------------

def test_exact_hull_examples():
    h = clarke_generators(E.abs_(x), [0.0])
    assert h.exact and sorted(h.generators.ravel()) == [-1.0, 1.0]
    assert clarke_generators(F, [0.0]).interval() == (0.5, 1.0)
    s = clarke_generators(E.square(x), [1.0])
    assert s.generators.tolist() == [[2.0]]


def test_sampled_hull_of_two_dim_abs():
    e = E.abs_(E.affine([[1.0, -2.0]], [0.0], E.var(0, 2), E.var(1, 2)))
    h = clarke_generators(e, [0.0, 0.0])
    assert not h.exact and h.stabilized
    got = sorted(map(tuple, np.round(h.generators, 12)))
    assert got == [(-1.0, 2.0), (1.0, -2.0)]


def test_sampled_hull_is_reproducible_from_seed():
    e = E.max2(E.var(0, 2), E.add(E.var(1, 2), E.tanh(E.var(0, 2))))
    a = clarke_generators(e, [0.0, 0.0], rng_seed=5)
    b = clarke_generators(e, [0.0, 0.0], rng_seed=5)
    assert a.to_record() == b.to_record()


def test_record_roundtrip():
    h = clarke_generators(E.abs_(E.add(E.var(0, 2), E.var(1, 2))), [0.0, 0.0], rng_seed=3)
    rec = h.to_record()
    back = SubgradientHull.from_record(rec)
    assert back.to_record() == rec
    assert set(json.loads(rec)) == {"flag", "point", "generators", "radii", "seed", "stabilized"}


def test_criticality_examples():
    assert is_clarke_critical(E.abs_(x), [0.0])
    assert is_clarke_critical(E.scale(-1.0, E.abs_(x)), [0.0])
    assert is_clarke_critical(E.min2(E.const(0.0), E.scale(-1.0, x)), [0.0])
    assert not is_clarke_critical(E.square(x), [1.0])


def test_domain_and_lipschitz_diagnostics():
    with pytest.raises(DomainError):
        clarke_generators(E.log(x), [-1.0])
    with pytest.warns(NonLipschitzWarning):
        clarke_generators(E.sqrt(E.add(x, E.const(1e-3))), [0.0])


# min-norm element ------------------------------------------------------------------

def test_min_norm_examples():
    v, d = min_norm_element(np.array([[-1.0], [1.0]]))
    assert d == 0.0
    v, d = min_norm_element(np.array([[0.5], [1.0]]))
    assert v[0] == pytest.approx(0.5, abs=1e-12) and d == pytest.approx(0.5, abs=1e-12)
    v, d = min_norm_element(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(v, [0.5, 0.5], atol=1e-12) and d == pytest.approx(math.sqrt(2) / 2, abs=1e-12)


def _zero_in_hull_lp(Gm):
    m, n = Gm.shape
    A_eq = np.vstack([Gm.T, np.ones((1, m))])
    b_eq = np.concatenate([np.zeros(n), [1.0]])
    return linprog(np.zeros(m), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs").status == 0


gens = st.integers(1, 7).flatmap(
    lambda m: st.integers(1, 3).flatmap(
        lambda n: st.lists(st.lists(st.floats(-3, 3, allow_nan=False), min_size=n, max_size=n), min_size=m, max_size=m)))


@given(gens)
def test_min_norm_variational_inequality(G):
    Gm = np.array(G)
    v, w = wolfe_min_norm(Gm)
    assert certify(v, Gm, 1e-9)
    assert w.min() >= 0 and w.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(w @ Gm, v, atol=1e-9)


@given(gens)
def test_zero_distance_iff_lp_feasible(G):
    Gm = np.array(G)
    d = min_norm_element(Gm).distance
    assume(d == 0.0 or d > 1e-6)  # skip numerically borderline hulls
    assert (d == 0.0 or d < 1e-9) == _zero_in_hull_lp(Gm)


@given(gens, st.floats(0.01, 100))
def test_min_norm_is_positively_homogeneous(G, c):
    Gm = np.array(G)
    v, d = min_norm_element(Gm)
    vc, dc = min_norm_element(c * Gm)
    assert dc == pytest.approx(c * d, rel=1e-6, abs=1e-8)
    np.testing.assert_allclose(vc, c * v, rtol=1e-6, atol=1e-8)


def test_min_norm_iteration_cap():
    with pytest.raises(ConvergenceError):
        wolfe_min_norm(np.random.default_rng(0).normal(size=(40, 3)), max_iter=1)


# chain rule ------------------------------------------------------------------------

@pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-4])
def test_chain_rule_examples(h):
    assert chain_rule_residual(E.square(x), Curve(lambda t: [t], lambda t: [1.0]), 1.0, [2.0], h) <= 10 * h * h
    assert chain_rule_residual(E.abs_(x), Curve(lambda t: [t + 1], lambda t: [1.0]), 0.0, [1.0], h) <= 1e-12
    f = E.add(E.abs_(E.var(0, 2)), E.var(1, 2))
    curve = Curve(lambda t: [0.0, t], lambda t: [0.0, 1.0])
    for v1 in np.linspace(-1, 1, 5):
        assert chain_rule_residual(f, curve, 0.0, [v1, 1.0], h) <= 1e-12


def test_chain_rule_residual_order_h_squared():
    f = E.tanh(E.var(0))
    curve = Curve(lambda t: [math.sin(t)], lambda t: [math.cos(t)])
    v = [1 - math.tanh(math.sin(0.3)) ** 2]
    r = [chain_rule_residual(f, curve, 0.3, v, h) for h in (1e-2, 1e-3)]
    assert r[1] <= r[0] / 50


def test_chain_rule_one_sided_near_breakpoint():
    curve = Curve(lambda t: [abs(t)], breakpoints=(0.0,))
    # right-sided difference at the breakpoint sees slope +1
    assert chain_rule_residual(E.var(0), curve, 0.0, [1.0], 1e-4) <= 1e-12


# LASSO strata ----------------------------------------------------------------------

def test_riemannian_examples():
    np.testing.assert_array_equal(riemannian_grad_lasso(np.eye(2), [0.0, 1.0], 0.5, [0.0, 1.0]), [0.0, 0.5])
    A = np.array([[1.0, 2.0], [0.5, -1.0], [0.0, 3.0]])
    b = np.array([1.0, 0.0, -2.0])
    p = np.array([0.3, -0.7])
    full = 2 * A.T @ (A @ p - b) + 0.4 * np.sign(p)
    np.testing.assert_allclose(riemannian_grad_lasso(A, b, 0.4, p), full, atol=1e-14)


def test_stratum_projector_properties():
    s = StratumModel.at([0.0, -2.0, 3.0])
    P = s.projector
    np.testing.assert_array_equal(P @ P, P)
    np.testing.assert_array_equal(P, P.T)
    pt = np.array([0.0, -1.0, 5.0])
    assert s.contains(pt) and np.array_equal(P @ pt, pt)
    assert s.dim == 2


@given(st.integers(0, 10**6))
def test_min_norm_distance_equals_riemannian_gradient(seed):
    rng = np.random.default_rng(seed)
    m, n = 4, 3
    A = rng.normal(size=(m, n))
    b = rng.normal(size=m)
    lam = float(rng.uniform(0.5, 3.0))
    p = rng.normal(size=n)
    p[rng.random(n) < 0.5] = 0.0
    g = 2 * A.T @ (A @ p - b)
    zeros = p == 0
    assume(np.all(np.abs(g[zeros]) <= lam))  # the Riemannian gradient lies in the hull
    hull = lasso_hull(A, b, lam, p)
    d = min_norm_element(hull).distance
    assert d == pytest.approx(np.linalg.norm(riemannian_grad_lasso(A, b, lam, p)), abs=1e-8)


def test_sampled_lasso_hull_matches_exact():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [0.3, 0.4]])
    b = np.array([0.1, 1.0, 0.5])
    p = np.array([0.0, 0.5])
    exact = lasso_hull(A, b, 0.5, p)
    sampled = clarke_generators(lasso_expr(A, b, 0.5), p)
    key = lambda M: sorted(map(tuple, np.round(M, 9)))  # noqa: E731
    assert key(exact.generators) == key(sampled.generators)
