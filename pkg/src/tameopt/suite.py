"""Seeded invariant checks for every module, plus the random instance generators they use.

Each property is a function of a seed that returns a short detail string
and raises ``AssertionError`` on violation. :func:`run_suite` runs them in
registration order and reports one :class:`Outcome` per property.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import expr as E
from .rng import stream

# random instances ---------------------------------------------------------------

UNARY_KINKED = ("relu", "abs", "hinge")
UNARY_SMOOTH = ("tanh", "softplus", "logistic", "arctan", "square")


def random_expr(rng: np.random.Generator, arity: int = 2, depth: int = 3) -> E.Expr:
    """Random scalar expression over kinked and smooth primitives."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.25:
            return E.const(float(np.round(rng.normal(), 3)))
        return E.var(int(rng.integers(arity)), arity)
    op = rng.integers(6)
    if op == 0:
        return E.prim(str(rng.choice(UNARY_KINKED)), random_expr(rng, arity, depth - 1))
    if op == 1:
        return E.prim(str(rng.choice(UNARY_SMOOTH)), random_expr(rng, arity, depth - 1))
    if op == 2:
        return E.add(random_expr(rng, arity, depth - 1), random_expr(rng, arity, depth - 1))
    if op == 3:
        return E.scale(float(np.round(rng.normal(), 3)), random_expr(rng, arity, depth - 1))
    if op == 4:
        f = E.max2 if rng.random() < 0.5 else E.min2
        return f(random_expr(rng, arity, depth - 1), random_expr(rng, arity, depth - 1))
    W = np.round(rng.normal(size=(1, arity)), 3)
    return E.affine(W, [float(np.round(rng.normal(), 3))], *[E.var(i, arity) for i in range(arity)])


@dataclass(frozen=True)
class ChainInstance:
    """Piecewise-affine ``f`` on R^2 and a smooth curve inside one stratum."""

    expr: E.Expr
    base: np.ndarray
    tangent: np.ndarray
    speed: float
    bend: float
    t0: float
    on_kink: bool

    def position(self, t: float) -> np.ndarray:
        s = t - self.t0
        return self.base + (self.speed * s + self.bend * s * s) * self.tangent

    def velocity(self, t: float) -> np.ndarray:
        return (self.speed + 2.0 * self.bend * (t - self.t0)) * self.tangent


def random_chain_instance(rng: np.random.Generator, neurons: int = 4, margin: float = 1e-2) -> ChainInstance:
    """``f(x) = a . relu(W x + c) + l . x`` with a curve that keeps every neuron's sign.

    Half of the instances put the curve on the kink set of one neuron (moving
    along that hyperplane), the rest in an open region where ``f`` is affine.
    Neurons off the curve's hyperplane stay at least ``margin`` away from 0
    over ``|t - t0| <= 0.01``.
    """
    while True:
        W = rng.normal(size=(neurons, 2))
        c = rng.normal(size=neurons)
        a = rng.normal(size=neurons)
        lin = rng.normal(size=2)
        x = [E.var(0, 2), E.var(1, 2)]
        f = E.add(E.affine(a[None, :], [0.0], E.relu(E.affine(W, c, *x))), E.affine(lin[None, :], [0.0], *x))
        on_kink = bool(rng.random() < 0.5)
        if on_kink:
            j = int(rng.integers(neurons))
            w = W[j]
            tangent = np.array([-w[1], w[0]]) / np.linalg.norm(w)
            base = -c[j] * w / (w @ w) + rng.normal() * tangent
            others = [i for i in range(neurons) if i != j]
        else:
            base = rng.normal(size=2)
            tangent = rng.normal(size=2)
            tangent /= np.linalg.norm(tangent)
            others = list(range(neurons))
        inst = ChainInstance(f, base, tangent, float(rng.uniform(0.5, 2.0)), float(rng.normal()), float(rng.normal()), on_kink)
        ts = inst.t0 + np.linspace(-0.01, 0.01, 21)
        pre = np.array([W[others] @ inst.position(t) + c[others] for t in ts])
        if pre.size == 0 or np.abs(pre).min() > margin:
            return inst


def random_poly_coeffs(rng: np.random.Generator, max_degree: int = 5) -> list[Fraction]:
    """Integer polynomial of degree 1..max_degree, sometimes with a repeated root."""
    deg = int(rng.integers(1, max_degree + 1))
    coeffs = [Fraction(int(v)) for v in rng.integers(-9, 10, size=deg + 1)]
    if coeffs[-1] == 0:
        coeffs[-1] = Fraction(1)
    if deg >= 3 and rng.random() < 0.3:
        r = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        sq = [r * r, -2 * r, Fraction(1)]  # (x - r)^2
        low = coeffs[: deg - 1]
        if not any(low):
            low = [Fraction(1)]
        coeffs = [sum(low[i] * sq[k - i] for i in range(len(low)) if 0 <= k - i < 3) for k in range(len(low) + 2)]
    return coeffs


def random_saset(rng: np.random.Generator):
    """Random normal form: a polynomial sign condition, a union of literals, or both."""
    from .strat1d import UnivariateSASet, interval, point, solve_poly_inequality

    kind = rng.integers(3)
    if kind == 0:
        coeffs = [int(v) for v in rng.integers(-4, 5, size=int(rng.integers(2, 5)))]
        if coeffs[-1] == 0:
            coeffs[-1] = 1
        return solve_poly_inequality(coeffs, str(rng.choice(["<", "<=", ">", ">=", "=", "!="])))
    grid = [Fraction(int(v), 2) for v in range(-6, 7)]
    comps = []
    for _ in range(int(rng.integers(0, 4))):
        if rng.random() < 0.4:
            comps.append(point(grid[int(rng.integers(len(grid)))]))
        else:
            i, j = sorted(rng.choice(len(grid) + 2, size=2, replace=False))
            lo = "-inf" if i == 0 else grid[i - 1]
            hi = "+inf" if j == len(grid) + 1 else grid[j - 1]
            comps.append(interval(lo, hi))
    S = UnivariateSASet(comps)
    if kind == 2:
        S = S | solve_poly_inequality([int(v) for v in rng.integers(-3, 4, size=3)] + [1], "<")
    return S


def random_set_expression(rng: np.random.Generator, depth: int = 3):
    """Evaluate a random boolean expression tree; returns (text, set)."""
    if depth == 0 or rng.random() < 0.3:
        S = random_saset(rng)
        return f"[{S}]", S
    op = rng.integers(4)
    ta, A = random_set_expression(rng, depth - 1)
    if op == 0:
        return f"~{ta}", ~A
    tb, B = random_set_expression(rng, depth - 1)
    if op == 1:
        return f"({ta} | {tb})", A | B
    if op == 2:
        return f"({ta} & {tb})", A & B
    return f"({ta} - {tb})", A - B


def random_polyprog(rng: np.random.Generator, n: int | None = None, degree: int | None = None,
                    convex_quadratic: bool = False):
    """Random program on the ball ``N - |x|^2 >= 0`` with ``N`` in {1, 2}."""
    from .momsos import PolyProgram, monomials

    n = int(rng.integers(1, 3)) if n is None else n
    ball = float(rng.choice([1.0, 2.0]))
    if convex_quadratic:
        M = rng.normal(size=(n, n))
        Q = M @ M.T + 0.1 * np.eye(n)
        q = rng.normal(size=n)
        f: dict = {}
        for i in range(n):
            for j in range(n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                f[tuple(e)] = f.get(tuple(e), 0.0) + float(Q[i, j])
            e = [0] * n
            e[i] = 1
            f[tuple(e)] = float(q[i])
        f[tuple([0] * n)] = float(rng.normal())
        return PolyProgram(n, f, [], ball)
    degree = int(rng.integers(2, 5)) if degree is None else degree
    f = {e: float(np.round(rng.normal(), 3)) for e in monomials(n, degree)}
    top = [e for e in f if sum(e) == degree]
    f[top[0]] = 1.0 if f[top[0]] == 0 else f[top[0]]
    return PolyProgram(n, f, [], ball)


# registry ---------------------------------------------------------------------


@dataclass(frozen=True)
class Property:
    module: str
    name: str
    check: object

    @property
    def qualname(self) -> str:
        return f"{self.module}.{self.name}"


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    seconds: float
    detail: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name} ({self.seconds:.2f}s) {self.detail}".rstrip()


PROPERTIES: list[Property] = []


def prop(module: str, name: str):
    def register(fn):
        PROPERTIES.append(Property(module, name, fn))
        return fn

    return register


def select(filter_: str | None = None) -> list[Property]:
    if not filter_:
        return list(PROPERTIES)
    keys = [k.strip() for k in filter_.split(",") if k.strip()]
    return [p for p in PROPERTIES if any(p.module == k or p.qualname.startswith(k) for k in keys)]


def run_suite(filter_: str | None = None, seed: int = 0) -> list[Outcome]:
    out = []
    for p in select(filter_):
        t = time.perf_counter()
        try:
            detail = p.check(seed) or ""
            ok = True
        except AssertionError as exc:
            detail, ok = str(exc) or "assertion failed", False
        except Exception as exc:  # a crash is a failure of that property, not of the run
            detail, ok = f"error: {type(exc).__name__}: {exc}", False
        out.append(Outcome(p.qualname, ok, time.perf_counter() - t, detail))
    return out


# tame-expr ------------------------------------------------------------------------


@prop("expr", "text-roundtrip")
def _text_roundtrip(seed: int) -> str:
    rng = stream(seed, 1)
    for _ in range(200):
        e = random_expr(rng)
        assert E.parse_expr(E.serialize_expr(e)) == e, f"round trip changed {E.serialize_expr(e)}"
    return "200 expressions"


@prop("expr", "kink-primitives")
def _kink_primitives(seed: int) -> str:
    x = stream(seed, 2).normal(size=50)
    v = E.var(0)
    for name, ref in [("relu", lambda t: max(t, 0.0)), ("abs", abs), ("hinge", lambda t: max(1.0 - t, 0.0))]:
        got = np.array([E.evaluate(E.prim(name, v), [t]) for t in x])
        assert np.array_equal(got, [ref(t) for t in x]), f"{name} disagrees with its definition"
    return "relu, abs, hinge"


# subdiff ---------------------------------------------------------------------------


def pathology_exprs():
    """``x+ - (-x)+/2`` and ``((-x)+ + x) - x+``, both written with relu only."""
    x = E.var(0)
    f = E.relu(x) - 0.5 * E.relu(-x)
    g = (E.relu(-x) + x) - E.relu(x)
    return f, g


@prop("subdiff", "ad-pathology")
def _ad_pathology(seed: int) -> str:
    from .subdiff import ad_derivative

    f, g = pathology_exprs()
    df, dg = float(ad_derivative(f, [0.0])[0]), float(ad_derivative(g, [0.0])[0])
    assert df == 0.0 and dg == 1.0, f"got {df}, {dg}"
    return "f'(0) = 0, g'(0) = 1"


@prop("subdiff", "exact-hulls")
def _exact_hulls(seed: int) -> str:
    from .subdiff import clarke_generators, min_norm_element

    f, _ = pathology_exprs()
    h = clarke_generators(f, [0.0])
    assert h.exact and h.interval() == (0.5, 1.0), f"hull {h.interval()}"
    assert abs(min_norm_element(h).distance - 0.5) <= 1e-10
    a = clarke_generators(E.abs_(E.var(0)), [0.0])
    assert a.interval() == (-1.0, 1.0) and min_norm_element(a).distance == 0.0
    return "[1/2, 1] and [-1, 1]"


@prop("subdiff", "ad-in-hull")
def _ad_in_hull(seed: int) -> str:
    from .subdiff import ad_derivative, clarke_generators

    rng = stream(seed, 3)
    checked = 0
    x = E.var(0)
    for _ in range(100):
        # one kink per expression; stacked kinks at one point can leave the hull
        a, b, s = (float(v) for v in np.round(rng.normal(size=3), 2))
        kink = E.prim(str(rng.choice(UNARY_KINKED)), E.add(x, E.const(-s)))
        e = E.add(E.scale(a, kink), E.scale(b, E.tanh(x)))
        pt = [s] if rng.random() < 0.5 else [float(np.round(rng.normal(), 2))]
        h = clarke_generators(e, pt)
        assert h.contains(ad_derivative(e, pt), 1e-9), f"AD outside hull for a={a}, b={b}, s={s} at {pt}"
        checked += 1
    return f"{checked} kinked expressions"


@prop("subdiff", "min-norm-optimality")
def _min_norm(seed: int) -> str:
    from .subdiff import certify, wolfe_min_norm

    rng = stream(seed, 4)
    for _ in range(100):
        G = rng.normal(size=(int(rng.integers(1, 8)), int(rng.integers(1, 4))))
        v, _w = wolfe_min_norm(G)
        assert certify(v, G, 1e-8), "min-norm point fails the optimality test"
    return "100 random hulls"


@prop("subdiff", "chain-rule")
def _chain_rule(seed: int, count: int = 100) -> str:
    from .subdiff import Curve, chain_rule_residual, clarke_generators

    rng = stream(seed, 5)
    worst = 0.0
    for _ in range(count):
        inst = random_chain_instance(rng)
        x = inst.position(inst.t0)
        hull = clarke_generators(inst.expr, x)
        curve = Curve(inst.position, inst.velocity)
        for v in hull.generators:
            worst = max(worst, chain_rule_residual(inst.expr, curve, inst.t0, v, 1e-4))
    assert worst <= 1e-4, f"residual {worst:.3g}"
    return f"{count} instances, max residual {worst:.2e}"


# strat1d -------------------------------------------------------------------------


def check_monotone_pieces(coeffs, a=-3, b=3, samples: int = 40) -> int:
    """Violations of strict monotonicity or constancy, with exact evaluation at rational samples."""
    from .strat1d import CONSTANT, INCREASING, monotonicity_decomposition
    from .strat1d import _poly as P

    p = P.make(coeffs)
    dec = monotonicity_decomposition(coeffs, a, b)
    bad = 0
    for lo, hi, label in dec.intervals():
        # rational stand-ins at most 1e-12 inside each irrational endpoint
        l0 = lo.as_fraction() if lo.is_rational else lo.refine(Fraction(1, 10**12)).hi
        h0 = hi.as_fraction() if hi.is_rational else hi.refine(Fraction(1, 10**12)).lo
        ts = [l0 + (h0 - l0) * Fraction(k, samples + 1) for k in range(1, samples + 1)]
        vals = [P.evaluate(p, t) for t in ts]
        diffs = [v1 - v0 for v0, v1 in zip(vals, vals[1:])]
        if label == CONSTANT:
            bad += sum(d != 0 for d in diffs)
        elif label == INCREASING:
            bad += sum(d <= 0 for d in diffs)
        else:
            bad += sum(d >= 0 for d in diffs)
    return bad


def odd_roots(coeffs, a=-3, b=3) -> list:
    """Roots in ``(a, b)`` where the polynomial changes sign (decided exactly)."""
    from .strat1d import Real, real_roots
    from .strat1d import _poly as P
    from .strat1d.algebraic import between

    p = P.make(coeffs)
    roots = [r for r in real_roots(coeffs) if Real.coerce(a) < r < Real.coerce(b)]
    bounds = [Real.coerce(a)] + roots + [Real.coerce(b)]
    out = []
    for i, r in enumerate(roots):
        left = between(bounds[i], r)
        right = between(r, bounds[i + 2])
        if P.sign_at(p, left) * P.sign_at(p, right) < 0:
            out.append(r)
    return out


def sign_scan_agrees(coeffs, a=-3.0, b=3.0, points: int = 10**6) -> bool:
    """Each sign change on a uniform grid brackets exactly one sign-changing root enclosure."""
    roots = odd_roots(coeffs, a, b)
    xs = np.linspace(a, b, points)
    vals = np.polynomial.polynomial.polyval(xs, [float(c) for c in coeffs])
    s = np.sign(vals)
    nz = s != 0
    idx = np.flatnonzero(nz)
    changes = idx[:-1][s[idx[:-1]] != s[idx[1:]]]
    brackets = [(xs[i], xs[idx[np.searchsorted(idx, i) + 1]]) for i in changes]
    if len(brackets) != len(roots):
        return False
    for (lo, hi), r in zip(brackets, roots):
        elo, ehi = r.enclosure()
        if not (lo <= ehi and elo <= hi):
            return False
    return True


@prop("strat1d", "monotone-pieces")
def _monotone_pieces(seed: int, count: int = 20) -> str:
    rng = stream(seed, 6)
    bad = 0
    for _ in range(count):
        bad += check_monotone_pieces(random_poly_coeffs(rng))
    assert bad == 0, f"{bad} violations"
    return f"{count} polynomials, 0 violations"


@prop("strat1d", "sturm-vs-scan")
def _sturm_scan(seed: int, count: int = 10) -> str:
    rng = stream(seed, 7)
    for _ in range(count):
        c = random_poly_coeffs(rng)
        assert sign_scan_agrees(c, points=10**5), f"enclosures disagree with the scan for {c}"
    return f"{count} polynomials"


def check_set_laws(A, B) -> list[str]:
    from .strat1d import is_normal_form

    problems = []
    for label, S in [("A|B", A | B), ("A&B", A & B), ("~A", ~A), ("A-B", A - B)]:
        if not is_normal_form(S.components):
            problems.append(f"{label} not in normal form")
    if ~(A | B) != (~A & ~B):
        problems.append("~(A|B) != ~A & ~B")
    if ~(A & B) != (~A | ~B):
        problems.append("~(A&B) != ~A | ~B")
    if ~~A != A:
        problems.append("~~A != A")
    if (A - B) != (A & ~B):
        problems.append("A-B != A&~B")
    return problems


@prop("strat1d", "boolean-laws")
def _boolean_laws(seed: int, count: int = 100) -> str:
    rng = stream(seed, 8)
    for _ in range(count):
        ta, A = random_set_expression(rng, 2)
        tb, B = random_set_expression(rng, 2)
        problems = check_set_laws(A, B)
        assert not problems, f"{problems[0]} for A={ta}, B={tb}"
    return f"{count} expression pairs"


@prop("strat1d", "text-roundtrip")
def _saset_text(seed: int) -> str:
    from .strat1d import parse_saset

    rng = stream(seed, 9)
    for _ in range(100):
        S = random_saset(rng)
        if all(e.is_rational for e in S.endpoints()):
            assert parse_saset(str(S)) == S, f"text form of {S} does not round-trip"
    return "rational endpoints"


# solvers -------------------------------------------------------------------------


@prop("solvers", "nonexpansiveness")
def _nonexpansive(seed: int) -> str:
    from .solvers import prox

    rng = stream(seed, 10)
    for _ in range(1000):
        u, v = rng.normal(size=(2, 5))
        tau = float(rng.uniform(0, 1))
        su, sv = prox.soft_threshold(u, tau), prox.soft_threshold(v, tau)
        d = su - sv
        # firm nonexpansiveness implies |Su - Sv| <= |u - v|
        assert d @ d <= d @ (u - v) + 1e-12, "soft-threshold is not firmly nonexpansive"
        assert np.linalg.norm(d) <= np.linalg.norm(u - v) + 1e-12, "soft-threshold expands distances"
    return "1000 random pairs"


@prop("solvers", "schedule-gate")
def _schedule_gate(seed: int) -> str:
    from .solvers import StepSchedule, validate_schedule

    for a in np.round(np.arange(0.1, 1.5001, 0.05), 2):
        got = validate_schedule(StepSchedule.power(1.0, float(a))).valid
        assert got == (0.5 < a <= 1.0), f"alpha={a} judged {got}"
    assert not validate_schedule(StepSchedule.constant(0.1)).valid
    return "alpha grid 0.1..1.5"


@prop("solvers", "replay")
def _replay(seed: int) -> str:
    from .solvers import DEFAULT_LASSO, NoiseModel, StepSchedule, ssm_run
    from .subdiff import lasso_expr

    inst = DEFAULT_LASSO
    f = lasso_expr(inst.A, inst.b, inst.lam)
    t1 = ssm_run(f, inst.x0, StepSchedule.power(), NoiseModel.gaussian(0.1, seed), iters=300)
    t2 = ssm_run(f, inst.x0, StepSchedule.power(), NoiseModel.gaussian(0.1, seed), iters=300)
    assert np.array_equal(t1.replay(), t1.xs), "replay differs from the recorded iterates"
    assert t1.to_csv() == t2.to_csv(), "same seed gave different CSV"
    return "300 noisy steps"


@prop("solvers", "stratum-identification")
def _identification(seed: int) -> str:
    from .solvers import DEFAULT_LASSO, StepSchedule, detect_stratum_identification, longest_zero_run, prox_grad_run, ssm_run
    from .subdiff import lasso_expr

    inst = DEFAULT_LASSO
    tp = prox_grad_run(inst.A, inst.b, inst.lam, inst.x0, iters=500)
    k = detect_stratum_identification(tp)
    assert k is not None and k <= 500 and np.all(tp.xs[k:, 0] == 0.0), "prox-gradient never identifies x0 = 0"
    ts = ssm_run(lasso_expr(inst.A, inst.b, inst.lam), inst.x0, StepSchedule.power(), iters=2000)
    run = longest_zero_run(ts, 0)
    assert run < 100, f"subgradient method held x0 = 0 for {run} steps"
    return f"prox k*={k}, ssm zero run {run}"


# momsos ---------------------------------------------------------------------------


@prop("momsos", "monotone-bounds")
def _monotone_bounds(seed: int, count: int = 3) -> str:
    from .momsos import bound_sequence

    rng = stream(seed, 11)
    for i in range(count):
        prog = random_polyprog(rng, n=1 if i % 2 == 0 else 2, degree=4 if i % 2 == 0 else 2)
        bs = bound_sequence(prog, prog.min_order() + 1, tol=1e-6, grid_points=10**4)
        v = bs.values
        assert v[0] <= v[1] + 2e-6, f"f_d decreased: {v}"
        assert v[-1] <= bs.grid.value + 1e-4, f"bound {v[-1]} above grid value {bs.grid.value}"
    return f"{count} programs"


@prop("momsos", "sdp-duality")
def _sdp_duality(seed: int) -> str:
    from .momsos import OPTIMAL, SDPProblem, solve_sdp

    rng = stream(seed, 12)
    for _ in range(5):
        n, m = 4, 3
        As = []
        for _ in range(m):
            M = rng.normal(size=(n, n))
            As.append(M + M.T)
        X0 = np.eye(n) + 0.1 * np.diag(rng.random(n))
        b = np.array([np.sum(A * X0) for A in As])
        M = rng.normal(size=(n, n))
        C = M @ M.T + np.eye(n)
        r = solve_sdp(SDPProblem((n,), C, np.array(As), b))
        assert r.status == OPTIMAL, f"status {r.status}"
        assert abs(r.primal - r.dual) <= 1e-6 * (1 + abs(r.primal)), "duality gap not closed"
        assert np.linalg.eigvalsh(r.X).min() >= -1e-8 and np.linalg.eigvalsh(r.Z).min() >= -1e-8
    return "5 strictly feasible SDPs"


# experiments ----------------------------------------------------------------------


@prop("cli", "thread-invariance")
def _threads(seed: int) -> str:
    from .experiments import count_hits

    a = count_hits(3, 4, 3000, seed=seed, precision="f32", threads=1)
    b = count_hits(3, 4, 3000, seed=seed, precision="f32", threads=4)
    assert a == b, f"{a} hits with 1 thread, {b} with 4"
    return f"{a} hits either way"
