"""Polynomial programs ``min f(x) s.t. g_i(x) >= 0`` in a few variables.

Polynomials are dicts ``{exponent tuple: coefficient}``. Monomials are
ordered graded-lexicographically: by total degree, then lexicographically
with higher powers of earlier variables first, e.g. for two variables
``1, x1, x2, x1^2, x1 x2, x2^2, ...``.

JSON format::

    {"n": 2,
     "objective":   [[coef, [e1, e2]], ...],
     "constraints": [[[coef, [e1, e2]], ...], ...],
     "ball": 1.0,            # adds N - |x|^2 >= 0; "auto" picks N from the grid
     "box": 2.0}             # grid-search half-width when no ball is given (default 10)
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from ..errors import DimensionError, ParseError

MAX_VARS = 3
MAX_DEGREE = 4
DEFAULT_BOX = 10.0  # grid half-width when neither ball nor box is given
GRID_CHUNK = 1 << 16
POLISH_STARTS = 5


def monomials(n: int, deg: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree ``<= deg`` in graded-lex order."""
    out = []
    for d in range(deg + 1):
        level = [e for e in itertools.product(range(d, -1, -1), repeat=n) if sum(e) == d]
        out.extend(sorted(level, reverse=True))
    return out


def n_monomials(n: int, deg: int) -> int:
    return math.comb(n + deg, n)


def poly_degree(p: dict) -> int:
    return max((sum(e) for e, c in p.items() if c != 0), default=0)


def poly_eval(p: dict, X: np.ndarray) -> np.ndarray:
    """Evaluate at the rows of ``X`` (shape ``(k, n)``) or a single point."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    out = np.zeros(len(X))
    for e, c in p.items():
        out += c * np.prod(X ** np.array(e), axis=1)
    return out[0] if single else out


def poly_from_terms(terms, n: int) -> dict:
    p: dict = {}
    for coef, exps in terms:
        e = tuple(int(v) for v in exps)
        if len(e) != n:
            raise DimensionError(f"monomial {list(e)} has {len(e)} exponents, expected {n}")
        if any(v < 0 for v in e):
            raise DimensionError("exponents must be nonnegative")
        p[e] = p.get(e, 0.0) + float(coef)
    return p


def poly_to_terms(p: dict) -> list:
    return [[c, list(e)] for e, c in sorted(p.items(), key=lambda t: (sum(t[0]), tuple(-v for v in t[0])))]


@dataclass
class PolyProgram:
    n: int
    objective: dict
    constraints: list = field(default_factory=list)
    ball: float | None = None
    box: float | None = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_VARS:
            raise DimensionError(f"need 1 <= n <= {MAX_VARS}")
        for p in [self.objective, *self.constraints]:
            for e in p:
                if len(e) != self.n:
                    raise DimensionError("all polynomials must share n")
        if poly_degree(self.objective) > MAX_DEGREE or any(poly_degree(g) > MAX_DEGREE for g in self.constraints):
            raise DimensionError(f"degrees above {MAX_DEGREE} are not supported")
        if self.ball is not None and not self.ball > 0:
            raise ValueError("ball radius squared must be positive")

    @property
    def ball_poly(self) -> dict | None:
        if self.ball is None:
            return None
        p = {tuple([0] * self.n): float(self.ball)}
        for i in range(self.n):
            e = [0] * self.n
            e[i] = 2
            p[tuple(e)] = -1.0
        return p

    def all_constraints(self) -> list[dict]:
        gs = list(self.constraints)
        if self.ball is not None:
            gs.append(self.ball_poly)
        return gs

    @property
    def degree(self) -> int:
        return max([poly_degree(self.objective)] + [poly_degree(g) for g in self.all_constraints()])

    def min_order(self) -> int:
        return max(1, math.ceil(self.degree / 2))

    def feasible(self, X, tol: float = 0.0) -> np.ndarray:
        X = np.atleast_2d(X)
        ok = np.ones(len(X), dtype=bool)
        for g in self.all_constraints():
            ok &= poly_eval(g, X) >= -tol
        return ok

    def search_radius(self) -> float:
        if self.ball is not None:
            return math.sqrt(self.ball)
        if self.box is not None:
            return float(self.box)
        return DEFAULT_BOX

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "objective": poly_to_terms(self.objective),
            "constraints": [poly_to_terms(g) for g in self.constraints],
        }
        if self.ball is not None:
            d["ball"] = self.ball
        if self.box is not None:
            d["box"] = self.box
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "PolyProgram":
        try:
            n = int(obj["n"])
            f = poly_from_terms(obj["objective"], n)
            gs = [poly_from_terms(g, n) for g in obj.get("constraints", [])]
            ball = obj.get("ball")
            box = obj.get("box")
            prog = cls(n, f, gs, None, None if box is None else float(box))
            if ball == "auto":
                prog.ball = auto_ball(prog)
            elif ball is not None:
                prog.ball = float(ball)
            prog.__post_init__()
            return prog
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad polynomial program: {exc}") from None

    @classmethod
    def load(cls, path_or_obj) -> "PolyProgram":
        if isinstance(path_or_obj, dict):
            return cls.from_dict(path_or_obj)
        try:
            return cls.from_dict(json.loads(Path(path_or_obj).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.pos) from None


@dataclass(frozen=True)
class GridResult:
    value: float
    point: np.ndarray
    n_points: int


def grid_minimum(prog: PolyProgram, points: int = 10**6, polish: bool = True) -> GridResult:
    """Upper bound on ``f*`` from a feasible grid point, optionally improved locally.

    The grid covers the search box with ``round(points ** (1/n))`` nodes per
    axis. Local polishing (SLSQP from the best grid points) only ever
    replaces the answer by a strictly better feasible point (pulled back
    towards its grid start when SLSQP overshoots a constraint), so the
    result stays a valid upper bound.
    """
    n = prog.n
    R = prog.search_radius()
    per_axis = max(2, int(round(points ** (1.0 / n))))
    axis = np.linspace(-R, R, per_axis)
    total = per_axis**n
    best_val, best_pt = np.inf, None
    seeds: list[tuple[float, np.ndarray]] = []
    # chunks of flat grid indices bound memory
    for start in range(0, total, GRID_CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + GRID_CHUNK, total)), (per_axis,) * n)
        X = np.stack([axis[i] for i in idx], axis=1)
        ok = prog.feasible(X)
        if not ok.any():
            continue
        vals = poly_eval(prog.objective, X[ok])
        order = np.argsort(vals)[:POLISH_STARTS]
        seeds.extend((float(vals[i]), X[ok][i]) for i in order)
        if vals[order[0]] < best_val:
            best_val, best_pt = float(vals[order[0]]), X[ok][order[0]].copy()
    if best_pt is None:
        raise ValueError("no feasible grid point")
    if polish:
        seeds.sort(key=lambda t: t[0])
        cons = [{"type": "ineq", "fun": (lambda x, g=g: poly_eval(g, x))} for g in prog.all_constraints()]
        for _, x0 in seeds[:POLISH_STARTS]:
            res = minimize(lambda x: poly_eval(prog.objective, x), x0, method="SLSQP", constraints=cons)
            if not res.success:
                continue
            x = _pull_back(prog, x0, np.asarray(res.x, dtype=float))
            v = float(poly_eval(prog.objective, x))
            if v < best_val:
                best_val, best_pt = v, x
    return GridResult(best_val, best_pt, per_axis**n)


def _pull_back(prog: PolyProgram, inside: np.ndarray, x: np.ndarray, steps: int = 60) -> np.ndarray:
    """Feasible point on the segment from ``inside`` (feasible) towards ``x``, closest to ``x``."""
    if prog.feasible(x)[0]:
        return x
    lo, hi = 0.0, 1.0  # fraction of the way from inside to x
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if prog.feasible(inside + mid * (x - inside))[0]:
            lo = mid
        else:
            hi = mid
    return inside + lo * (x - inside)


def auto_ball(prog: PolyProgram) -> float:
    """``1 + |x_grid|^2`` for the grid minimiser over the program's box."""
    if prog.box is None:
        raise ValueError('"ball": "auto" needs a "box" to search')
    g = grid_minimum(prog, points=10**4, polish=False)
    return 1.0 + float(g.point @ g.point)
