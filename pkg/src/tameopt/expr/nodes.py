"""Expression trees for definable functions.

An :class:`Expr` is an immutable tree. Every node has an input ``arity``
(the length of the point it is evaluated at) and an output ``dim``.
Primitives act coordinate-wise on the output of their child, which is how
activation layers are applied.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ..errors import DimensionError


class StructureTag(enum.IntEnum):
    """Smallest listed o-minimal structure covering a set of primitives."""

    R_alg = 0
    R_exp = 1
    R_Pfaff = 2
    untamed = 3

    def join(self, other: "StructureTag") -> "StructureTag":
        return StructureTag(max(self, other))


_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _softplus(u):
    return np.logaddexp(0.0, u)


def _mish(u):
    return u * np.tanh(_softplus(u))


def _mish_d(u):
    t = np.tanh(_softplus(u))
    return t + u * (1.0 - t * t) * special.expit(u)


def _swish_d(u, beta):
    s = special.expit(beta * u)
    return s + beta * u * s * (1.0 - s)


def _elu(u):
    return np.where(u > 0, u, np.expm1(np.minimum(u, 0.0)))


def _huber(u, beta):
    a = np.abs(u)
    return np.where(a <= beta, 0.5 * u * u, beta * (a - 0.5 * beta))


def _huber_d(u, beta):
    return np.where(np.abs(u) <= beta, u, beta * np.sign(u))


@dataclass(frozen=True)
class Primitive:
    """Coordinate-wise elementary function.

    ``kinks`` lists inputs where the function is not differentiable, with the
    (left, right) one-sided derivative limits in ``slopes``. ``lower`` is the
    domain boundary (``None`` for all of R); ``open_lower`` says whether the
    boundary point itself is excluded.
    """

    name: str
    tag: StructureTag
    func: Callable
    deriv: Callable
    nparams: int = 0
    kinks: tuple = ()
    slopes: tuple = ()
    lower: float | None = None
    open_lower: bool = False
    piecewise_poly: bool = False
    lipschitz: bool = True

    def slope_pair(self, kink: float) -> tuple[float, float]:
        return self.slopes[self.kinks.index(kink)]


_U = StructureTag
PRIMITIVES: dict[str, Primitive] = {
    p.name: p
    for p in [
        Primitive("relu", _U.R_alg, lambda u: np.maximum(u, 0.0),
                  lambda u: (u > 0).astype(float), kinks=(0.0,), slopes=((0.0, 1.0),),
                  piecewise_poly=True),
        Primitive("abs", _U.R_alg, np.abs, lambda u: np.sign(u).astype(float),
                  kinks=(0.0,), slopes=((-1.0, 1.0),), piecewise_poly=True),
        Primitive("hinge", _U.R_alg, lambda u: np.maximum(0.0, 1.0 - u),
                  lambda u: -(u < 1).astype(float), kinks=(1.0,), slopes=((-1.0, 0.0),),
                  piecewise_poly=True),
        Primitive("square", _U.R_alg, lambda u: u * u, lambda u: 2.0 * u,
                  piecewise_poly=True),
        Primitive("huber", _U.R_alg, _huber, _huber_d, nparams=1, piecewise_poly=True),
        Primitive("softsign", _U.R_alg, lambda u: u / (np.abs(u) + 1.0),
                  lambda u: 1.0 / (np.abs(u) + 1.0) ** 2),
        Primitive("sqrt", _U.R_alg, np.sqrt, lambda u: 0.5 / np.sqrt(u),
                  lower=0.0, lipschitz=False),
        Primitive("logistic", _U.R_exp, special.expit,
                  lambda u: special.expit(u) * (1.0 - special.expit(u))),
        Primitive("tanh", _U.R_exp, np.tanh, lambda u: 1.0 - np.tanh(u) ** 2),
        Primitive("softplus", _U.R_exp, _softplus, special.expit),
        Primitive("swish", _U.R_exp, lambda u, b: u * special.expit(b * u), _swish_d,
                  nparams=1),
        Primitive("mish", _U.R_exp, _mish, _mish_d),
        Primitive("elu", _U.R_exp, _elu, lambda u: np.where(u > 0, 1.0, np.exp(np.minimum(u, 0.0)))),
        Primitive("exp", _U.R_exp, np.exp, np.exp),
        Primitive("log", _U.R_exp, np.log, lambda u: 1.0 / u, lower=0.0, open_lower=True,
                  lipschitz=False),
        Primitive("gelu", _U.R_Pfaff, lambda u: 0.5 * u * (1.0 + special.erf(u / _SQRT2)),
                  lambda u: 0.5 * (1.0 + special.erf(u / _SQRT2))
                  + u * _INV_SQRT_2PI * np.exp(-0.5 * u * u)),
        Primitive("erf", _U.R_Pfaff, special.erf,
                  lambda u: _TWO_OVER_SQRT_PI * np.exp(-u * u)),
        Primitive("arctan", _U.R_Pfaff, np.arctan, lambda u: 1.0 / (1.0 + u * u)),
        # Reserved for tests of the classifier: unrestricted sine is not tame.
        Primitive("sin", _U.untamed, np.sin, np.cos),
    ]
}

# max2/min2 take two arguments and are handled by their own node logic.
BINARY_PRIMITIVES = {"max2": _U.R_alg, "min2": _U.R_alg}

STRUCTURAL_KINDS = ("const", "var", "affine", "poly", "sum", "prod", "scale", "compose", "stack")


@dataclass(frozen=True)
class Expr:
    """Immutable expression node.

    Build nodes with the constructor functions of this module (``var``,
    ``relu``, ``affine``...), not by calling ``Expr`` directly. Equality is
    structural.
    """

    kind: str
    children: tuple = ()
    params: tuple = ()
    arity: int = 0
    dim: int = 1
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.kind, self.children, self.params, self.arity)))

    def __hash__(self):
        return self._hash

    @cached_property
    def tape(self):
        from .evaluate import Tape

        return Tape(self)

    # arithmetic sugar
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, scale(-1.0, _coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), scale(-1.0, self))

    def __neg__(self):
        return scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, Expr):
            return mul(self, other)
        return scale(float(other), self)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return scale(1.0 / float(other), self)

    def __call__(self, inner: "Expr") -> "Expr":
        return compose(self, inner)

    def __repr__(self):
        from .text import serialize_expr

        return f"Expr({serialize_expr(self)})"


def _coerce(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def _max_arity(children: Sequence[Expr]) -> int:
    return max((c.arity for c in children), default=0)


def const(c: float) -> Expr:
    return Expr("const", (), (float(c),), 0, 1)


def var(i: int, n: int | None = None) -> Expr:
    """Coordinate ``i`` of the input; ``n`` optionally fixes the arity."""
    i = int(i)
    if i < 0:
        raise DimensionError(f"variable index must be >= 0, got {i}")
    n = i + 1 if n is None else int(n)
    if n <= i:
        raise DimensionError(f"arity {n} too small for variable index {i}")
    return Expr("var", (), (i, n), n, 1)


def _matrix(W) -> tuple:
    arr = np.atleast_2d(np.asarray(W, dtype=float))
    if arr.ndim != 2:
        raise DimensionError("affine weight must be a matrix")
    return tuple(tuple(float(v) for v in row) for row in arr)


def affine(W, b, *children: Expr) -> Expr:
    """``W @ concat(children) + b``."""
    if not children:
        raise DimensionError("affine needs at least one child")
    Wt = _matrix(W)
    rows, cols = len(Wt), len(Wt[0])
    bt = tuple(float(v) for v in np.atleast_1d(np.asarray(b, dtype=float)))
    if len(bt) != rows:
        raise DimensionError(f"affine offset has length {len(bt)}, expected {rows}")
    width = sum(c.dim for c in children)
    if width != cols:
        raise DimensionError(f"affine matrix has {cols} columns but inputs have total dim {width}")
    return Expr("affine", tuple(children), (Wt, bt), _max_arity(children), rows)


def poly(terms, *children: Expr) -> Expr:
    """Multivariate polynomial ``sum coef * prod u_j**e_j`` of concat(children).

    ``terms`` is an iterable of ``(coef, exponents)`` pairs.
    """
    if not children:
        raise DimensionError("poly needs at least one child")
    width = sum(c.dim for c in children)
    tt = []
    for coef, exps in terms:
        exps = tuple(int(e) for e in exps)
        if len(exps) != width or any(e < 0 for e in exps):
            raise DimensionError(f"monomial exponents {exps} do not match input dim {width}")
        tt.append((float(coef), exps))
    if not tt:
        tt = [(0.0, (0,) * width)]
    return Expr("poly", tuple(children), tuple(tt), _max_arity(children), 1)


def prim(name: str, *children: Expr, beta: float | None = None) -> Expr:
    if name in BINARY_PRIMITIVES:
        if len(children) != 2:
            raise DimensionError(f"{name} takes two arguments")
        a, b = children
        if a.dim != b.dim:
            raise DimensionError(f"{name} arguments have dims {a.dim} and {b.dim}")
        return Expr(name, (a, b), (), _max_arity(children), a.dim)
    if name not in PRIMITIVES:
        raise KeyError(f"unknown primitive {name!r}")
    p = PRIMITIVES[name]
    if len(children) != 1:
        raise DimensionError(f"{name} takes one argument")
    params: tuple = ()
    if p.nparams:
        beta = 1.0 if beta is None else float(beta)
        if not beta > 0:
            raise ValueError(f"{name} parameter must be positive, got {beta}")
        params = (beta,)
    elif beta is not None:
        raise ValueError(f"{name} takes no parameter")
    (c,) = children
    return Expr(name, (c,), params, c.arity, c.dim)


def _unary(name):
    def build(e: Expr) -> Expr:
        return prim(name, e)

    build.__name__ = name
    build.__doc__ = f"Coordinate-wise ``{name}``."
    return build


relu = _unary("relu")
abs_ = _unary("abs")
hinge = _unary("hinge")
square = _unary("square")
softsign = _unary("softsign")
sqrt = _unary("sqrt")
logistic = _unary("logistic")
tanh = _unary("tanh")
softplus = _unary("softplus")
mish = _unary("mish")
elu = _unary("elu")
exp = _unary("exp")
log = _unary("log")
gelu = _unary("gelu")
erf = _unary("erf")
arctan = _unary("arctan")
sin = _unary("sin")


def swish(e: Expr, beta: float = 1.0) -> Expr:
    return prim("swish", e, beta=beta)


def huber(e: Expr, beta: float = 1.0) -> Expr:
    return prim("huber", e, beta=beta)


def max2(a: Expr, b: Expr) -> Expr:
    return prim("max2", _coerce(a), _coerce(b))


def min2(a: Expr, b: Expr) -> Expr:
    return prim("min2", _coerce(a), _coerce(b))


def add(*children: Expr) -> Expr:
    children = tuple(_coerce(c) for c in children)
    if not children:
        raise DimensionError("sum needs at least one child")
    dim = max(c.dim for c in children)
    if any(c.dim not in (1, dim) for c in children):
        raise DimensionError(f"sum children have incompatible dims {[c.dim for c in children]}")
    return Expr("sum", children, (), _max_arity(children), dim)


def mul(a: Expr, b: Expr) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if a.dim != b.dim and 1 not in (a.dim, b.dim):
        raise DimensionError(f"prod children have dims {a.dim} and {b.dim}")
    return Expr("prod", (a, b), (), _max_arity((a, b)), max(a.dim, b.dim))


def scale(c: float, e: Expr) -> Expr:
    return Expr("scale", (_coerce(e),), (float(c),), e.arity, e.dim)


def compose(f: Expr, g: Expr) -> Expr:
    """``f(g(x))``; requires ``f.arity == g.dim``."""
    if f.arity != g.dim:
        raise DimensionError(f"cannot compose: outer arity {f.arity} != inner dim {g.dim}")
    return Expr("compose", (f, g), (), g.arity, f.dim)


def stack(*children: Expr) -> Expr:
    children = tuple(_coerce(c) for c in children)
    if not children:
        raise DimensionError("stack needs at least one child")
    return Expr("stack", children, (), _max_arity(children), sum(c.dim for c in children))


def substitute(expr: Expr, values: dict[int, float], arity: int | None = None) -> Expr:
    """Replace variables ``i`` in ``values`` by constants.

    Remaining variables keep their indices. The inner function of a
    ``compose`` node has its own variable scope and is left untouched.
    """
    memo: dict[int, Expr] = {}

    def go(e: Expr) -> Expr:
        key = id(e)
        if key in memo:
            return memo[key]
        if e.kind == "var":
            i = e.params[0]
            out = const(values[i]) if i in values else var(i, arity if arity is not None else e.params[1])
        elif e.kind == "const":
            out = e
        elif e.kind == "compose":
            f, g = e.children
            out = compose(f, go(g))
        else:
            kids = tuple(go(c) for c in e.children)
            out = Expr(e.kind, kids, e.params, _max_arity(kids), e.dim)
        memo[key] = out
        return out

    return go(expr)


def iter_nodes(expr: Expr, into_compose: bool = True):
    """Yield each distinct node once, children before parents."""
    seen = set()
    stack_ = [(expr, False)]
    while stack_:
        node, expanded = stack_.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            yield node
            continue
        stack_.append((node, True))
        kids = node.children
        if node.kind == "compose" and not into_compose:
            kids = node.children[1:]
        for c in reversed(kids):
            if id(c) not in seen:
                stack_.append((c, False))


def node_tag(e: Expr) -> StructureTag:
    if e.kind in PRIMITIVES:
        return PRIMITIVES[e.kind].tag
    if e.kind in BINARY_PRIMITIVES:
        return BINARY_PRIMITIVES[e.kind]
    return StructureTag.R_alg


def classify_structure(expr: Expr) -> StructureTag:
    """Join of the structure tags of every primitive occurring in ``expr``."""
    tag = StructureTag.R_alg
    for node in iter_nodes(expr):
        tag = tag.join(node_tag(node))
    return tag


def is_piecewise_polynomial(expr: Expr) -> bool:
    for node in iter_nodes(expr):
        if node.kind in PRIMITIVES and not PRIMITIVES[node.kind].piecewise_poly:
            return False
    return True
