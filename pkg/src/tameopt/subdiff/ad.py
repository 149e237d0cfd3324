"""Selection-rule automatic differentiation.

At inputs where a kinked primitive is not differentiable, the reverse sweep
substitutes the value chosen by a :class:`KinkPolicy`. Everywhere else it is
the ordinary chain rule, so the output is the gradient whenever no kink is
hit on the evaluation path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..expr.nodes import BINARY_PRIMITIVES, PRIMITIVES, Expr

_UNARY_RULES = ("left", "right", "zero")
_TIE_RULES = ("first", "second")

DEFAULT_RULES = (
    ("relu", "zero"),
    ("abs", "zero"),
    ("hinge", "zero"),
    ("max2", "first"),
    ("min2", "first"),
)


@dataclass(frozen=True)
class KinkPolicy:
    """Derivative value used at a kink, per primitive.

    Unary kinked primitives accept ``"left"``, ``"right"``, ``"zero"`` or a
    number between the two one-sided slopes. ``max2``/``min2`` accept
    ``"first"``, ``"second"`` or the weight in [0, 1] given to the first
    argument on ties.
    """

    rules: tuple = DEFAULT_RULES

    def __post_init__(self):
        rules = dict(DEFAULT_RULES)
        rules.update(dict(self.rules))
        for name, rule in rules.items():
            if name in BINARY_PRIMITIVES:
                if isinstance(rule, str):
                    if rule not in _TIE_RULES:
                        raise ValueError(f"bad tie rule {rule!r} for {name}")
                elif not 0.0 <= float(rule) <= 1.0:
                    raise ValueError(f"tie weight for {name} must lie in [0, 1]")
            elif name in PRIMITIVES and PRIMITIVES[name].kinks:
                p = PRIMITIVES[name]
                if isinstance(rule, str):
                    if rule not in _UNARY_RULES:
                        raise ValueError(f"bad kink rule {rule!r} for {name}")
                for left, right in p.slopes:
                    v = self._unary(rule, left, right)
                    if not min(left, right) <= v <= max(left, right):
                        raise ValueError(
                            f"kink value {v} for {name} lies outside [{min(left, right)}, {max(left, right)}]"
                        )
            else:
                raise ValueError(f"{name!r} has no kinks")
        object.__setattr__(self, "rules", tuple(sorted(rules.items())))
        object.__setattr__(self, "_table", rules)

    @staticmethod
    def _unary(rule, left, right):
        if rule == "left":
            return left
        if rule == "right":
            return right
        if rule == "zero":
            return 0.0
        return float(rule)

    def kink_value(self, name: str, left: float, right: float) -> float:
        return self._unary(self._table[name], left, right)

    def tie_weight(self, name: str) -> float:
        rule = self._table[name]
        if rule == "first":
            return 1.0
        if rule == "second":
            return 0.0
        return float(rule)

    def with_rules(self, **overrides) -> "KinkPolicy":
        table = dict(self._table)
        table.update(overrides)
        return KinkPolicy(tuple(table.items()))


DEFAULT_POLICY = KinkPolicy()


def value_and_grad(expr: Expr, point, policy: KinkPolicy = DEFAULT_POLICY):
    """``(f(x), selection gradient, kink_hit)`` in one forward/reverse pass."""
    if expr.dim != 1:
        raise DimensionError("differentiation needs a scalar expression")
    tape = expr.tape
    vals = tape.forward(point)
    grad, hit = tape.vjp(point, np.ones(1), policy, vals)
    return float(vals[-1][0]), grad, hit


def ad_derivative(expr: Expr, point, policy: KinkPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Reverse-mode derivative with kink values taken from ``policy``.

    >>> from tameopt.expr import var, relu
    >>> x = var(0)
    >>> ad_derivative(relu(x) - 0.5 * relu(-x), [0.0])
    array([0.])
    """
    return value_and_grad(expr, point, policy)[1]


def one_sided_derivatives(expr: Expr, point) -> tuple[float, float]:
    """Left and right derivative of a univariate expression at ``point``."""
    if expr.arity != 1 or expr.dim != 1:
        raise DimensionError("one-sided derivatives need a scalar univariate expression")
    tape = expr.tape
    vals = tape.forward(point)
    right = float(tape.directional(point, [1.0], vals)[0])
    left = -float(tape.directional(point, [-1.0], vals)[0])
    return left, right
