"""Finite-difference check of the chain rule along curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..expr.evaluate import evaluate
from ..expr.nodes import Expr


@dataclass(frozen=True)
class Curve:
    """Piecewise-smooth map ``t -> x(t)``.

    ``velocity`` is optional; without it the derivative is estimated by the
    same finite-difference rule as the composite. ``breakpoints`` lists the
    parameters where the curve itself is not smooth.
    """

    position: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray] | None = None
    breakpoints: tuple = ()

    def __call__(self, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.position(t), dtype=float))


def _difference(fn, t0: float, h: float, breakpoints) -> np.ndarray:
    ahead = any(t0 < b < t0 + h for b in breakpoints)
    behind = any(t0 - h < b <= t0 for b in breakpoints)
    if behind and not ahead:
        return (fn(t0 + h) - fn(t0)) / h
    if ahead and not behind:
        return (fn(t0) - fn(t0 - h)) / h
    return (fn(t0 + h) - fn(t0 - h)) / (2.0 * h)


def chain_rule_residual(expr: Expr, curve, t0: float, v, h: float) -> float:
    """``|D_h (f o x)(t0) - <v, x'(t0)>|``.

    ``D_h`` is the central difference, switched to a one-sided difference
    when a curve breakpoint lies within ``h`` of ``t0``.
    """
    if not isinstance(curve, Curve):
        curve = Curve(curve)
    bps = tuple(curve.breakpoints)
    comp = _difference(lambda t: np.array([evaluate(expr, curve(t))]), t0, h, bps)[0]
    if curve.velocity is not None:
        vel = np.atleast_1d(np.asarray(curve.velocity(t0), dtype=float))
    else:
        vel = _difference(curve, t0, h, bps)
    return float(abs(comp - np.dot(np.asarray(v, dtype=float).reshape(-1), vel)))
