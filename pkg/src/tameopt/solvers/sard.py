"""Critical values found by scanning every stratum of structured objectives."""

from __future__ import annotations

import itertools

import numpy as np

from ..expr import nodes as N
from ..expr.nodes import Expr
from ..subdiff.lasso import lasso_value, smooth_grad


def lasso_critical_points(A, b, lam: float, tol: float = 1e-10) -> list[np.ndarray]:
    """Clarke-critical points of ``||Ax - b||^2 + lam ||x||_1``, one per stratum at most.

    For each sign pattern ``s`` the stratum-restricted stationarity system
    is solved on the free coordinates; the solution is kept when its signs
    match ``s`` and the zero coordinates satisfy ``|grad_i| <= lam``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    n = A.shape[1]
    out = []
    for s in itertools.product((-1, 0, 1), repeat=n):
        s = np.array(s)
        free = np.flatnonzero(s)
        x = np.zeros(n)
        if len(free):
            AF = A[:, free]
            G = 2 * AF.T @ AF
            rhs = 2 * AF.T @ b - lam * s[free]
            sol, *_ = np.linalg.lstsq(G, rhs, rcond=None)
            if np.linalg.norm(G @ sol - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
                continue
            if not np.all(np.sign(sol) == s[free]):
                continue
            x[free] = sol
        g = smooth_grad(A, b, x)
        zero = np.flatnonzero(s == 0)
        if np.all(np.abs(g[zero]) <= lam + tol):
            out.append(x)
    return out


def lasso_critical_values(A, b, lam: float) -> list[float]:
    vals = sorted(lasso_value(A, b, lam, x) for x in lasso_critical_points(A, b, lam))
    return _unique(vals)


def pwaffine_expr(breaks, slopes, intercept: float = 0.0) -> Expr:
    """Continuous piecewise-affine ``f`` with ``f(0) = intercept`` before shifting.

    ``slopes[i]`` holds on the i-th piece; there is one more slope than
    breakpoint. Written as ``intercept + s_0 x + sum (s_i - s_{i-1}) relu(x - b_i)``.
    """
    breaks = [float(v) for v in breaks]
    slopes = [float(v) for v in slopes]
    if len(slopes) != len(breaks) + 1:
        raise ValueError("need one more slope than breakpoint")
    x = N.var(0)
    terms = [N.affine([[slopes[0]]], [intercept], x)]
    for bi, (s0, s1) in zip(breaks, zip(slopes, slopes[1:])):
        terms.append(N.scale(s1 - s0, N.relu(N.affine([[1.0]], [-bi], x))))
    return N.add(*terms)


def pwaffine_value(breaks, slopes, intercept: float, x: float) -> float:
    v = intercept + slopes[0] * x
    for bi, (s0, s1) in zip(breaks, zip(slopes, slopes[1:])):
        v += (s1 - s0) * max(x - bi, 0.0)
    return v


def pwaffine_critical_values(breaks, slopes, intercept: float = 0.0) -> list[float]:
    """Values at breakpoints where the slope changes sign (or vanishes) and on flat pieces."""
    vals = []
    for i, bi in enumerate(breaks):
        lo, hi = sorted((slopes[i], slopes[i + 1]))
        if lo <= 0 <= hi:
            vals.append(pwaffine_value(breaks, slopes, intercept, bi))
    for i, s in enumerate(slopes):
        if s == 0:
            anchor = breaks[i - 1] if i > 0 else breaks[0] if breaks else 0.0
            vals.append(pwaffine_value(breaks, slopes, intercept, anchor))
    return _unique(sorted(vals))


def _unique(vals, tol: float = 1e-12) -> list[float]:
    out: list[float] = []
    for v in vals:
        if not out or abs(v - out[-1]) > tol:
            out.append(float(v))
    return out
