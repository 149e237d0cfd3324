"""BFGS with a weak-Wolfe bisection line search, run on nonsmooth objectives."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, LineSearchFailure
from ..expr.nodes import Expr
from ..subdiff.ad import DEFAULT_POLICY, KinkPolicy, value_and_grad
from .trajectory import Trajectory

MAX_BISECTIONS = 50
CURVATURE_TOL = 1e-12


def weak_wolfe(fg, x, f0, g0, d, c1: float = 1e-4, c2: float = 0.9, max_steps: int = MAX_BISECTIONS):
    """Bracketing search for ``t`` with sufficient decrease and ``g(x+td).d >= c2 g0.d``.

    ``fg(x)`` returns ``(f, g)``. Returns ``(t, f, g)``; raises
    :class:`LineSearchFailure` after ``max_steps`` trial steps.
    """
    slope = float(g0 @ d)
    lo, hi, t = 0.0, np.inf, 1.0
    for _ in range(max_steps):
        f, g = fg(x + t * d)
        if f > f0 + c1 * t * slope:
            hi = t
        elif float(g @ d) < c2 * slope:
            lo = t
        else:
            return t, f, g
        t = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * lo
    raise LineSearchFailure(f"no weak-Wolfe step after {max_steps} trials")


def nsbfgs_run(
    objective: Expr,
    x0,
    iters: int = 100,
    c1: float = 1e-4,
    c2: float = 0.9,
    policy: KinkPolicy = DEFAULT_POLICY,
    gtol: float = 0.0,
) -> Trajectory:
    """BFGS on ``objective`` with selection derivatives as gradients.

    Stops when ``||g|| <= gtol`` (reason ``"stationary"``), after ``iters``
    steps, or when the line search fails (reason ``"line-search-failure"``,
    the trajectory ends at the last accepted iterate). Curvature pairs with
    ``s.y <= 1e-12 ||s|| ||y||`` are skipped.
    """
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    n = x.shape[0]
    if n != objective.arity:
        raise DimensionError(f"x0 has length {n}, objective arity is {objective.arity}")

    def fg(z):
        f, g, _ = value_and_grad(objective, z, policy)
        return f, g

    f, g = fg(x)
    H = np.eye(n)
    xs, fs, ys, ts = [x.copy()], [f], [], []
    reason, message = "max-iterations", ""
    for _ in range(iters):
        if np.linalg.norm(g) <= gtol:
            reason = "stationary"
            break
        d = -H @ g
        if d @ g >= 0:  # H lost definiteness numerically
            H = np.eye(n)
            d = -g
        try:
            t, f_new, g_new = weak_wolfe(fg, x, f, g, d, c1, c2)
        except LineSearchFailure as exc:
            reason, message = "line-search-failure", str(exc)
            break
        x_new = x + t * d
        s, yv = x_new - x, g_new - g
        sy = float(s @ yv)
        if sy > CURVATURE_TOL * np.linalg.norm(s) * np.linalg.norm(yv):
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, yv)
            H = V @ H @ V.T + rho * np.outer(s, s)
        ys.append(d)
        ts.append(t)
        x, f, g = x_new, f_new, g_new
        xs.append(x.copy())
        fs.append(f)
    else:
        if np.linalg.norm(g) <= gtol:
            reason = "stationary"
    K = len(ts)
    traj = Trajectory(
        np.array(xs),
        np.array(fs),
        np.array(ys).reshape(K, n),
        np.zeros((K, n)),
        np.array(ts),
        method="nsbfgs",
        schedule={"family": "line-search", "c1": c1, "c2": c2},
        noise={"kind": "none", "seed": 0},
    )
    traj.reason, traj.message = reason, message
    return traj
