"""Proximal gradient for ``||Ax - b||^2 + lam ||x||_1``."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from ..subdiff.lasso import lasso_value
from .trajectory import Trajectory


def soft_threshold(v, tau):
    """Proximal map of ``tau ||.||_1``: ``sign(v) max(|v| - tau, 0)``.

    >>> float(soft_threshold(1.0, 0.3))
    0.7
    """
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def lipschitz_step(A) -> float:
    """Largest step ``1 / (2 ||A^T A||)`` of the convergent regime."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return 1.0 / (2.0 * np.linalg.norm(A.T @ A, 2))


def prox_grad_run(A, b, lam: float, x0, step: float | None = None, iters: int = 500, force: bool = False) -> Trajectory:
    """``x_{k+1} = soft_threshold_{step*lam}(x_k - step * 2 A^T (A x_k - b))``.

    ``step`` defaults to 0.9 of :func:`lipschitz_step`; larger steps raise
    ``ValueError`` unless ``force`` is set. ``ys`` records the gradient map
    ``(x_{k+1} - x_k) / step``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if A.shape[0] != b.shape[0] or A.shape[1] != x.shape[0]:
        raise DimensionError(f"A is {A.shape}, b has {b.shape[0]} entries, x0 has {x.shape[0]}")
    limit = lipschitz_step(A)
    if step is None:
        step = 0.9 * limit
    if step <= 0:
        raise ValueError("step must be positive")
    if step > limit * (1 + 1e-12) and not force:
        raise ValueError(f"step {step} exceeds 1/(2||A^T A||) = {limit}")
    n = x.shape[0]
    xs = np.empty((iters + 1, n))
    fs = np.empty(iters + 1)
    ys = np.empty((iters, n))
    xs[0] = x
    fs[0] = lasso_value(A, b, lam, x)
    for k in range(iters):
        grad = 2.0 * A.T @ (A @ x - b)
        # looked up at call time so tests can substitute a faulty threshold
        x_new = soft_threshold(x - step * grad, step * lam)
        ys[k] = (x_new - x) / step
        x = x_new
        xs[k + 1] = x
        fs[k + 1] = lasso_value(A, b, lam, x)
    return Trajectory(
        xs,
        fs,
        ys,
        np.zeros((iters, n)),
        np.full(iters, step),
        method="prox-grad",
        schedule={"family": "constant", "c": step},
        noise={"kind": "none", "seed": 0},
    )
