"""Minimum-norm point of the convex hull of finitely many vectors (Wolfe)."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import ConvergenceError

TOL = 1e-10
MAX_ITER = 10_000


class MinNorm(NamedTuple):
    point: np.ndarray
    distance: float


def _affine_minimizer(Q: np.ndarray) -> np.ndarray:
    """Weights (summing to 1) of the min-norm point of the affine hull of rows of Q."""
    k = Q.shape[0]
    G = Q @ Q.T
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = G
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    return sol[:k]


def wolfe_min_norm(points, tol: float = TOL, max_iter: int = MAX_ITER):
    """Return ``(x, weights)`` with ``x = weights @ points`` of minimal norm.

    Active-set method of Wolfe (1976). Raises :class:`ConvergenceError`
    after ``max_iter`` minor cycles.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = P.shape[0]
    scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
    start = int(np.argmin(np.sum(P * P, axis=1)))
    S = [start]
    lam = np.array([1.0])
    x = P[start].copy()
    it = 0
    while True:
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            it += 1
            if it > max_iter:
                raise ConvergenceError(f"min-norm point did not converge in {max_iter} iterations")
            mu = _affine_minimizer(P[S])
            if np.all(mu > tol):
                lam = mu
                break
            neg = mu <= tol
            ratios = lam[neg] / np.maximum(lam[neg] - mu[neg], 1e-300)
            theta = min(1.0, float(np.min(ratios)))
            lam = lam + theta * (mu - lam)
            keep = lam > tol
            keep[int(np.argmax(lam))] = True
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    weights = np.zeros(m)
    weights[S] = lam
    return x, weights


def min_norm_element(hull, tol: float = TOL) -> MinNorm:
    """Smallest-norm vector in the convex hull of ``hull``'s generators.

    ``hull`` is a :class:`~tameopt.subdiff.clarke.SubgradientHull` or an
    array of generators, one per row.
    """
    gens = getattr(hull, "generators", hull)
    x, _ = wolfe_min_norm(gens, tol=tol)
    return MinNorm(x, float(np.linalg.norm(x)))


def certify(v, generators, tol: float = 1e-9) -> bool:
    """Variational inequality ``<v, g - v> >= -tol`` for every generator."""
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    return bool(np.all((G - v) @ v >= -tol))
