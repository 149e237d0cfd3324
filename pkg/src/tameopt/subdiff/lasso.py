"""Stratum geometry of ``F(x) = ||Ax - b||^2 + lam ||x||_1``.

The active manifold of a sign pattern ``s`` is ``{x : sign(x) = s}``; its
tangent space keeps the coordinates where ``s_i != 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..expr import nodes as N
from ..expr.nodes import Expr
from .clarke import SubgradientHull


@dataclass(frozen=True)
class StratumModel:
    signs: tuple

    @classmethod
    def at(cls, x) -> "StratumModel":
        return cls(tuple(int(s) for s in np.sign(np.asarray(x, dtype=float))))

    @property
    def dim(self) -> int:
        return sum(1 for s in self.signs if s != 0)

    @property
    def projector(self) -> np.ndarray:
        return np.diag([1.0 if s != 0 else 0.0 for s in self.signs])

    def project(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.where(np.array(self.signs) != 0, v, 0.0)

    def contains(self, x) -> bool:
        return StratumModel.at(x) == self


def _check(A, b, x=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise DimensionError(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
    if x is not None:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != A.shape[1]:
            raise DimensionError(f"point has length {x.shape[0]}, A has {A.shape[1]} columns")
    return A, b, x


def lasso_value(A, b, lam: float, x) -> float:
    A, b, x = _check(A, b, x)
    r = A @ x - b
    return float(r @ r + lam * np.abs(x).sum())


def smooth_grad(A, b, x) -> np.ndarray:
    A, b, x = _check(A, b, x)
    return 2.0 * A.T @ (A @ x - b)


def riemannian_grad_lasso(A, b, lam: float, point) -> np.ndarray:
    """Gradient of ``F`` restricted to the stratum of ``point``.

    >>> riemannian_grad_lasso(np.eye(2), [0.0, 1.0], 0.5, [0.0, 1.0])
    array([0. , 0.5])
    """
    A, b, x = _check(A, b, point)
    s = np.sign(x)
    return StratumModel.at(x).project(2.0 * A.T @ (A @ x - b) + lam * s)


def lasso_hull(A, b, lam: float, point) -> SubgradientHull:
    """Exact Clarke subdifferential: the smooth gradient plus ``lam`` times a box face.

    Zero coordinates contribute ``[-lam, lam]``; the hull has ``2^z``
    vertices where ``z`` is the number of zeros.
    """
    A, b, x = _check(A, b, point)
    g = smooth_grad(A, b, x) + lam * np.sign(x)
    zeros = np.flatnonzero(x == 0)
    gens = []
    for corner in itertools.product((-lam, lam), repeat=len(zeros)):
        v = g.copy()
        v[zeros] += corner
        gens.append(v)
    return SubgradientHull(np.array(gens), x, exact=True)


def lasso_expr(A, b, lam: float) -> Expr:
    """``||Ax - b||^2 + lam ||x||_1`` as an expression of arity ``A.shape[1]``."""
    A, b, _ = _check(A, b)
    m, n = A.shape
    xs = [N.var(j, n) for j in range(n)]
    x = xs[0] if n == 1 else N.stack(*xs)
    fit = N.affine(np.ones((1, m)), [0.0], N.square(N.affine(A, -b, x)))
    reg = N.affine(np.full((1, n), float(lam)), [0.0], N.abs_(x))
    return fit + reg
