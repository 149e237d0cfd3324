"""Dense primal-dual interior-point method for small block-diagonal SDPs.

Primal ``min <C, X>  s.t. <A_i, X> = b_i, X >= 0``; dual
``max b.y  s.t. Z = C - sum y_i A_i >= 0``. Blocks are stored as one dense
block-diagonal matrix. Search directions use Nesterov-Todd scaling
``W Z W = X`` with a predictor step choosing the centring parameter and supplying a
second-order correction for the corrector step.

Residuals reported (all relative): primal ``|b - A(X)| / (1 + |b|)``, dual
``|C - Z - A^T y|_F / (1 + |C|_F)``, gap ``|<C,X> - b.y| / (1 + |<C,X>| + |b.y|)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, cho_factor, cho_solve, LinAlgError

from ..errors import NumericalFailure

MAX_BLOCK = 50
MAX_ITER = 500
TOL = 1e-9
STEP_FRACTIONS = (0.8, 0.7, 0.6)  # retried in turn; degenerate relaxations need shorter steps
BLOWUP = 1e10

OPTIMAL = "optimal"
MAX_ITER_STATUS = "max-iter"
INFEASIBLE = "infeasible"


@dataclass
class SDPProblem:
    blocks: tuple
    C: np.ndarray
    A: np.ndarray  # (m, N, N)
    b: np.ndarray

    def __post_init__(self):
        self.blocks = tuple(int(s) for s in self.blocks)
        if any(s < 1 or s > MAX_BLOCK for s in self.blocks):
            raise ValueError(f"block sizes must lie in 1..{MAX_BLOCK}")
        N = sum(self.blocks)
        self.C = np.asarray(self.C, dtype=float)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, N, N)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.C.shape != (N, N) or len(self.A) != len(self.b):
            raise ValueError("inconsistent SDP data")
        if not np.allclose(self.C, self.C.T) or not np.allclose(self.A, self.A.transpose(0, 2, 1)):
            raise ValueError("constraint matrices must be symmetric")

    @classmethod
    def from_blocks(cls, sizes, C_blocks, A_blocks, b) -> "SDPProblem":
        """``C_blocks[k]`` and ``A_blocks[i][k]`` are the k-th diagonal blocks."""
        C = block_diag(*[np.atleast_2d(c) for c in C_blocks])
        A = np.array([block_diag(*[np.atleast_2d(a) for a in Ai]) for Ai in A_blocks])
        return cls(tuple(sizes), C, A, b)

    @property
    def size(self) -> int:
        return sum(self.blocks)

    @property
    def m(self) -> int:
        return len(self.b)

    def slack(self, y) -> np.ndarray:
        return self.C - np.tensordot(y, self.A, 1)


@dataclass
class SDPResult:
    status: str
    primal: float
    dual: float
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    iterations: int
    residuals: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.primal


def _sym(M):
    return 0.5 * (M + M.T)


def _roots(X):
    """``X^(1/2)`` and ``X^(-1/2)``; eigenvalues are floored relative to the largest.

    Eigendecompositions instead of Cholesky: near the optimum the iterates are
    nearly singular and roundoff can make a factorisation fail.
    """
    w, V = np.linalg.eigh(X)
    w = np.maximum(w, 1e-300 + 1e-15 * w.max(initial=0.0))
    r = np.sqrt(w)
    return _sym((V * r) @ V.T), _sym((V / r) @ V.T)


def _max_step(X, dX) -> float:
    _, Xm = _roots(X)
    lam = np.linalg.eigvalsh(_sym(Xm @ dX @ Xm)).min()
    return np.inf if lam >= 0 else -1.0 / lam


def _nt_scaling(X, Z):
    S, _ = _roots(X)
    w, Q = np.linalg.eigh(_sym(S @ Z @ S))
    w = np.maximum(w, 1e-300 + 1e-15 * w.max(initial=0.0))
    return _sym(S @ (Q * w**-0.5) @ Q.T @ S)


def _is_ray(sdp: SDPProblem, X, y, tol: float = 1e-6) -> bool:
    """Whether ``X`` or ``y`` (normalised) certifies dual or primal infeasibility."""
    A, b, C = sdp.A, sdp.b, sdp.C
    nx, ny = np.linalg.norm(X), np.linalg.norm(y)
    if nx > BLOWUP:
        D = X / nx  # A(D) = 0, D >= 0, <C, D> < 0
        if np.linalg.norm(A.reshape(len(b), -1) @ D.ravel()) <= tol and np.sum(C * D) < -tol:
            return True
    if ny > BLOWUP:
        u = y / ny  # -A^T u >= 0, b.u > 0
        if b @ u > tol and np.linalg.eigvalsh(-np.tensordot(u, A, 1)).min() >= -tol:
            return True
    return False


def solve_sdp(sdp: SDPProblem, tol: float = TOL, max_iter: int = MAX_ITER) -> SDPResult:
    """Solve ``sdp``; status ``optimal``, ``max-iter`` or ``infeasible``.

    Linear inconsistency of the equality constraints is reported as
    ``infeasible``, and so is blow-up of the iterates (norm above 1e10) when
    the normalised iterate is an improving ray. A run that stalls or breaks
    down is restarted with a shorter step fraction; when every fraction
    fails the last ``max-iter`` result is returned, or
    :class:`NumericalFailure` (with its residual report) re-raised.
    """
    last: SDPResult | NumericalFailure | None = None
    for fraction in STEP_FRACTIONS:
        try:
            res = _interior_point(sdp, tol, max_iter, fraction)
        except NumericalFailure as exc:
            last = exc
            continue
        if res.status != MAX_ITER_STATUS:
            return res
        last = res
    if isinstance(last, NumericalFailure):
        raise last
    return last


def _interior_point(sdp: SDPProblem, tol: float, max_iter: int, fraction: float) -> SDPResult:
    N, m = sdp.size, sdp.m
    C, A, b = sdp.C, sdp.A, sdp.b
    Av = A.reshape(m, -1)

    def res_dict(X, y, Z):
        rp = b - Av @ X.ravel()
        Rd = C - Z - np.tensordot(y, A, 1)
        pobj, dobj = float(np.sum(C * X)), float(b @ y)
        return {
            "primal": float(np.linalg.norm(rp) / (1 + np.linalg.norm(b))),
            "dual": float(np.linalg.norm(Rd) / (1 + np.linalg.norm(C))),
            "gap": float(abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))),
        }

    if m:
        sol, *_ = np.linalg.lstsq(Av, b, rcond=None)
        if np.linalg.norm(Av @ sol - b) > 1e-8 * (1 + np.linalg.norm(b)):
            z = np.zeros((N, N))
            return SDPResult(INFEASIBLE, np.nan, np.nan, z, np.zeros(m), z, 0, {"linear": "inconsistent"})

    scale = max(10.0, np.sqrt(N), np.abs(b).max(initial=0.0), np.linalg.norm(C))
    X = scale * np.eye(N)
    Z = scale * np.eye(N)
    y = np.zeros(m)
    status = MAX_ITER_STATUS
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - Av @ X.ravel()
        Rd = C - Z - np.tensordot(y, A, 1)
        r = res_dict(X, y, Z)
        if max(r.values()) <= tol:
            status = OPTIMAL
            break
        if np.linalg.norm(X) > BLOWUP or np.linalg.norm(y) > BLOWUP:
            if _is_ray(sdp, X, y):
                status = INFEASIBLE
                break
            raise NumericalFailure(f"iterates diverged at iteration {it} without an infeasibility ray", r)
        mu = float(np.sum(X * Z)) / N
        try:
            W = _nt_scaling(X, Z)
            _, Zm = _roots(Z)
            Zinv = Zm @ Zm
            WAW = W @ A @ W
            M = Av @ WAW.reshape(m, -1).T
            M = _sym(M)
            try:
                fac = cho_factor(M)
                solve = lambda r: cho_solve(fac, r)  # noqa: E731
            except LinAlgError:
                pinv = np.linalg.pinv(M, rcond=1e-14)
                solve = lambda r: pinv @ r  # noqa: E731
            WRdW = W @ Rd @ W

            def direction(sigma):
                Rc = sigma * mu * Zinv - X - corr
                rhs = rp - Av @ Rc.ravel() + Av @ WRdW.ravel()
                dy = solve(rhs)
                dZ = _sym(Rd - np.tensordot(dy, A, 1))
                dX = _sym(Rc - W @ dZ @ W)
                return dX, dy, dZ

            corr = np.zeros_like(X)
            dX, dy, dZ = direction(0.0)
            ap = min(1.0, _max_step(X, dX))
            ad = min(1.0, _max_step(Z, dZ))
            mu_aff = float(np.sum((X + ap * dX) * (Z + ad * dZ))) / N
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))
            # second-order correction from the predictor step
            corr = _sym(dX @ dZ @ Zinv)
            dX, dy, dZ = direction(sigma)
            ap = min(1.0, fraction * _max_step(X, dX))
            ad = min(1.0, fraction * _max_step(Z, dZ))
        except LinAlgError as exc:
            raise NumericalFailure(f"factorisation failed at iteration {it}: {exc}", res_dict(X, y, Z)) from None
        X = _sym(X + ap * dX)
        y = y + ad * dy
        Z = _sym(Z + ad * dZ)
    r = res_dict(X, y, Z)
    return SDPResult(status, float(np.sum(C * X)), float(b @ y), X, y, Z, it, r)
