"""LASSO instances and their JSON format.

Format: ``{"A": [[...], ...], "b": [...], "lambda": 0.5, "x0": [...]}``
(``x0`` optional).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DimensionError, ParseError
from ..subdiff.lasso import smooth_grad
from .sard import lasso_critical_points


@dataclass(frozen=True)
class LassoInstance:
    A: np.ndarray
    b: np.ndarray
    lam: float
    x0: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0] or A.shape[1] != x0.shape[0]:
            raise DimensionError(f"A is {A.shape}, b has {b.shape[0]} entries, x0 has {x0.shape[0]}")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "lam", float(self.lam))

    def minimizer(self) -> np.ndarray:
        pts = lasso_critical_points(self.A, self.b, self.lam)
        if len(pts) != 1:
            raise ValueError(f"expected one critical point, found {len(pts)}")
        return pts[0]

    def verify(self, margin: float = 1e-9) -> np.ndarray:
        """Check the subgradient inclusion at the minimizer; return it."""
        x = self.minimizer()
        g = smooth_grad(self.A, self.b, x)
        nz = x != 0
        if not np.allclose(g[nz] + self.lam * np.sign(x[nz]), 0.0, atol=1e-9):
            raise ValueError("stationarity fails on the support")
        if np.any(np.abs(g[~nz]) > self.lam - margin):
            raise ValueError("zero coordinates violate |grad_i| < lambda")
        return x

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist(), "lambda": self.lam, "x0": self.x0.tolist()}


# x* = (0, 0.95/1.16) lies on the stratum x_1 = 0 with |grad_1| = 0.303 < lambda
DEFAULT_LASSO = LassoInstance(
    A=np.array([[1.0, 0.0], [0.0, 1.0], [0.3, 0.4]]),
    b=np.array([0.1, 1.0, 0.5]),
    lam=0.5,
    x0=np.array([0.8, 0.2]),
)


def load_lasso(path_or_obj) -> LassoInstance:
    if isinstance(path_or_obj, dict):
        obj = path_or_obj
    else:
        try:
            obj = json.loads(Path(path_or_obj).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.pos) from None
    missing = [k for k in ("A", "b") if k not in obj]
    if "lambda" not in obj and "lam" not in obj:
        missing.append("lambda")
    if missing:
        raise ParseError(f"bad LASSO instance: missing {', '.join(missing)}")
    try:
        A = np.array(obj["A"], dtype=float)
        x0 = obj.get("x0", [0.0] * np.atleast_2d(A).shape[1])
        return LassoInstance(A, obj["b"], obj.get("lambda", obj.get("lam")), x0)
    except (KeyError, TypeError, ValueError, DimensionError) as exc:
        raise ParseError(f"bad LASSO instance: {exc}") from None
