"""Iterate records, CSV export and replay."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


def fmt(v: float) -> str:
    """Shortest round-tripping text for a float (stable across runs)."""
    return repr(float(v))


@dataclass
class Trajectory:
    """Iterates ``x_0 .. x_K`` of ``x_{k+1} = x_k + gamma_k (y_k + xi_k)``.

    ``ys[k]`` is the step direction chosen at ``x_k`` (minus a subgradient
    for subgradient methods), ``xis[k]`` the noise and ``gammas[k]`` the step
    length, so ``xs`` has one more row than the other arrays.
    """

    xs: np.ndarray
    fs: np.ndarray
    ys: np.ndarray
    xis: np.ndarray
    gammas: np.ndarray
    method: str
    seed: int = 0
    schedule: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    reason: str = "max-iterations"
    message: str = ""

    def __post_init__(self):
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        n = self.xs.shape[1]
        self.fs = np.asarray(self.fs, dtype=float).reshape(-1)
        self.ys = np.asarray(self.ys, dtype=float).reshape(-1, n)
        self.xis = np.asarray(self.xis, dtype=float).reshape(-1, n)
        self.gammas = np.asarray(self.gammas, dtype=float).reshape(-1)
        K = len(self.xs) - 1
        if not (len(self.fs) == K + 1 and len(self.ys) == len(self.xis) == len(self.gammas) == K):
            raise ValueError("inconsistent trajectory lengths")

    @property
    def iterations(self) -> int:
        return len(self.xs) - 1

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.xs[-1]

    def replay(self) -> np.ndarray:
        """Recompute the iterates from ``x_0`` and the recorded steps."""
        out = np.empty_like(self.xs)
        out[0] = self.xs[0]
        for k in range(self.iterations):
            out[k + 1] = out[k] + self.gammas[k] * (self.ys[k] + self.xis[k])
        return out

    def rows(self):
        ynorm = np.linalg.norm(self.ys, axis=1)
        for k in range(self.iterations + 1):
            last = k == self.iterations
            yield (
                [str(k)]
                + [fmt(v) for v in self.xs[k]]
                + [fmt(self.fs[k]), "" if last else fmt(ynorm[k]), "" if last else fmt(self.gammas[k]), str(self.seed)]
            )

    def header(self) -> list[str]:
        return ["k"] + [f"x{i}" for i in range(self.dim)] + ["f", "ynorm", "gamma", "seed"]

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment is not None:
            buf.write(f"# {comment}\r\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.header())
        w.writerows(self.rows())
        return buf.getvalue()

    def write_csv(self, path, comment: str | None = None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv(comment))


def read_csv(path_or_text) -> dict:
    """Parse a trajectory CSV back into arrays (comment lines skipped)."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text, encoding="utf-8", newline="") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    head, body = rows[0], rows[1:]
    nx = sum(1 for h in head if h.startswith("x"))
    xs = np.array([[float(v) for v in r[1 : 1 + nx]] for r in body])
    fs = np.array([float(r[1 + nx]) for r in body])
    return {"xs": xs, "fs": fs, "header": head}
