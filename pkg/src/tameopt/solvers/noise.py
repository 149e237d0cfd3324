"""Zero-mean perturbations of the subgradient step."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import stream


@dataclass(frozen=True)
class NoiseModel:
    """``none``, ``gaussian`` (i.i.d. ``N(0, sigma^2)`` per coordinate) or ``minibatch``.

    Minibatch noise draws ``batch`` of the ``N`` summands without
    replacement at each step and returns ``full gradient - batch gradient``,
    so the step uses the batch gradient. The draw for step ``k`` comes from
    the stream keyed by ``(seed, k)``.
    """

    kind: str = "none"
    sigma: float = 0.0
    batch: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "minibatch"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")
        if self.kind == "minibatch" and self.batch < 1:
            raise ValueError("batch size must be at least 1")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def gaussian(cls, sigma: float, seed: int = 0) -> "NoiseModel":
        return cls("gaussian", float(sigma), 0, int(seed))

    @classmethod
    def minibatch(cls, batch: int, seed: int = 0) -> "NoiseModel":
        return cls("minibatch", 0.0, int(batch), int(seed))

    @property
    def variance_bound(self) -> float | None:
        """Per-coordinate variance for gaussian noise; ``None`` when data dependent."""
        if self.kind == "none":
            return 0.0
        if self.kind == "gaussian":
            return self.sigma**2
        return None

    def batch_indices(self, k: int, n_terms: int) -> np.ndarray:
        if self.batch > n_terms:
            raise ValueError(f"batch {self.batch} exceeds the {n_terms} available terms")
        return np.sort(stream(self.seed, k).choice(n_terms, size=self.batch, replace=False))

    def gaussian_draw(self, k: int, n: int) -> np.ndarray:
        return self.sigma * stream(self.seed, k).standard_normal(n)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "seed": self.seed}
        if self.kind == "gaussian":
            d["sigma"] = self.sigma
        if self.kind == "minibatch":
            d["batch"] = self.batch
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        return cls(d.get("kind", "none"), float(d.get("sigma", 0.0)), int(d.get("batch", 0)), int(d.get("seed", 0)))
