"""Clarke subdifferential oracle and criticality test."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, DomainError, NonLipschitzError, NonLipschitzWarning
from ..expr.nodes import PRIMITIVES, Expr, is_piecewise_polynomial
from ..rng import stream
from .ad import DEFAULT_POLICY, one_sided_derivatives
from .minnorm import min_norm_element

DEFAULT_RADII = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
SAMPLES_PER_RADIUS = 64
DEDUPE_TOL = 1e-6
STABLE_TOL = 1e-4


@dataclass(frozen=True)
class SubgradientHull:
    """Finite generator set whose convex hull represents the Clarke subdifferential."""

    generators: np.ndarray
    point: np.ndarray
    exact: bool
    radii: tuple = ()
    seed: int | None = None
    stabilized: bool | None = None
    per_radius: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if g.shape[0] < 1:
            raise ValueError("a hull needs at least one generator")
        object.__setattr__(self, "generators", g)
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(-1))
        if g.shape[1] != self.point.shape[0]:
            raise DimensionError("generators and point differ in dimension")

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @property
    def flag(self) -> str:
        return "exact" if self.exact else "sampled"

    def interval(self) -> tuple[float, float]:
        """``[min, max]`` of a one-dimensional hull."""
        if self.dim != 1:
            raise DimensionError("interval() needs a one-dimensional hull")
        return float(self.generators.min()), float(self.generators.max())

    def contains(self, v, tol: float = 1e-6) -> bool:
        v = np.asarray(v, dtype=float).reshape(-1)
        shifted = self.generators - v
        return min_norm_element(shifted).distance <= tol

    def to_record(self) -> str:
        """Canonical JSON text: point, generators, radii, seed, flag."""
        order = np.lexsort(self.generators.T[::-1])
        rec = {
            "flag": self.flag,
            "point": [float(v) for v in self.point],
            "generators": [[float(v) for v in row] for row in self.generators[order]],
            "radii": [float(r) for r in self.radii],
            "seed": self.seed,
            "stabilized": self.stabilized,
        }
        return json.dumps(rec, sort_keys=True)

    @classmethod
    def from_record(cls, text: str) -> "SubgradientHull":
        rec = json.loads(text)
        return cls(
            np.array(rec["generators"], dtype=float),
            np.array(rec["point"], dtype=float),
            rec["flag"] == "exact",
            tuple(rec.get("radii", ())),
            rec.get("seed"),
            rec.get("stabilized"),
        )


def dedupe(vectors, tol: float = DEDUPE_TOL) -> np.ndarray:
    """Greedy clustering: keep a vector unless one already kept lies within ``tol``."""
    kept: list[np.ndarray] = []
    for v in np.atleast_2d(vectors):
        if not any(np.linalg.norm(v - k) <= tol for k in kept):
            kept.append(v)
    return np.array(kept)


def hausdorff(a, b) -> float:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _boundary_gap(tape, x) -> float:
    """Smallest distance of a non-Lipschitz primitive's input to its domain edge."""
    vals = tape.forward(x)
    gap = np.inf
    for i, node in enumerate(tape.nodes):
        if node.kind == "compose":
            gap = min(gap, _boundary_gap(tape.data[i], vals[tape.kids[i][0]]))
        elif node.kind in PRIMITIVES:
            p = PRIMITIVES[node.kind]
            if not p.lipschitz and p.lower is not None:
                gap = min(gap, float(np.min(vals[tape.kids[i][0]] - p.lower)))
    return gap


def _exact_univariate(expr: Expr, x: np.ndarray) -> SubgradientHull:
    left, right = one_sided_derivatives(expr, x)
    return SubgradientHull(dedupe(np.array([[left], [right]])), x, exact=True)


def clarke_generators(
    expr: Expr,
    point,
    radii=DEFAULT_RADII,
    samples_per_radius: int = SAMPLES_PER_RADIUS,
    rng_seed: int = 0,
    exact: bool | None = None,
) -> SubgradientHull:
    """Generators of the Clarke subdifferential of ``expr`` at ``point``.

    Univariate compositions of piecewise-polynomial primitives get the exact
    pair of one-sided derivatives. Otherwise points ``x + r u`` with ``u``
    uniform on the sphere are drawn for each radius; every sample contributes
    the gradient at ``x`` of the smooth piece active at the sample, and the
    union is deduplicated. ``stabilized`` reports whether the last two radii
    produced hulls within Hausdorff distance 1e-4.
    """
    if expr.dim != 1:
        raise DimensionError("clarke_generators needs a scalar expression")
    tape = expr.tape
    x = tape._check_point(point)
    tape.forward(x)  # DomainError if x is outside the domain
    if exact is None:
        exact = expr.arity == 1 and is_piecewise_polynomial(expr)
    if exact:
        if expr.arity != 1:
            raise DimensionError("exact hulls are only available for univariate expressions")
        return _exact_univariate(expr, x)

    radii = tuple(float(r) for r in radii)
    if any(r <= 0 for r in radii) or any(a <= b for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly decreasing")
    if _boundary_gap(tape, x) <= radii[0]:
        warnings.warn(
            "a primitive with unbounded slope has its domain edge within the sampling radius",
            NonLipschitzWarning,
            stacklevel=2,
        )
    n = expr.arity
    per_radius = []
    for idx, r in enumerate(radii):
        rng = stream(rng_seed, idx)
        u = rng.standard_normal((samples_per_radius, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        grads = []
        for ui in u:
            ref = x + r * ui
            try:
                tape.forward(ref)
            except DomainError:
                continue
            try:
                g, _ = tape.vjp(x, np.ones(1), DEFAULT_POLICY, ref=ref)
            except NonLipschitzError:
                g, _ = tape.vjp(ref, np.ones(1), DEFAULT_POLICY)
            grads.append(g)
        if grads:
            per_radius.append(dedupe(np.array(grads)))
    if not per_radius:
        raise DomainError("no sampled point near the origin lies in the domain")
    gens = dedupe(np.vstack(per_radius))
    stabilized = None
    if len(per_radius) >= 2:
        stabilized = hausdorff(per_radius[-1], per_radius[-2]) <= STABLE_TOL
    return SubgradientHull(gens, x, False, radii, rng_seed, stabilized, tuple(per_radius))


def is_clarke_critical(expr: Expr, point, tol: float = 1e-6, **kwargs) -> bool:
    """Whether ``0`` lies in the Clarke subdifferential up to ``tol``."""
    hull = clarke_generators(expr, point, **kwargs)
    return min_norm_element(hull).distance <= tol


def goldstein_hull(
    expr: Expr,
    point,
    eps: float,
    samples: int = SAMPLES_PER_RADIUS,
    rng_seed: int = 0,
) -> SubgradientHull:
    """Gradients at ``point`` and at points drawn uniformly from the ``eps``-ball.

    This approximates the Goldstein ``eps``-subdifferential, the right
    object near a kink that an iterate approaches without landing on.
    """
    if expr.dim != 1:
        raise DimensionError("goldstein_hull needs a scalar expression")
    tape = expr.tape
    x = tape._check_point(point)
    n = x.shape[0]
    rng = stream(rng_seed, 0)
    u = rng.standard_normal((samples, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    u *= eps * rng.random((samples, 1)) ** (1.0 / n)
    grads = [tape.vjp(x, np.ones(1), DEFAULT_POLICY)[0]]
    for ui in u:
        try:
            grads.append(tape.vjp(x + ui, np.ones(1), DEFAULT_POLICY)[0])
        except DomainError:
            continue
    return SubgradientHull(dedupe(np.array(grads)), x, False, (float(eps),), rng_seed)
