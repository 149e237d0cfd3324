"""Post-hoc analysis of trajectories: limit points, criticality, identification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..expr.nodes import Expr
from ..subdiff.clarke import goldstein_hull
from ..subdiff.minnorm import min_norm_element
from .trajectory import Trajectory

TAIL_FRACTION = 0.1
RADIUS_FACTOR = 10.0


@dataclass
class LimitPoint:
    center: np.ndarray
    size: int
    value: float
    distance: float
    critical: bool


@dataclass
class DiagnosticReport:
    limit_points: list = field(default_factory=list)
    tail_start: int = 0
    radius: float = 0.0
    f_tail_variation: float = np.nan
    f_convergent: bool = False
    unbounded: bool = False
    descent_profile: float | None = None
    value_drop: float | None = None
    descent_ratio: float | None = None

    @property
    def all_critical(self) -> bool:
        return bool(self.limit_points) and all(p.critical for p in self.limit_points)


def tail_clusters(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage clusters at ``radius``; returns index arrays.

    Points are first binned on a grid of spacing ``radius / (2 sqrt(n))``
    (points sharing a bin are within ``radius / 2`` and always linked), then
    bin centres closer than ``radius`` are joined.
    """
    points = np.atleast_2d(points)
    n = points.shape[1]
    h = radius / (2.0 * np.sqrt(n))
    keys = np.floor(points / h).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    centres = (uniq + 0.5) * h
    pairs = cKDTree(centres).query_pairs(radius, output_type="ndarray")
    m = len(uniq)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m)) if len(pairs) else coo_matrix((m, m))
    _, labels = connected_components(graph, directed=False)
    point_labels = labels[inverse]
    return [np.flatnonzero(point_labels == c) for c in np.unique(point_labels)]


def diagnose_trajectory(
    traj: Trajectory,
    objective: Expr,
    tol: float = 1e-2,
    f_tol: float = 1e-3,
    seed: int = 0,
) -> DiagnosticReport:
    """Limit points of the tail, their criticality and the convergence of ``f(x_k)``.

    The tail is the last tenth of the iterates, clustered at radius
    ``10 gamma_tail``. Each cluster centre is tested for criticality with
    gradients sampled in the ball of that radius. For noiseless runs the
    report also compares ``sum gamma_k ||y_k||^2`` with ``f(x_0) - f(x_K)``.
    """
    rep = DiagnosticReport()
    K = traj.iterations
    rep.tail_start = int(np.floor((1 - TAIL_FRACTION) * K))
    tail = traj.xs[rep.tail_start :]
    gamma_tail = float(traj.gammas[-1]) if K else 0.0
    rep.radius = max(RADIUS_FACTOR * gamma_tail, 1e-12)
    fs = traj.fs[rep.tail_start :]
    fs = fs[np.isfinite(fs)]
    rep.f_tail_variation = float(fs.max() - fs.min()) if len(fs) else np.inf
    rep.f_convergent = bool(rep.f_tail_variation <= f_tol)

    if traj.reason == "diverged":
        rep.unbounded = True
    elif len(tail) > 1:
        drift = float(np.linalg.norm(tail[-1] - tail[0]))
        path = float(np.sum(np.linalg.norm(np.diff(tail, axis=0), axis=1)))
        growth = float(np.linalg.norm(tail[-1]) - np.linalg.norm(tail[0]))
        rep.unbounded = growth > 2 * rep.radius and drift >= 0.5 * path
    if not rep.unbounded and len(tail):
        for idx in tail_clusters(tail, rep.radius):
            c = tail[idx].mean(axis=0)
            hull = goldstein_hull(objective, c, rep.radius, rng_seed=seed)
            d = min_norm_element(hull).distance
            value = float(objective.tape.value(c)[0])
            rep.limit_points.append(LimitPoint(c, len(idx), value, d, d <= tol))
        rep.limit_points.sort(key=lambda p: -p.size)

    if traj.noise.get("kind", "none") == "none" and K:
        ynorm2 = np.sum(traj.ys**2, axis=1)
        rep.descent_profile = float(np.sum(traj.gammas * ynorm2))
        rep.value_drop = float(traj.fs[0] - traj.fs[-1])
        if rep.value_drop != 0:
            rep.descent_ratio = rep.descent_profile / rep.value_drop
    return rep


NEVER = None


def detect_stratum_identification(traj: Trajectory, zero_tol: float = 0.0, min_hold: int = 100) -> int | None:
    """First ``k`` from which the sign pattern of ``x_k`` no longer changes.

    A coordinate counts as zero when ``|x_i| <= zero_tol`` (exact zero by
    default). The final pattern must be held for at least
    ``min(min_hold, max(1, K // 10))`` iterations, otherwise ``None`` (never)
    is returned.
    """
    signs = np.where(np.abs(traj.xs) <= zero_tol, 0, np.sign(traj.xs)).astype(int)
    K = len(signs) - 1
    same = np.all(signs == signs[-1], axis=1)
    changed = np.flatnonzero(~same)
    k = 0 if len(changed) == 0 else int(changed[-1]) + 1
    if K - k < min(min_hold, max(1, K // 10)):
        return NEVER
    return k


def longest_zero_run(traj: Trajectory, coord: int) -> int:
    """Longest stretch of consecutive iterates with ``x_k[coord] == 0`` exactly."""
    z = traj.xs[:, coord] == 0.0
    best = run = 0
    for v in z:
        run = run + 1 if v else 0
        best = max(best, run)
    return best
