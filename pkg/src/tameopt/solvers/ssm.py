"""Stochastic subgradient method ``x_{k+1} = x_k + gamma_k (y_k + xi_k)``."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, DivergenceError
from ..expr.networks import split_risk
from ..expr.nodes import Expr
from ..subdiff.ad import DEFAULT_POLICY, KinkPolicy, value_and_grad
from ..subdiff.clarke import clarke_generators
from ..subdiff.minnorm import min_norm_element
from .noise import NoiseModel
from .schedule import StepSchedule, validate_schedule
from .trajectory import Trajectory

DIVERGENCE_BOUND = 1e8


def _subgradient(expr: Expr, x, source: str, policy: KinkPolicy):
    if source == "ad":
        f, g, _ = value_and_grad(expr, x, policy)
        return f, g
    if source == "clarke":
        f = float(expr.tape.value(x)[0])
        return f, min_norm_element(clarke_generators(expr, x)).point
    raise ValueError(f"unknown subgradient source {source!r}")


def ssm_run(
    objective: Expr,
    x0,
    schedule: StepSchedule,
    noise: NoiseModel | None = None,
    iters: int = 1000,
    source: str = "ad",
    policy: KinkPolicy = DEFAULT_POLICY,
    bound: float = DIVERGENCE_BOUND,
    allow_invalid: bool = False,
) -> Trajectory:
    """Run the subgradient recursion for ``iters`` steps.

    ``source='ad'`` uses the selection derivative under ``policy``;
    ``source='clarke'`` uses the min-norm element of the sampled Clarke
    hull. Raises :class:`DivergenceError` (carrying the partial trajectory)
    once ``||x_k||`` exceeds ``bound``.
    """
    noise = noise or NoiseModel.none()
    if not allow_invalid and not validate_schedule(schedule).valid and schedule.family != "custom":
        raise ValueError(f"schedule rejected: {validate_schedule(schedule).reason}")
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if x.shape[0] != objective.arity:
        raise DimensionError(f"x0 has length {x.shape[0]}, objective arity is {objective.arity}")
    n = x.shape[0]
    terms = None
    if noise.kind == "minibatch":
        terms = split_risk(objective)
        if terms is None:
            raise ValueError("minibatch noise needs an empirical-risk objective")
    xs = np.empty((iters + 1, n))
    fs = np.empty(iters + 1)
    ys = np.empty((iters, n))
    xis = np.zeros((iters, n))
    gammas = np.empty(iters)
    xs[0] = x
    reason = "max-iterations"
    k = 0
    for k in range(iters):
        f, g = _subgradient(objective, x, source, policy)
        fs[k] = f
        ys[k] = -g
        if noise.kind == "gaussian":
            xis[k] = noise.gaussian_draw(k, n)
        elif noise.kind == "minibatch":
            idx = noise.batch_indices(k, len(terms))
            bg = np.zeros(n)
            for i in idx:
                bg += value_and_grad(terms[i], x, policy)[1]
            xis[k] = g - bg / len(idx)
        gammas[k] = schedule(k + 1)
        x = x + gammas[k] * (ys[k] + xis[k])
        xs[k + 1] = x
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > bound:
            fs[k + 1] = np.nan
            traj = _pack(xs[: k + 2], fs[: k + 2], ys[: k + 1], xis[: k + 1], gammas[: k + 1], schedule, noise, source)
            traj.reason = "diverged"
            raise DivergenceError(f"|x_k| exceeded {bound:g} at k = {k + 1}", traj)
    fs[iters] = float(objective.tape.value(x)[0])
    traj = _pack(xs, fs, ys, xis, gammas, schedule, noise, source)
    traj.reason = reason
    return traj


def _pack(xs, fs, ys, xis, gammas, schedule, noise, source) -> Trajectory:
    return Trajectory(
        xs,
        fs,
        ys,
        xis,
        gammas,
        method=f"ssm-{source}",
        seed=noise.seed,
        schedule=schedule.to_dict(),
        noise=noise.to_dict(),
    )
