"""Subgradient, proximal-gradient and BFGS paths on one LASSO instance."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..solvers.diagnostics import detect_stratum_identification, longest_zero_run
from ..solvers.instances import LassoInstance
from ..solvers.nsbfgs import nsbfgs_run
from ..solvers.prox import prox_grad_run
from ..solvers.schedule import StepSchedule
from ..solvers.ssm import ssm_run
from ..solvers.trajectory import Trajectory, fmt
from ..subdiff.lasso import lasso_expr, lasso_value
from .svg import Figure

METHODS = ("ssm", "prox", "nsbfgs")
DEFAULT_ITERS = {"ssm": 5000, "prox": 500, "nsbfgs": 100}
SUMMARY_HEADER = ["method", "iterations", "reason", "f_final", "f_star", "k_star", "zero_run_x0"]


@dataclass
class MethodResult:
    method: str
    trajectory: Trajectory
    k_star: int | None
    zero_run: int
    f_star: float

    def row(self) -> list[str]:
        t = self.trajectory
        return [
            self.method,
            str(t.iterations),
            t.reason,
            fmt(t.fs[-1]),
            fmt(self.f_star),
            "never" if self.k_star is None else str(self.k_star),
            str(self.zero_run),
        ]


def run_method(method: str, inst: LassoInstance, iters: int | None = None, schedule: StepSchedule | None = None) -> Trajectory:
    iters = DEFAULT_ITERS[method] if iters is None else int(iters)
    if method == "ssm":
        return ssm_run(lasso_expr(inst.A, inst.b, inst.lam), inst.x0, schedule or StepSchedule.power(1.0, 1.0), iters=iters)
    if method == "prox":
        return prox_grad_run(inst.A, inst.b, inst.lam, inst.x0, iters=iters)
    if method == "nsbfgs":
        return nsbfgs_run(lasso_expr(inst.A, inst.b, inst.lam), inst.x0, iters=iters)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def lasso_compare(inst: LassoInstance, methods=METHODS, iters: dict | None = None,
                  schedule: StepSchedule | None = None, threads: int = 1) -> list[MethodResult]:
    """Run each method from ``inst.x0``; runs are independent and may overlap."""
    iters = iters or {}
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    f_star = lasso_value(inst.A, inst.b, inst.lam, inst.minimizer())

    def one(m):
        t = run_method(m, inst, iters.get(m), schedule)
        return MethodResult(m, t, detect_stratum_identification(t), longest_zero_run(t, 0), f_star)

    if threads <= 1:
        return [one(m) for m in methods]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, methods))


def path_figure(results: list[MethodResult], inst: LassoInstance) -> Figure:
    """Iterate paths in the first two coordinates with the stratum ``x0 = 0``."""
    fig = Figure(title="LASSO iterate paths", xlabel="x0", ylabel="x1" if inst.A.shape[1] > 1 else "f")
    for r in results:
        xs = r.trajectory.xs
        y = xs[:, 1] if xs.shape[1] > 1 else r.trajectory.fs
        fig.line(r.method, xs[:, 0], y)
    fig.vlines.append((0.0, "x0 = 0"))
    xstar = inst.minimizer()
    fig.points.append((float(xstar[0]), float(xstar[1]) if len(xstar) > 1 else 0.0, "x*"))
    return fig
