"""Quasistatic time stepping: each step is an incremental contact problem."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..vi import SolveStatus
from .contact import ContactData, ContactNotConverged, ContactProblem, StepResult


@dataclass
class EvolveStep:
    index: int
    result: StepResult
    w_t: np.ndarray
    dissipation: float  # sum of w (-f t_n) |u_t - w_t|
    friction_work: float  # -sum of w t_t (u_t - w_t)


def step_dissipation(problem: ContactProblem, result: StepResult, w_t) -> tuple[float, float]:
    w = problem.chain.weights
    f = problem.data.friction
    slip = result.u_t - np.asarray(w_t, dtype=float)
    diss = float(np.sum(w * (-f * result.t_n) * np.abs(slip)))
    work = float(-np.sum(w * result.t_t * slip))
    return diss, work


def evolve_quasistatic(problem: ContactProblem, steps: Sequence[ContactData] | Callable[[int], ContactData],
                       n_steps: int | None = None, mode: str = "isotropic", continue_on_failure: bool = False,
                       warm_start: bool = True, **step_kw) -> list[EvolveStep]:
    """Run ``n_steps`` contact steps, feeding each step the previous tangential trace as ``w_t``.

    ``steps`` is a sequence of per-step data or a callable ``k -> data``.  The
    ``w_t`` of the first step is taken from its data.  The outer iteration of
    step ``k`` starts from the traction and multipliers of step ``k - 1``.
    """
    if callable(steps):
        if n_steps is None:
            raise ValueError("n_steps is required with a step callable")
        get = steps
    else:
        steps = list(steps)
        n_steps = len(steps) if n_steps is None else n_steps
        get = steps.__getitem__
    if n_steps < 1:
        raise ValueError("need at least one step")
    out = []
    prev = None
    for k in range(n_steps):
        data = get(k)
        if prev is not None:
            data = data.replace(w_t=prev.u_t.copy())
        problem.set_data(data)
        kw = dict(step_kw)
        if warm_start and prev is not None:
            kw.setdefault("t0", prev.t)
            kw.setdefault("z0", prev.z)
        res = problem.solve_contact_step(mode, **kw)
        diss, work = step_dissipation(problem, res, data.w_t)
        out.append(EvolveStep(k, res, data.w_t.copy(), diss, work))
        if res.report.status is not SolveStatus.SOLVED and not continue_on_failure:
            raise ContactNotConverged(f"step {k} did not converge", res.report)
        prev = res
    return out
