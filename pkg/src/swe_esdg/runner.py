"""Drive a problem through time and collect diagnostics."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsRecord, compute_totals, l2_error
from .geometry import MeshGeometry
from .scenarios import Problem
from .timestepping import TimeLoopConfig, estimate_timestep, integrate

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    problem: Problem
    geo: MeshGeometry
    bottom: np.ndarray
    W: np.ndarray  # final unscaled state
    t: float
    steps: int
    records: list[DiagnosticsRecord] = field(default_factory=list)

    def drift(self, name: str) -> float:
        """Final minus initial value of a diagnostics column."""
        return getattr(self.records[-1], name) - getattr(self.records[0], name)


def run_problem(problem: Problem, t_end: float, dt: float | None = None, cfl: float | None = None,
                every: int = 1, on_record=None) -> RunResult:
    """Integrate ``problem`` from t = 0 to ``t_end``, recording totals every ``every`` steps."""
    loop = TimeLoopConfig(t_end=t_end, dt=dt, cfl=cfl, every=every)
    geo, b, W0, semi = problem.setup()
    p = problem.params
    records: list[DiagnosticsRecord] = []

    def record(t, U, step):
        W = semi.unscaled(U)
        l2H = float("nan")
        if problem.reference_H is not None:
            ref = problem.reference_H(problem.mesh, geo, b, t)
            l2H = l2_error(W, geo, lambda x, y, _t: ref, t, "H", b)
        rec = compute_totals(W, geo, b, p, t, l2H)
        records.append(rec)
        if on_record is not None:
            on_record(rec)
        log.debug("step %d t=%.6g minh=%.6g", step, t, rec.minh)

    dt_fn = (lambda U: estimate_timestep(U, geo, cfl, p)) if cfl is not None else None
    U, t, steps = integrate(semi.scaled(W0), semi, loop, dt_fn=dt_fn, callback=record)
    return RunResult(problem, geo, b, semi.unscaled(U), t, steps, records)
