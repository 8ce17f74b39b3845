"""Five-stage fourth-order low-storage Runge-Kutta integration (2N registers)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .physics import PhysicsParams, check_wet

Rhs = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RKScheme:
    """Williamson-form coefficients: ``k = a k + dt f(t + c dt, y); y += b k``."""

    a: tuple
    b: tuple
    c: tuple

    @property
    def stages(self) -> int:
        return len(self.b)


# Carpenter & Kennedy (1994), solution 3
LSRK54 = RKScheme(
    a=(0.0,
       -567301805773.0 / 1357537059087.0,
       -2404267990393.0 / 2016746695238.0,
       -3550918686646.0 / 2091501179385.0,
       -1275806237668.0 / 842570457699.0),
    b=(1432997174477.0 / 9575080441755.0,
       5161836677717.0 / 13612068292357.0,
       1720146321549.0 / 2090206949498.0,
       3134564353537.0 / 4481467310338.0,
       2277821191437.0 / 14882151754819.0),
    c=(0.0,
       1432997174477.0 / 9575080441755.0,
       2526269341429.0 / 6820363962896.0,
       2006345519317.0 / 3224310063776.0,
       2802321613138.0 / 2924317926251.0),
)


def lsrk54_step(y: np.ndarray, rhs: Rhs, t: float, dt: float, scheme: RKScheme = LSRK54) -> np.ndarray:
    """Advance ``y`` by one step; returns a new array, ``y`` is untouched."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    y = np.array(y, dtype=float, copy=True)
    k = np.zeros_like(y)
    for a, b, c in zip(scheme.a, scheme.b, scheme.c):
        k = a * k + dt * rhs(t + c * dt, y)
        y += b * k
    return y


def estimate_timestep(U, geo, cfl: float, p: PhysicsParams) -> float:
    """CFL-limited step in reference coordinates.

    dt = cfl * dxi_min / max over nodes of sum_d (|V . Ja^d| + c |Ja^d|) / J,
    with ``dxi_min`` the smallest LGL node gap and ``Ja^1 = (y_eta, -x_eta)``,
    ``Ja^2 = (-y_xi, x_xi)``.
    """
    if not cfl > 0:
        raise ValueError(f"CFL number must be positive, got {cfl}")
    J = geo.J
    W = np.asarray(U, dtype=float) / J[..., None]
    h = W[..., 0]
    check_wet(h, p)
    u, v = W[..., 1] / h, W[..., 2] / h
    c = np.sqrt(p.g * h)
    speed = 0.0
    for ax, ay in ((geo.y_eta, -geo.x_eta), (-geo.y_xi, geo.x_xi)):
        speed = speed + (np.abs(u * ax + v * ay) + c * np.hypot(ax, ay)) / J
    nodes = geo.ops.nodes
    gap = float(np.min(np.diff(nodes)))
    return float(cfl * gap / np.max(speed))


@dataclass
class TimeLoopConfig:
    t_end: float
    dt: float | None = None
    cfl: float | None = None
    every: int = 1  # callback cadence in steps

    def __post_init__(self):
        if (self.dt is None) == (self.cfl is None):
            raise ValueError("give exactly one of dt and cfl")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.cfl is not None and not self.cfl > 0:
            raise ValueError(f"cfl must be positive, got {self.cfl}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.every < 1:
            raise ValueError("callback cadence must be >= 1")


def integrate(U0, rhs: Rhs, config: TimeLoopConfig, t0: float = 0.0,
              dt_fn: Callable[[np.ndarray], float] | None = None,
              callback: Callable[[float, np.ndarray, int], None] | None = None):
    """Run to ``config.t_end``; the last step is shortened to land on it exactly.

    In CFL mode ``dt_fn(U)`` supplies the step. ``callback(t, U, step)`` is
    called at the start, every ``config.every`` steps and at the end.
    Returns ``(U, t, steps)``.
    """
    if config.cfl is not None and dt_fn is None:
        raise ValueError("CFL mode needs a dt_fn")
    U = np.array(U0, dtype=float, copy=True)
    t, step = t0, 0
    if callback is not None:
        callback(t, U, step)
    # fixed-step runs count steps to avoid drift from repeated addition
    if config.dt is not None:
        n_full = int(np.floor((config.t_end - t0) / config.dt * (1 + 1e-12)))
    while t < config.t_end:
        if config.dt is not None:
            dt = config.dt if step < n_full else config.t_end - t
            t_next = t0 + (step + 1) * config.dt if step < n_full else config.t_end
        else:
            dt = min(dt_fn(U), config.t_end - t)
            t_next = t + dt
        if dt <= 1e-14 * max(1.0, abs(config.t_end)):
            break
        U = lsrk54_step(U, rhs, t, dt)
        t = min(t_next, config.t_end)
        step += 1
        if callback is not None and (step % config.every == 0 or t >= config.t_end):
            callback(t, U, step)
    return U, t, step
