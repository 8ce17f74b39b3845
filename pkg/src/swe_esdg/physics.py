"""Pointwise shallow water state algebra.

States are numpy arrays whose last axis holds the conserved variables
``(h, hu, hv)``; every function broadcasts over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DryStateError(ValueError):
    """A water height at or below the positivity floor was encountered."""


@dataclass(frozen=True)
class PhysicsParams:
    g: float = 1.0
    h_min: float = 1e-10  # only used to raise DryStateError, never to clip

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"gravitational acceleration must be positive, got {self.g}")


@dataclass(frozen=True)
class EigenSystem:
    """Entropy-scaled eigen-decomposition of one flux Jacobian.

    ``R`` has the right eigenvectors as columns, ``lam`` the matching
    eigenvalues and ``Z`` the diagonal scaling with ``R Z R^T = H``.
    """

    R: np.ndarray
    lam: np.ndarray
    Z: np.ndarray
    direction: str


def check_wet(h, p: PhysicsParams):
    h = np.asarray(h)
    ok = h > p.h_min
    if not np.all(ok):
        idx = np.unravel_index(np.argmin(np.where(ok, np.inf, 0.0)), h.shape) if h.ndim else ()
        raise DryStateError(f"water height {h[idx]!r} <= h_min={p.h_min} at index {idx}")


def primitives(w, p: PhysicsParams | None = None):
    """Split ``w`` into ``(h, u, v)``."""
    w = np.asarray(w, dtype=float)
    h = w[..., 0]
    if p is not None:
        check_wet(h, p)
    return h, w[..., 1] / h, w[..., 2] / h


def conserved(h, u, v) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    return np.stack(np.broadcast_arrays(h, h * u, h * v), axis=-1)


def physical_flux_x(w, p: PhysicsParams) -> np.ndarray:
    h, u, v = primitives(w, p)
    hu = h * u
    return np.stack([hu, hu * u + 0.5 * p.g * h * h, hu * v], axis=-1)


def physical_flux_y(w, p: PhysicsParams) -> np.ndarray:
    h, u, v = primitives(w, p)
    hv = h * v
    return np.stack([hv, hv * u, hv * v + 0.5 * p.g * h * h], axis=-1)


def entropy_variables(w, b, p: PhysicsParams) -> np.ndarray:
    """q = (g (h + b) - (u^2 + v^2) / 2, u, v)."""
    h, u, v = primitives(w, p)
    q1 = p.g * (h + b) - 0.5 * (u * u + v * v)
    return np.stack(np.broadcast_arrays(q1, u, v), axis=-1)


def conserved_from_entropy(q, b, p: PhysicsParams) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    u, v = q[..., 1], q[..., 2]
    h = q[..., 0] / p.g - b + (u * u + v * v) / (2.0 * p.g)
    check_wet(h, p)
    return conserved(h, u, v)


def total_energy(w, b, p: PhysicsParams):
    """Mathematical entropy e = h (u^2 + v^2) / 2 + g h^2 / 2 + g h b."""
    h, u, v = primitives(w, p)
    return 0.5 * h * (u * u + v * v) + 0.5 * p.g * h * h + p.g * h * b


def entropy_fluxes(w, b, p: PhysicsParams):
    h, u, v = primitives(w, p)
    kin = 0.5 * h * (u * u + v * v)
    pot = p.g * h * (h + b)
    return kin * u + pot * u, kin * v + pot * v


def entropy_potential(w, p: PhysicsParams):
    """Per-direction entropy potential (g h^2 u / 2, g h^2 v / 2)."""
    h, u, v = primitives(w, p)
    return 0.5 * p.g * h * h * u, 0.5 * p.g * h * h * v


def entropy_jacobian(w, p: PhysicsParams) -> np.ndarray:
    """H = dw/dq, symmetric positive definite for wet states."""
    h, u, v = primitives(w, p)
    one = np.ones_like(h)
    gh = p.g * h
    rows = [
        [one, u, v],
        [u, gh + u * u, u * v],
        [v, u * v, gh + v * v],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2) / p.g


def flux_jacobian(w, direction: str, p: PhysicsParams) -> np.ndarray:
    h, u, v = primitives(w, p)
    zero, one = np.zeros_like(h), np.ones_like(h)
    c2 = p.g * h
    if direction == "x":
        rows = [[zero, one, zero], [c2 - u * u, 2 * u, zero], [-u * v, v, u]]
    elif direction == "y":
        rows = [[zero, zero, one], [-u * v, v, u], [c2 - v * v, zero, 2 * v]]
    else:
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def eigensystem_primitive(h, u, v, direction: str, p: PhysicsParams) -> EigenSystem:
    """Eigen-decomposition at the primitive state (h, u, v)."""
    h, u, v = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (h, u, v)))
    check_wet(h, p)
    c = np.sqrt(p.g * h)
    zero, one = np.zeros_like(h), np.ones_like(h)
    if direction == "x":
        lam = np.stack([u + c, u, u - c], axis=-1)
        rows = [[one, zero, one], [u + c, zero, u - c], [v, one, v]]
    elif direction == "y":
        lam = np.stack([v + c, v, v - c], axis=-1)
        rows = [[one, zero, one], [u, one, u], [v + c, zero, v - c]]
    else:
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")
    R = np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
    s = 1.0 / (2.0 * p.g)
    Z = np.stack([np.full_like(h, s), h, np.full_like(h, s)], axis=-1)
    return EigenSystem(R=R, lam=lam, Z=Z, direction=direction)


def eigensystem(w_avg, direction: str, p: PhysicsParams) -> EigenSystem:
    h, u, v = primitives(w_avg, p)
    return eigensystem_primitive(h, u, v, direction, p)


def dissipation_matrix(es: EigenSystem) -> np.ndarray:
    """K = R |Lambda| Z R^T (symmetric positive semi-definite)."""
    scale = np.abs(es.lam) * es.Z
    return np.einsum("...ik,...k,...jk->...ij", es.R, scale, es.R)
