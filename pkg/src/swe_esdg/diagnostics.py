"""Integral diagnostics, error norms and potential vorticity."""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .physics import PhysicsParams, check_wet, total_energy

QUANTITIES = ("H", "h", "hu", "hv")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    momx: float
    momy: float
    energy: float
    minh: float
    l2H: float = float("nan")

    @classmethod
    def header(cls) -> str:
        return ",".join(f.name for f in fields(cls))

    def row(self) -> str:
        return ",".join(format(float(v), ".17g") for v in astuple(self))


def quadrature_weights(geo) -> np.ndarray:
    """``J w_i w_j`` per node, shape ``(K, n, n)``."""
    w = geo.ops.weights
    return geo.J * np.outer(w, w)


def integrate(f, geo) -> float:
    """Quadrature of a nodal field; one flat sum in C order, so the result is reproducible."""
    return float(np.sum((np.asarray(f) * quadrature_weights(geo)).ravel()))


def compute_totals(W, geo, bottom, p: PhysicsParams, t: float = 0.0, l2H: float = float("nan")) -> DiagnosticsRecord:
    """Mass, momenta and total energy of the unscaled state ``W``."""
    W = np.asarray(W, dtype=float)
    check_wet(W[..., 0], p)
    b = np.broadcast_to(bottom, W.shape[:-1])
    return DiagnosticsRecord(
        t=float(t),
        mass=integrate(W[..., 0], geo),
        momx=integrate(W[..., 1], geo),
        momy=integrate(W[..., 2], geo),
        energy=integrate(total_energy(W, b, p), geo),
        minh=float(W[..., 0].min()),
        l2H=float(l2H),
    )


def select(W, bottom, quantity: str) -> np.ndarray:
    if quantity == "H":
        return W[..., 0] + bottom
    if quantity in ("h", "hu", "hv"):
        return W[..., ("h", "hu", "hv").index(quantity)]
    raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")


def l2_error(W, geo, reference, t: float = 0.0, quantity: str = "H", bottom=0.0) -> float:
    """Quadrature L2 norm of ``quantity - reference(x, y, t)`` over the mesh."""
    err = select(np.asarray(W, dtype=float), bottom, quantity) - reference(geo.x, geo.y, t)
    return float(np.sqrt(integrate(err * err, geo)))


def potential_vorticity(W, geo, ops, p: PhysicsParams | None = None) -> np.ndarray:
    """(v_x - u_y) / h from element-local polynomial derivatives."""
    W = np.asarray(W, dtype=float)
    h = W[..., 0]
    if p is not None:
        check_wet(h, p)
    u, v = W[..., 1] / h, W[..., 2] / h
    D = ops.D

    def grad(f):
        f_xi = np.einsum("im,...mj->...ij", D, f)
        f_eta = f @ D.T
        return ((geo.y_eta * f_xi - geo.y_xi * f_eta) / geo.J,
                (-geo.x_eta * f_xi + geo.x_xi * f_eta) / geo.J)

    _, u_y = grad(u)
    v_x, _ = grad(v)
    return (v_x - u_y) / h
