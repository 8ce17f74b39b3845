"""Test problems: meshes, bottoms, initial states and boundary data.

Discontinuous data is assigned per element (by centroid) so that jumps
sit on element interfaces; each element samples its own side of the jump.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dg import (
    BoundarySpec,
    SemiDiscretization,
    compute_manufactured_source,
    manufactured_bottom,
    manufactured_state,
)
from .geometry import MeshGeometry, build_geometry
from .mesh import QuadMesh, SinusoidalPerturbation, generate_structured_mesh, structured_corner_id
from .physics import PhysicsParams, conserved
from .spectral import operators


class UnknownScenarioError(KeyError):
    pass


@dataclass
class Problem:
    """A fully specified run: mesh, bottom, initial state and boundary data."""

    name: str
    mesh: QuadMesh
    N: int
    params: PhysicsParams
    flux_mode: str
    bottom: Callable[[QuadMesh, MeshGeometry], np.ndarray]
    initial: Callable[[QuadMesh, MeshGeometry, np.ndarray], np.ndarray]
    bc: BoundarySpec = field(default_factory=BoundarySpec)
    source: Callable | None = None
    reference_H: Callable | None = None  # (mesh, geo, b, t) -> nodal H

    def setup(self):
        """Returns ``(geo, b, W0, semi)``."""
        geo = build_geometry(self.mesh, operators(self.N))
        b = np.asarray(self.bottom(self.mesh, geo), dtype=float)
        W0 = np.asarray(self.initial(self.mesh, geo, b), dtype=float)
        semi = SemiDiscretization(self.mesh, geo, b, self.params, self.flux_mode, self.bc, self.source)
        return geo, b, W0, semi


# -- meshes ---------------------------------------------------------------

def curved_box_mesh(nx=4, ny=4, amplitude=0.05, periodic=(True, True), boundary=("wall",) * 4) -> QuadMesh:
    """Curved mesh of [-1, 1]^2; the lines x = 0 and y = 0 stay straight."""
    pert = SinusoidalPerturbation(amplitude, 2) if amplitude else None
    return generate_structured_mesh(nx, ny, (-1.0, 1.0, -1.0, 1.0), pert, periodic, boundary)


def dam_curve(y):
    return y * y / 25.0 - 0.25


@dataclass(frozen=True)
class ParabolicDamMapping:
    """Bends the grid line X = 0 onto the dam curve, fading out linearly by |X| = ``width``.

    Grid lines |X| >= ``width`` stay straight, so a bottom jump at x = ``width``
    falls on element interfaces.
    """

    width: float = 2.25

    def __call__(self, X, Y, domain):
        fade = np.maximum(0.0, 1.0 - np.abs(X) / self.width)
        return X + dam_curve(Y) * fade, Y


def parabolic_dam_mesh(n=40, breach=(-0.5, 0.5), dirichlet=True) -> QuadMesh:
    """[-5, 5]^2 mesh with a thin wall along the dam curve, open over ``breach`` in y.

    ``n`` must make both 0 and 2.25 grid lines (n a multiple of 40).
    ``breach=None`` closes the dam completely.
    """
    if n % 40:
        raise ValueError("parabolic dam mesh needs n divisible by 40 so interfaces hit x = 0 and x = 2.25")
    side = "dirichlet" if dirichlet else "wall"
    mesh = generate_structured_mesh(n, n, (-5.0, 5.0, -5.0, 5.0), ParabolicDamMapping(), (False, True),
                                    ("wall", side, "wall", side), curve_order=2)
    i0 = n // 2
    ys = np.linspace(-5.0, 5.0, n + 1)
    walls = []
    for j in range(n):
        open_ = breach is not None and ys[j] >= breach[0] - 1e-12 and ys[j + 1] <= breach[1] + 1e-12
        if not open_:
            walls.append((structured_corner_id(n, i0, j), structured_corner_id(n, i0, j + 1)))
    return mesh.with_walls(walls)


# -- bottoms ---------------------------------------------------------------

def flat_bottom(mesh, geo):
    return np.zeros_like(geo.x)


def smooth_bottom(mesh, geo):
    return manufactured_bottom(geo.x, geo.y)


def single_element_bottom(element: int = 5):
    """The smooth bottom restricted to one element, zero elsewhere."""
    def bottom(mesh, geo):
        b = np.zeros_like(geo.x)
        b[element] = manufactured_bottom(geo.x[element], geo.y[element])
        return b
    return bottom


def box_bottom(mesh, geo):
    """Smooth-topped box of half width 1 centred at (5, 5), zero outside."""
    c = mesh.centroids()
    inside = (np.abs(c[:, 0] - 5.0) < 1.0) & (np.abs(c[:, 1] - 5.0) < 1.0)
    b = 2.0 - (geo.x - 5.0) ** 2 - (geo.y - 5.0) ** 2
    return np.where(inside[:, None, None], b, 0.0)


def log_bottom(mesh, geo):
    """2 + ln(x - 1.25) for x >= 2.25, zero upstream."""
    c = mesh.centroids()
    down = c[:, 0] >= 2.25
    with np.errstate(invalid="ignore", divide="ignore"):
        b = 2.0 + np.log(np.maximum(geo.x - 1.25, 1e-300))
    return np.where(down[:, None, None], b, 0.0)


# -- initial states -------------------------------------------------------

def at_rest(H_of_element):
    """Zero velocity and free surface ``H_of_element(mesh)[k]`` per element."""
    def initial(mesh, geo, b):
        H = np.asarray(H_of_element(mesh), dtype=float)[:, None, None]
        return conserved(H - b, 0.0, 0.0)
    return initial


def split_x(x0, left, right):
    return lambda mesh: np.where(mesh.centroids()[:, 0] < x0, left, right)


def split_dam(left, right):
    def H(mesh):
        c = mesh.centroids()
        return np.where(c[:, 0] < dam_curve(c[:, 1]), left, right)
    return H


def gravity_wave_state(x, y, p: PhysicsParams, A=0.1, m=2, n=0):
    k = 2 * np.pi * m
    l = (2 * n + 1) * np.pi  # noqa: E741
    omega = np.sqrt(p.g * (k * k + l * l))
    h = 1.0 + A * np.sin(l * y) * np.sin(k * x)
    u = -k * A * p.g / omega * np.sin(l * y) * np.sin(k * x)
    v = l * A * p.g / omega * np.cos(l * y) * np.cos(k * x)
    return conserved(h, u, v)


# -- scenario catalogue ---------------------------------------------------

def _constant_H(value):
    return lambda mesh, geo, b, t: np.full_like(geo.x, value)


def _elementwise_H(H_of_element):
    return lambda mesh, geo, b, t: np.broadcast_to(
        np.asarray(H_of_element(mesh), dtype=float)[:, None, None], geo.x.shape).copy()


def build_scenario(name: str, N: int | None = None, g: float | None = None, flux: str | None = None,
                   nx: int | None = None, amplitude: float | None = None) -> Problem:
    """Problem ``name`` with optional overrides of order, gravity, flux and mesh size."""
    if name not in SCENARIOS:
        raise UnknownScenarioError(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    d = dict(SCENARIO_DEFAULTS[name])
    d.update({k: v for k, v in dict(N=N, g=g, flux=flux, nx=nx, amplitude=amplitude).items() if v is not None})
    return SCENARIOS[name](d)


def _manufactured(d):
    p = PhysicsParams(g=d["g"])
    mesh = curved_box_mesh(d["nx"], d["nx"], d["amplitude"], (False, False), ("dirichlet",) * 4)
    return Problem("manufactured", mesh, d["N"], p, d["flux"], smooth_bottom,
                   lambda mesh, geo, b: manufactured_state(geo.x, geo.y, 0.0),
                   BoundarySpec(dirichlet=lambda x, y, t, b: manufactured_state(x, y, t)),
                   source=compute_manufactured_source,
                   reference_H=lambda mesh, geo, b, t: 8.0 + np.cos(geo.x) * np.sin(geo.y) * np.cos(t))


def _free_stream(d):
    p = PhysicsParams(g=d["g"])
    mesh = curved_box_mesh(d["nx"], d["nx"], d["amplitude"])
    return Problem("free_stream", mesh, d["N"], p, d["flux"], flat_bottom,
                   lambda mesh, geo, b: np.broadcast_to(np.array([2.0, 0.6, -0.4]), geo.x.shape + (3,)).copy(),
                   reference_H=_constant_H(2.0))


def _dam_break(bottom):
    def make(d):
        p = PhysicsParams(g=d["g"])
        mesh = curved_box_mesh(d["nx"], d["nx"], d["amplitude"])
        return Problem(d["name"], mesh, d["N"], p, d["flux"], bottom, at_rest(split_x(0.0, 5.0, 4.0)))
    return make


def _lake_at_rest(d):
    p = PhysicsParams(g=d["g"])
    mesh = curved_box_mesh(d["nx"], d["nx"], d["amplitude"])
    return Problem("lake_at_rest_discontinuous", mesh, d["N"], p, d["flux"], single_element_bottom(5),
                   at_rest(lambda mesh: np.full(mesh.n_elements, 5.0)), reference_H=_constant_H(5.0))


def _dam_break_box(d):
    p = PhysicsParams(g=d["g"])
    n = d["nx"]
    if n % 10:
        raise ValueError("dam_break_box needs nx divisible by 10 so the box and the dam sit on interfaces")
    mesh = generate_structured_mesh(n, n, (0.0, 10.0, 0.0, 10.0), None, (False, True),
                                    ("wall", "dirichlet", "wall", "dirichlet"))

    def inflow(x, y, t, b):
        H = np.where(x < 5.0, 3.5, 2.5)
        return conserved(H - b, 0.0, 0.0)

    return Problem("dam_break_box", mesh, d["N"], p, d["flux"], box_bottom, at_rest(split_x(5.0, 3.5, 2.5)),
                   BoundarySpec(dirichlet=inflow))


def _gravity_wave(d):
    p = PhysicsParams(g=d["g"])
    n = d["nx"]
    mesh = generate_structured_mesh(n, n, (-0.5, 0.5, -0.5, 0.5), None, (True, False), ("wall",) * 4)
    return Problem("gravity_wave", mesh, d["N"], p, d["flux"], flat_bottom,
                   lambda mesh, geo, b: gravity_wave_state(geo.x, geo.y, p))


def _parabolic(at_rest_only):
    def make(d):
        p = PhysicsParams(g=d["g"])
        H = split_dam(10.0, 5.0)
        if at_rest_only:
            mesh = parabolic_dam_mesh(d["nx"], breach=None, dirichlet=False)
            return Problem(d["name"], mesh, d["N"], p, d["flux"], log_bottom, at_rest(H),
                           reference_H=_elementwise_H(H))
        mesh = parabolic_dam_mesh(d["nx"])

        def outer(x, y, t, b):
            return conserved(np.where(x < 0.0, 10.0, 5.0) - b, 0.0, 0.0)

        return Problem(d["name"], mesh, d["N"], p, d["flux"], log_bottom, at_rest(H), BoundarySpec(dirichlet=outer))
    return make


SCENARIOS = {
    "manufactured": _manufactured,
    "free_stream": _free_stream,
    "dam_break_flat": _dam_break(flat_bottom),
    "dam_break_bump": _dam_break(single_element_bottom(5)),
    "lake_at_rest_discontinuous": _lake_at_rest,
    "dam_break_box": _dam_break_box,
    "gravity_wave": _gravity_wave,
    "parabolic_dam": _parabolic(False),
    "parabolic_dam_at_rest": _parabolic(True),
}

_BASE = dict(N=5, g=1.0, flux="es", nx=4, amplitude=0.05, t_end=1.0, dt=None, cfl=None)
SCENARIO_DEFAULTS = {
    "manufactured": dict(_BASE, N=6, dt=1 / 2000, t_end=0.5),
    "free_stream": dict(_BASE, dt=1 / 1000, t_end=0.1),
    "dam_break_flat": dict(_BASE, flux="ec", dt=1 / 1000),
    "dam_break_bump": dict(_BASE, flux="ec", dt=1 / 1000),
    "lake_at_rest_discontinuous": dict(_BASE, dt=1 / 1000),
    "dam_break_box": dict(_BASE, N=4, nx=40, amplitude=0.0, cfl=0.25),
    "gravity_wave": dict(_BASE, N=3, nx=50, amplitude=0.0, cfl=0.25, t_end=2.0),
    "parabolic_dam": dict(_BASE, N=3, nx=40, amplitude=0.0, dt=1 / 1500, t_end=1.5),
    "parabolic_dam_at_rest": dict(_BASE, N=3, nx=40, amplitude=0.0, dt=1 / 5000, t_end=5.0),
}
for _name, _d in SCENARIO_DEFAULTS.items():
    _d["name"] = _name
