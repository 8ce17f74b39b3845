"""Semi-discrete split-form DG operator for the shallow water equations.

The unknown is ``U = J * w`` with shape ``(K, n, n, 3)``: element, xi node,
eta node, component. ``SemiDiscretization(t, U)`` returns ``J * dw/dt``.

One evaluation runs in two phases. First every edge computes its numerical
flux and bottom-jump term once, in the frame of its first element, and both
neighbours receive the result (the second one negated and re-ordered). Then
the element-local volume terms are added. Sharing one flux value per edge
node is what makes mass and momentum telescope exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fluxes import FluxPair, ec_volume_flux, normal_flux
from .geometry import MeshGeometry, side_slice
from .mesh import QuadMesh
from .physics import DryStateError, PhysicsParams, physical_flux_x, physical_flux_y
from .spectral import OperatorSet

VolumeFlux = Callable[[np.ndarray, np.ndarray, PhysicsParams], FluxPair]
StateFn = Callable[[np.ndarray, np.ndarray, float, np.ndarray], np.ndarray]
SourceFn = Callable[[np.ndarray, np.ndarray, float, PhysicsParams], np.ndarray]

FLUX_MODES = ("ec", "es")


# -- volume terms ---------------------------------------------------------

def _pair_mean(f):
    return 0.5 * (f[..., :, None] + f[..., None, :])


def _ec_flux_difference(w, a, b, D, p):
    """Same result as the generic path for the EC volume flux, without building F and G.

    ``a`` and ``b`` are the pair means of the metric terms, shape ``(..., n, n)``.
    """
    h = w[..., 0]
    if not np.all(h > p.h_min):
        raise DryStateError("water height at or below h_min in the volume flux")
    u, v = w[..., 1] / h, w[..., 2] / h
    h_avg = _pair_mean(h)
    pres = p.g * (h_avg * h_avg - 0.5 * _pair_mean(h * h))
    mass = a * _pair_mean(w[..., 1]) + b * _pair_mean(w[..., 2])
    out = np.empty(w.shape)
    out[..., 0] = np.einsum("im,...im->...i", D, mass)
    out[..., 1] = np.einsum("im,...im->...i", D, mass * _pair_mean(u) + a * pres)
    out[..., 2] = np.einsum("im,...im->...i", D, mass * _pair_mean(v) + b * pres)
    return 2.0 * out


def _flux_difference(w, ma, mb, D, p, volume_flux):
    """Sum_m 2 D[i, m] (<ma>_{im} F + <mb>_{im} G) along the second-to-last axis of ``w``."""
    if volume_flux is ec_volume_flux:
        return _ec_flux_difference(w, _pair_mean(ma), _pair_mean(mb), D, p)
    F = volume_flux(w[..., :, None, :], w[..., None, :, :], p)
    a = _pair_mean(ma)
    b = _pair_mean(mb)
    contra = a[..., None] * F.Fx + b[..., None] * F.Fy
    return 2.0 * np.einsum("im,...imc->...ic", D, contra)


def flux_difference_x(w, y_eta, x_eta, D, p: PhysicsParams, volume_flux: VolumeFlux = ec_volume_flux):
    """Flux difference along xi for node lines ``w[..., i, :]`` with metric slices of matching shape.

    Equivalent to ``(1/w_i) sum_m 2 Q_im (...)`` since ``Q = M D``.
    """
    return _flux_difference(np.asarray(w, float), np.asarray(y_eta, float),
                            -np.asarray(x_eta, float), D, p, volume_flux)


def flux_difference_y(w, y_xi, x_xi, D, p: PhysicsParams, volume_flux: VolumeFlux = ec_volume_flux):
    """Flux difference along eta, contravariant vector (-y_xi, x_xi)."""
    return _flux_difference(np.asarray(w, float), -np.asarray(y_xi, float),
                            np.asarray(x_xi, float), D, p, volume_flux)


def volume_terms(W, geo: MeshGeometry, D, p: PhysicsParams, volume_flux: VolumeFlux = ec_volume_flux,
                 metric_means=None):
    """Both flux differences for all elements; ``W`` is the unscaled state ``(K, n, n, 3)``.

    ``metric_means`` optionally holds the precomputed pair means used by the EC path.
    """
    if metric_means is not None and volume_flux is ec_volume_flux:
        ax, bx, ay, by = metric_means
        vx = _ec_flux_difference(np.ascontiguousarray(W.swapaxes(1, 2)), ax, bx, D, p).swapaxes(1, 2)
        return vx + _ec_flux_difference(W, ay, by, D, p)
    # xi lines: put i on the second-to-last axis
    vx = flux_difference_x(W.swapaxes(1, 2), geo.y_eta.swapaxes(1, 2), geo.x_eta.swapaxes(1, 2), D, p,
                           volume_flux).swapaxes(1, 2)
    vy = flux_difference_y(W, geo.y_xi, geo.x_xi, D, p, volume_flux)
    return vx + vy


def bottom_volume_contributions(b, geo, D) -> np.ndarray:
    """Volume bottom arrays ``db`` (components 1, 2 non-zero) for one or many elements.

    The source contribution to ``J dw/dt`` is ``-(g/2) h db``.
    """
    b = np.asarray(b, dtype=float)
    Dx = lambda f: np.einsum("im,...mj->...ij", D, f)  # noqa: E731
    De = lambda f: f @ D.T  # noqa: E731
    bx, be = Dx(b), De(b)
    db2 = geo.y_eta * bx - geo.y_xi * be + Dx(geo.y_eta * b) - De(geo.y_xi * b)
    db3 = -geo.x_eta * bx + geo.x_xi * be - Dx(geo.x_eta * b) + De(geo.x_xi * b)
    return np.stack([np.zeros_like(b), db2, db3], axis=-1)


def edge_bottom_terms(b_left, b_right, h_left, h_right):
    """Jump ``b_R - b_L`` and mean height on an edge, both in the first element's node order."""
    return np.asarray(b_right, float) - np.asarray(b_left, float), 0.5 * (np.asarray(h_left) + np.asarray(h_right))


# -- boundary states ------------------------------------------------------

@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data for the non-periodic tags of a mesh.

    ``dirichlet(x, y, t, b)`` returns the outer conserved state. Periodic
    pairs and walls need no data.
    """

    dirichlet: StateFn | None = None


def apply_boundary_state(kind: str, w_in, b_in, x=None, y=None, t: float = 0.0, normal=None,
                         state_fn: StateFn | None = None, partner=None):
    """Outer state and bottom for one boundary trace.

    ``normal`` need not be unit length. ``partner`` is the ``(w, b)`` trace
    across a periodic edge.
    """
    w_in = np.asarray(w_in, dtype=float)
    b_in = np.asarray(b_in, dtype=float)
    if kind == "wall":
        n = np.asarray(normal, dtype=float)
        nhat = n / np.linalg.norm(n, axis=-1, keepdims=True)
        mom = w_in[..., 1:]
        mn = np.sum(mom * nhat, axis=-1, keepdims=True)
        w_out = np.concatenate([w_in[..., :1], mom - 2.0 * mn * nhat], axis=-1)
        return w_out, b_in
    if kind == "dirichlet":
        if state_fn is None:
            raise ValueError("dirichlet boundary needs a state function")
        w_out = np.asarray(state_fn(np.asarray(x), np.asarray(y), t, b_in), dtype=float)
        return np.broadcast_to(w_out, w_in.shape).copy(), b_in
    if kind == "periodic":
        if partner is None:
            raise ValueError("periodic boundary needs the partner trace")
        return np.asarray(partner[0], float), np.asarray(partner[1], float)
    raise ValueError(f"unknown boundary kind {kind!r}")


# -- manufactured solution ------------------------------------------------

def manufactured_bottom(x, y):
    return 2.0 + 0.5 * np.sin(2 * np.pi * x) + 0.5 * np.cos(2 * np.pi * y)


def manufactured_state(x, y, t, b=None):
    """Exact conserved state of the smooth test (H = 8 + cos x sin y cos t, u = 1/2, v = 3/2)."""
    H = 8.0 + np.cos(x) * np.sin(y) * np.cos(t)
    h = H - manufactured_bottom(x, y)
    return np.stack([h, 0.5 * h, 1.5 * h], axis=-1)


def compute_manufactured_source(x, y, t, p: PhysicsParams) -> np.ndarray:
    """Residual of the balance law for the manufactured state, to be added to dw/dt."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u, v = 0.5, 1.5
    H = 8.0 + np.cos(x) * np.sin(y) * np.cos(t)
    Ht = -np.cos(x) * np.sin(y) * np.sin(t)
    Hx = -np.sin(x) * np.sin(y) * np.cos(t)
    Hy = np.cos(x) * np.cos(y) * np.cos(t)
    b = manufactured_bottom(x, y)
    bx = np.pi * np.cos(2 * np.pi * x)
    by = -np.pi * np.sin(2 * np.pi * y)
    hx, hy = Hx - bx, Hy - by
    h = H - b
    s1 = Ht + u * hx + v * hy
    s2 = u * Ht + u * u * hx + u * v * hy + p.g * Hx * h
    s3 = v * Ht + u * v * hx + v * v * hy + p.g * Hy * h
    return np.stack(np.broadcast_arrays(s1, s2, s3), axis=-1)


# -- bottom cache ---------------------------------------------------------

@dataclass(frozen=True)
class BottomCache:
    """Time-independent bottom data.

    ``edge_jump[e]`` is ``b_R - b_L`` on two-sided edge ``e`` in the node
    order of its first element. The mean height is recomputed on every
    evaluation since it changes with the solution.
    """

    b: np.ndarray  # (K, n, n)
    db: np.ndarray  # (K, n, n, 3)
    face_b: np.ndarray  # (K, 4, n)
    edge_jump: np.ndarray  # (E_interior, n)


def _face_index(K: int, N: int) -> np.ndarray:
    """Flat node index of every element side node, ``(K, 4, n)``."""
    n = N + 1
    grid = np.arange(n * n).reshape(n, n)
    local = np.stack([grid[side_slice(s, N)] for s in (1, 2, 3, 4)])
    return np.arange(K)[:, None, None] * n * n + local[None]


# -- the operator ---------------------------------------------------------

@dataclass
class SemiDiscretization:
    """Callable ``(t, U) -> J dw/dt`` over a whole mesh."""

    mesh: QuadMesh
    geo: MeshGeometry
    bottom: np.ndarray
    params: PhysicsParams = field(default_factory=PhysicsParams)
    flux_mode: str = "es"
    bc: BoundarySpec = field(default_factory=BoundarySpec)
    source: SourceFn | None = None
    volume_flux: VolumeFlux = ec_volume_flux

    def __post_init__(self):
        if self.flux_mode not in FLUX_MODES:
            raise ValueError(f"flux mode must be one of {FLUX_MODES}, got {self.flux_mode!r}")
        ops = self.geo.ops
        N, n, K = ops.N, ops.N + 1, self.geo.K
        self.ops: OperatorSet = ops
        b = np.broadcast_to(np.asarray(self.bottom, dtype=float), (K, n, n)).copy()
        self._fidx = _face_index(K, N)
        face_b = b.reshape(-1)[self._fidx]
        rev = np.arange(n)[::-1]
        inner = self.mesh.interior_edges()
        self._e1 = np.array([e.e1 for e in inner], dtype=int)
        self._s1 = np.array([e.s1 - 1 for e in inner], dtype=int)
        self._e2 = np.array([e.e2 for e in inner], dtype=int)
        self._s2 = np.array([e.s2 - 1 for e in inner], dtype=int)
        # node order of side 2 expressed in side 1 order (an involution)
        self._perm = np.array([rev if e.reversed else np.arange(n) for e in inner], dtype=int).reshape(-1, n)
        self._idxL = self._fidx[self._e1, self._s1]
        self._idxR = np.take_along_axis(self._fidx[self._e2, self._s2], self._perm, axis=1)
        bL = b.reshape(-1)[self._idxL]
        bR = b.reshape(-1)[self._idxR]
        jump, _ = edge_bottom_terms(bL, bR, 0.0, 0.0)
        self.cache = BottomCache(b=b, db=bottom_volume_contributions(b, self.geo, ops.D),
                                 face_b=face_b, edge_jump=jump)
        self._nL = self.geo.normals[self._e1, self._s1]

        self._boundary = {}
        for kind in ("wall", "dirichlet"):
            edges = [e for e in self.mesh.boundary_edges() if e.kind == kind]
            if not edges:
                continue
            if kind == "dirichlet" and self.bc.dirichlet is None:
                raise ValueError("mesh has dirichlet edges but no dirichlet state function was given")
            ek = np.array([e.e1 for e in edges], dtype=int)
            es = np.array([e.s1 - 1 for e in edges], dtype=int)
            self._boundary[kind] = (ek, es, self._fidx[ek, es], self.geo.normals[ek, es],
                                    self.geo.face_xy[ek, es])
        self._Jflat = self.geo.J.reshape(-1)
        self._w0 = ops.weights[0]
        geo = self.geo
        self._metric_means = tuple(np.ascontiguousarray(_pair_mean(m)) for m in (
            geo.y_eta.swapaxes(1, 2), -geo.x_eta.swapaxes(1, 2), -geo.y_xi, geo.x_xi))

    # -- helpers

    def unscaled(self, U) -> np.ndarray:
        return U / self.geo.J[..., None]

    def scaled(self, W) -> np.ndarray:
        return W * self.geo.J[..., None]

    def _check(self, W):
        h = W[..., 0]
        if np.all(h > self.params.h_min) and np.all(np.isfinite(W)):
            return
        bad = ~(h > self.params.h_min) | ~np.all(np.isfinite(W), axis=-1)
        k, i, j = (int(a) for a in np.argwhere(bad)[0])
        raise DryStateError(f"invalid state h={h[k, i, j]!r} in element {k} at node ({i}, {j})")

    def _inner_flux(self, w, n):
        return n[..., :1] * physical_flux_x(w, self.params) + n[..., 1:] * physical_flux_y(w, self.params)

    def surface_terms(self, t: float, W) -> np.ndarray:
        """Per element side ``(K, 4, n, 3)`` surface contribution to ``J dw/dt``."""
        p = self.params
        Wf = W.reshape(-1, 3)
        Bf = self.cache.b.reshape(-1)
        out = np.zeros(self._fidx.shape + (3,))
        half_g = 0.5 * p.g

        if len(self._e1):
            wL, wR = Wf[self._idxL], Wf[self._idxR]
            bL, bR = Bf[self._idxL], Bf[self._idxR]
            n = self._nL
            Fn = normal_flux(wL, wR, bL, bR, n[..., 0], n[..., 1], p, self.flux_mode)
            _, h_avg = edge_bottom_terms(bL, bR, wL[..., 0], wR[..., 0])
            src = (half_g * h_avg * self.cache.edge_jump)[..., None] * n
            src = np.concatenate([np.zeros_like(src[..., :1]), src], axis=-1)
            nR_own = np.take_along_axis(self.geo.normals[self._e2, self._s2], self._perm[..., None], axis=1)
            left = Fn - self._inner_flux(wL, n) + src
            right = -Fn - self._inner_flux(wR, nR_own) + src
            out[self._e1, self._s1] = left
            out[self._e2, self._s2] = np.take_along_axis(right, self._perm[..., None], axis=1)

        for kind, (ek, es, idx, n, xy) in self._boundary.items():
            w_in, b_in = Wf[idx], Bf[idx]
            w_out, b_out = apply_boundary_state(kind, w_in, b_in, xy[..., 0], xy[..., 1], t, n,
                                                state_fn=self.bc.dirichlet)
            Fn = normal_flux(w_in, w_out, b_in, b_out, n[..., 0], n[..., 1], p, self.flux_mode)
            out[ek, es] = Fn - self._inner_flux(w_in, n)
        return -out / self._w0

    def __call__(self, t: float, U) -> np.ndarray:
        W = self.unscaled(U)
        self._check(W)
        N = self.ops.N
        rhs = -volume_terms(W, self.geo, self.ops.D, self.params, self.volume_flux, self._metric_means)
        rhs -= 0.5 * self.params.g * W[..., :1] * self.cache.db
        surf = self.surface_terms(t, W)
        rhs[:, :, 0] += surf[:, 0]
        rhs[:, N, :] += surf[:, 1]
        rhs[:, :, N] += surf[:, 2]
        rhs[:, 0, :] += surf[:, 3]
        if self.source is not None:
            rhs += self.geo.J[..., None] * self.source(self.geo.x, self.geo.y, t, self.params)
        return rhs


def compute_time_derivative(U, t: float, semi: SemiDiscretization) -> np.ndarray:
    return semi(t, U)
