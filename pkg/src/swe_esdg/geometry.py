"""Curvilinear element geometry: transfinite maps, metric terms and face normals.

Nodal arrays are indexed ``[i, j]`` with ``i`` along xi and ``j`` along eta,
so ``D @ f`` differentiates in xi and ``f @ D.T`` in eta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import MeshError, QuadMesh
from .spectral import OperatorSet, QuadratureRule, interpolate


class InvertedElementError(MeshError):
    """The Jacobian of an element mapping is not strictly positive."""

    def __init__(self, element: int, jmin: float):
        self.element = element
        super().__init__(f"element {element} has non-positive Jacobian (min J = {jmin:.3e})")


@dataclass(frozen=True)
class BoundaryCurve:
    """Polynomial curve given by its values at LGL nodes."""

    points: np.ndarray  # (n, 2)
    rule: QuadratureRule

    def __call__(self, zeta) -> np.ndarray:
        return interpolate(self.rule, self.points, np.atleast_1d(zeta))


def _as_callable(curve):
    return curve if callable(curve) else (lambda z, c=np.asarray(curve): c)


def transfinite_map(curves, xi, eta) -> np.ndarray:
    """Linear-blending map of the reference square onto the region bounded by four curves.

    ``curves`` are (bottom, right, top, left) parametrised in xi, eta, xi, eta.
    ``xi`` and ``eta`` broadcast; the result has a trailing axis of length 2.
    """
    g1, g2, g3, g4 = curves
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi_b, eta_b = np.broadcast_arrays(xi, eta)
    corners = _corner_points(curves)
    c1 = g1(xi_b.ravel()).reshape(xi_b.shape + (2,))
    c3 = g3(xi_b.ravel()).reshape(xi_b.shape + (2,))
    c2 = g2(eta_b.ravel()).reshape(xi_b.shape + (2,))
    c4 = g4(eta_b.ravel()).reshape(xi_b.shape + (2,))
    return _blend(xi_b[..., None], eta_b[..., None], c1, c2, c3, c4, corners)


def _corner_points(curves):
    g1, g2, g3, g4 = curves
    lo, hi = np.array([-1.0]), np.array([1.0])
    x0, x1 = g1(lo)[0], g1(hi)[0]
    x3, x2 = g3(lo)[0], g3(hi)[0]
    scale = max(1.0, float(np.abs(np.array([x0, x1, x2, x3])).max()))
    checks = [(x0, g4(lo)[0]), (x1, g2(lo)[0]), (x2, g2(hi)[0]), (x3, g4(hi)[0])]
    for k, (a, b) in enumerate(checks):
        if np.abs(a - b).max() > 1e-12 * scale:
            raise MeshError(f"boundary curves disagree at corner {k}: {a} vs {b}")
    return x0, x1, x2, x3


def _blend(xi, eta, c1, c2, c3, c4, corners):
    x0, x1, x2, x3 = corners
    return (0.5 * ((1 - xi) * c4 + (1 + xi) * c2 + (1 - eta) * c1 + (1 + eta) * c3)
            - 0.25 * ((1 - xi) * ((1 - eta) * x0 + (1 + eta) * x3)
                      + (1 + xi) * ((1 - eta) * x1 + (1 + eta) * x2)))


@dataclass(frozen=True)
class ElementGeometry:
    x: np.ndarray
    y: np.ndarray
    x_xi: np.ndarray
    x_eta: np.ndarray
    y_xi: np.ndarray
    y_eta: np.ndarray
    J: np.ndarray


def compute_element_geometry(side_values, ops: OperatorSet, element: int = 0) -> ElementGeometry:
    """Geometry at the LGL tensor nodes from the four side curves sampled at those nodes.

    ``side_values`` holds four ``(n, 2)`` arrays (bottom, right, top, left),
    each in its parameter direction.
    """
    c1, c2, c3, c4 = (np.asarray(c, dtype=float) for c in side_values)
    xi = ops.nodes[:, None, None]
    eta = ops.nodes[None, :, None]
    corners = (c1[0], c1[-1], c3[-1], c3[0])
    pts = _blend(xi, eta, c1[:, None, :], c2[None, :, :], c3[:, None, :], c4[None, :, :], corners)
    x, y = pts[..., 0], pts[..., 1]
    D = ops.D
    x_xi, y_xi = D @ x, D @ y
    x_eta, y_eta = x @ D.T, y @ D.T
    J = x_xi * y_eta - x_eta * y_xi
    if not np.all(J > 0):
        raise InvertedElementError(element, float(J.min()))
    return ElementGeometry(x, y, x_xi, x_eta, y_xi, y_eta, J)


def metric_identity_residual(geo, ops: OperatorSet) -> float:
    """Max of the discrete metric identities D(y_eta) - (y_xi)D^T and its x analogue."""
    D = ops.D
    r1 = np.einsum("im,...mj->...ij", D, geo.y_eta) - geo.y_xi @ D.T
    r2 = np.einsum("im,...mj->...ij", D, geo.x_eta) - geo.x_xi @ D.T
    return float(max(np.abs(r1).max(), np.abs(r2).max()))


def side_slice(s: int, N: int):
    """Index tuple picking side ``s`` nodes (in the side parameter direction) from an [i, j] array."""
    return {1: (slice(None), 0), 2: (N, slice(None)), 3: (slice(None), N), 4: (0, slice(None))}[s]


@dataclass(frozen=True)
class MeshGeometry:
    """Stacked geometry of all elements, arrays shaped ``(K, n, n)``.

    ``normals[k, s-1]`` holds the outward normal scaled by the face length
    element, ``(K, 4, n, 2)``. ``face_xy`` holds the face node coordinates.
    """

    ops: OperatorSet
    x: np.ndarray
    y: np.ndarray
    x_xi: np.ndarray
    x_eta: np.ndarray
    y_xi: np.ndarray
    y_eta: np.ndarray
    J: np.ndarray
    normals: np.ndarray
    face_xy: np.ndarray

    @property
    def K(self) -> int:
        return self.J.shape[0]

    def element(self, k: int) -> ElementGeometry:
        return ElementGeometry(self.x[k], self.y[k], self.x_xi[k], self.x_eta[k],
                               self.y_xi[k], self.y_eta[k], self.J[k])


def outward_normals(geo, N: int) -> np.ndarray:
    """Scaled outward normals ``(..., 4, n, 2)`` on sides 1..4."""
    out = []
    for s, (a, b, sign) in {1: ("y_xi", "x_xi", 1.0), 2: ("y_eta", "x_eta", 1.0),
                            3: ("y_xi", "x_xi", -1.0), 4: ("y_eta", "x_eta", -1.0)}.items():
        sl = (Ellipsis,) + side_slice(s, N)
        nx = sign * getattr(geo, a)[sl]
        ny = -sign * getattr(geo, b)[sl]
        out.append(np.stack([nx, ny], axis=-1))
    return np.stack(out, axis=-3)


def build_geometry(mesh: QuadMesh, ops: OperatorSet) -> MeshGeometry:
    nodes = ops.nodes
    parts = []
    for k in range(mesh.n_elements):
        sides = [mesh.side_points(k, s, nodes) for s in (1, 2, 3, 4)]
        parts.append(compute_element_geometry(sides, ops, element=k))
    stack = {f: np.stack([getattr(g, f) for g in parts]) for f in
             ("x", "y", "x_xi", "x_eta", "y_xi", "y_eta", "J")}
    N = ops.N
    normals = outward_normals(_Fields(**stack), N)
    face_xy = np.stack([np.stack([stack["x"][(slice(None),) + side_slice(s, N)],
                                  stack["y"][(slice(None),) + side_slice(s, N)]], axis=-1)
                        for s in (1, 2, 3, 4)], axis=1)
    return MeshGeometry(ops=ops, normals=normals, face_xy=face_xy, **stack)


@dataclass(frozen=True)
class _Fields:
    x: np.ndarray
    y: np.ndarray
    x_xi: np.ndarray
    x_eta: np.ndarray
    y_xi: np.ndarray
    y_eta: np.ndarray
    J: np.ndarray


@dataclass(frozen=True)
class GeometryReport:
    elements: int
    min_jacobian: float
    metric_residual: float
    watertight_gap: float
    normal_mismatch: float

    @property
    def ok(self) -> bool:
        return self.min_jacobian > 0 and self.watertight_gap <= 1e-12 and self.normal_mismatch <= 1e-12


def check_geometry(mesh: QuadMesh, geo: MeshGeometry) -> GeometryReport:
    """Conformity checks across interior edges.

    Face nodes of neighbours coincide (periodic partners differ by a
    constant shift) and their scaled normals are equal and opposite.
    """
    gap = 0.0
    mismatch = 0.0
    for e in mesh.interior_edges():
        p1 = geo.face_xy[e.e1, e.s1 - 1]
        p2 = geo.face_xy[e.e2, e.s2 - 1]
        n1 = geo.normals[e.e1, e.s1 - 1]
        n2 = geo.normals[e.e2, e.s2 - 1]
        if e.reversed:
            p2, n2 = p2[::-1], n2[::-1]
        d = p2 - p1
        if e.kind == "periodic":
            d = d - d[0]
        gap = max(gap, float(np.abs(d).max()))
        mismatch = max(mismatch, float(np.abs(n1 + n2).max()))
    return GeometryReport(
        elements=geo.K,
        min_jacobian=float(geo.J.min()),
        metric_residual=metric_identity_residual(geo, geo.ops),
        watertight_gap=gap,
        normal_mismatch=mismatch,
    )
