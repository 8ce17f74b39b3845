"""Unstructured conforming quadrilateral meshes with curved edges.

Element corners are listed counter-clockwise starting at the reference
corner (xi, eta) = (-1, -1). Local sides follow the convention

    side 1: eta = -1, corner 0 -> 1, parameter xi
    side 2: xi  = +1, corner 1 -> 2, parameter eta
    side 3: eta = +1, corner 3 -> 2, parameter xi
    side 4: xi  = -1, corner 0 -> 3, parameter eta

Curved edges are stored per corner pair ``(a, b)`` as samples at the LGL
nodes of their own degree, running from corner ``a`` to corner ``b``.
Straight edges are not stored.

Text format (``#`` starts a comment)::

    NODES <n>
    <x> <y>
    ELEMENTS <k>
    <c0> <c1> <c2> <c3>
    CURVES <m>
    <a> <b> <degree>
    <x> <y>            # degree + 1 lines
    BOUNDARY <l>
    <a> <b> wall|dirichlet
    <a> <b> periodic <c> <d>   # edge a-b glued to c-d, a ~ c and b ~ d

A ``wall`` entry on an edge shared by two elements cuts it into two
reflecting walls (used for thin internal barriers such as a dam).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .spectral import interpolate, legendre_gauss_lobatto

SIDE_CORNERS = {1: (0, 1), 2: (1, 2), 3: (3, 2), 4: (0, 3)}
BOUNDARY_KINDS = ("wall", "dirichlet")
_GEOM_TOL = 1e-12


class MeshError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Edge:
    """One face of the mesh.

    For two-sided edges (``kind`` is ``interior`` or ``periodic``) ``e2``/``s2``
    name the neighbour, and ``reversed`` says whether node ``k`` on side ``s1``
    of ``e1`` matches node ``N - k`` on side ``s2`` of ``e2``. Boundary edges
    have ``e2 = -1``.
    """

    e1: int
    s1: int
    e2: int
    s2: int
    reversed: bool
    kind: str

    @property
    def two_sided(self) -> bool:
        return self.e2 >= 0


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass
class QuadMesh:
    corners: np.ndarray
    elements: np.ndarray
    curves: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    boundary: dict[tuple[int, int], str] = field(default_factory=dict)
    periodic: list[tuple[int, int, int, int]] = field(default_factory=list)
    edges: list[Edge] = field(init=False, repr=False)

    def __post_init__(self):
        self.corners = np.asarray(self.corners, dtype=float).reshape(-1, 2)
        self.elements = np.asarray(self.elements, dtype=int).reshape(-1, 4)
        self.curves = {(int(a), int(b)): np.asarray(c, dtype=float) for (a, b), c in self.curves.items()}
        self.boundary = {_key(int(a), int(b)): str(k) for (a, b), k in self.boundary.items()}
        self.periodic = [tuple(int(i) for i in p) for p in self.periodic]
        self._validate_basic()
        self.edges = self._connect()

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def side_corners(self, k: int, s: int) -> tuple[int, int]:
        a, b = SIDE_CORNERS[s]
        return int(self.elements[k, a]), int(self.elements[k, b])

    def edge_points(self, a: int, b: int, zeta) -> np.ndarray:
        """Points of the edge a -> b at parameters ``zeta`` in [-1, 1]."""
        zeta = np.asarray(zeta, dtype=float)
        if (a, b) in self.curves:
            samples = self.curves[(a, b)]
        elif (b, a) in self.curves:
            samples = self.curves[(b, a)][::-1]
        else:
            pa, pb = self.corners[a], self.corners[b]
            t = 0.5 * (1.0 + zeta)[:, None]
            return (1.0 - t) * pa + t * pb
        rule = legendre_gauss_lobatto(len(samples) - 1)
        return interpolate(rule, samples, zeta)

    def side_points(self, k: int, s: int, zeta) -> np.ndarray:
        return self.edge_points(*self.side_corners(k, s), zeta)

    def centroids(self) -> np.ndarray:
        return self.corners[self.elements].mean(axis=1)

    def with_walls(self, pairs: Iterable[tuple[int, int]]) -> "QuadMesh":
        """Copy of the mesh with extra wall entries (cuts interior edges)."""
        boundary = dict(self.boundary)
        for a, b in pairs:
            boundary[_key(a, b)] = "wall"
        return QuadMesh(self.corners, self.elements, self.curves, boundary, self.periodic)

    def interior_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.two_sided]

    def boundary_edges(self) -> list[Edge]:
        return [e for e in self.edges if not e.two_sided]

    # -- validation -------------------------------------------------------

    def _validate_basic(self):
        nc = len(self.corners)
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= nc):
            raise MeshError("element references a corner index out of range")
        for k, el in enumerate(self.elements):
            if len(set(el.tolist())) != 4:
                raise MeshError(f"element {k} repeats a corner")
        scale = max(1.0, float(np.abs(self.corners).max(initial=0.0)))
        for (a, b), pts in self.curves.items():
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
                raise MeshError(f"curve {a}-{b} must hold at least two (x, y) samples")
            if (np.abs(pts[0] - self.corners[a]).max() > _GEOM_TOL * scale
                    or np.abs(pts[-1] - self.corners[b]).max() > _GEOM_TOL * scale):
                raise MeshError(f"curve {a}-{b} endpoints do not match corners {a} and {b}")
        for key, kind in self.boundary.items():
            if kind not in BOUNDARY_KINDS:
                raise MeshError(f"unknown boundary tag {kind!r} on edge {key}")

    def _connect(self) -> list[Edge]:
        sides: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for k in range(self.n_elements):
            for s in (1, 2, 3, 4):
                sides.setdefault(_key(*self.side_corners(k, s)), []).append((k, s))
        for key in self.curves:
            if _key(*key) not in sides:
                raise MeshError(f"curve {key} is not an element edge")

        edges: list[Edge] = []
        single: dict[tuple[int, int], tuple[int, int]] = {}
        for key, owners in sides.items():
            if len(owners) > 2:
                raise MeshError(f"non-conforming edge {key}: shared by {len(owners)} element sides")
            if len(owners) == 2:
                (k1, s1), (k2, s2) = owners
                if self.boundary.get(key) == "wall":
                    edges.append(Edge(k1, s1, -1, 0, False, "wall"))
                    edges.append(Edge(k2, s2, -1, 0, False, "wall"))
                    continue
                if key in self.boundary:
                    raise MeshError(f"interior edge {key} tagged {self.boundary[key]!r}")
                rev = self.side_corners(k1, s1)[0] != self.side_corners(k2, s2)[0]
                edges.append(Edge(k1, s1, k2, s2, rev, "interior"))
            else:
                single[key] = owners[0]

        paired: set[tuple[int, int]] = set()
        for a, b, c, d in self.periodic:
            k1s, k2s = _key(a, b), _key(c, d)
            for key in (k1s, k2s):
                if key not in single:
                    raise MeshError(f"periodic edge {key} is not a boundary edge")
                if key in paired or key in self.boundary:
                    raise MeshError(f"edge {key} has more than one boundary assignment")
                paired.add(key)
            (k1, s1), (k2, s2) = single[k1s], single[k2s]
            p, q = self.side_corners(k1, s1)
            partner = {a: c, b: d}
            rev = self.side_corners(k2, s2)[0] != partner[p]
            self._check_periodic_match(k1, s1, k2, s2, rev)
            edges.append(Edge(k1, s1, k2, s2, rev, "periodic"))

        for key, (k, s) in single.items():
            if key in paired:
                continue
            kind = self.boundary.get(key)
            if kind is None:
                raise MeshError(f"edge {key} of element {k} has no neighbour and no boundary tag "
                                "(non-conforming or untagged boundary)")
            edges.append(Edge(k, s, -1, 0, False, kind))
        edges.sort(key=lambda e: (e.e1, e.s1))
        return edges

    def _check_periodic_match(self, k1, s1, k2, s2, rev):
        zeta = legendre_gauss_lobatto(4).nodes
        p1 = self.side_points(k1, s1, zeta)
        p2 = self.side_points(k2, s2, zeta)
        if rev:
            p2 = p2[::-1]
        shift = p2 - p1
        scale = max(1.0, float(np.abs(self.corners).max()))
        if np.abs(shift - shift[0]).max() > _GEOM_TOL * scale:
            raise MeshError(f"periodic sides ({k1},{s1}) and ({k2},{s2}) are not translates")


# -- file IO ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_mesh(mesh: QuadMesh, path) -> None:
    lines = ["# quadrilateral mesh", f"NODES {len(mesh.corners)}"]
    lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in mesh.corners]
    lines.append(f"ELEMENTS {mesh.n_elements}")
    lines += [" ".join(str(int(c)) for c in el) for el in mesh.elements]
    lines.append(f"CURVES {len(mesh.curves)}")
    for (a, b), pts in sorted(mesh.curves.items()):
        lines.append(f"{a} {b} {len(pts) - 1}")
        lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in pts]
    entries = [f"{a} {b} {kind}" for (a, b), kind in sorted(mesh.boundary.items())]
    entries += [f"{a} {b} periodic {c} {d}" for a, b, c, d in mesh.periodic]
    lines.append(f"BOUNDARY {len(entries)}")
    lines += entries
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write mesh file {path}: {exc}") from exc


class _Lines:
    def __init__(self, text: str):
        self.items = []
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((no, line.split()))
        self.pos = 0

    def next(self, what: str):
        if self.pos >= len(self.items):
            last = self.items[-1][0] if self.items else 0
            raise MeshError(f"unexpected end of file, expected {what}", last + 1)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def header(self, name: str) -> int:
        no, tok = self.next(f"{name} header")
        if tok[0].upper() != name or len(tok) != 2:
            raise MeshError(f"expected '{name} <count>', got {' '.join(tok)!r}", no)
        return self._int(tok[1], no)

    @staticmethod
    def _int(tok, no) -> int:
        try:
            return int(tok)
        except ValueError:
            raise MeshError(f"expected an integer, got {tok!r}", no) from None

    @staticmethod
    def _float(tok, no) -> float:
        try:
            return float(tok)
        except ValueError:
            raise MeshError(f"expected a number, got {tok!r}", no) from None

    def point(self):
        no, tok = self.next("a point")
        if len(tok) != 2:
            raise MeshError("expected two coordinates", no)
        return self._float(tok[0], no), self._float(tok[1], no)


def parse_mesh(text: str) -> QuadMesh:
    src = _Lines(text)
    corners = [src.point() for _ in range(src.header("NODES"))]
    elements = []
    for _ in range(src.header("ELEMENTS")):
        no, tok = src.next("an element")
        if len(tok) != 4:
            raise MeshError("an element needs four corner indices", no)
        elements.append([src._int(t, no) for t in tok])
    curves = {}
    for _ in range(src.header("CURVES")):
        no, tok = src.next("a curve header")
        if len(tok) != 3:
            raise MeshError("curve header is '<a> <b> <degree>'", no)
        a, b, deg = (src._int(t, no) for t in tok)
        if deg < 1:
            raise MeshError("curve degree must be >= 1", no)
        curves[(a, b)] = np.array([src.point() for _ in range(deg + 1)])
    boundary, periodic = {}, []
    for _ in range(src.header("BOUNDARY")):
        no, tok = src.next("a boundary entry")
        if len(tok) < 3:
            raise MeshError("boundary entry is '<a> <b> <tag>'", no)
        a, b = src._int(tok[0], no), src._int(tok[1], no)
        tag = tok[2].lower()
        if tag == "periodic":
            if len(tok) != 5:
                raise MeshError("periodic entry is '<a> <b> periodic <c> <d>'", no)
            periodic.append((a, b, src._int(tok[3], no), src._int(tok[4], no)))
        elif tag in BOUNDARY_KINDS and len(tok) == 3:
            boundary[(a, b)] = tag
        else:
            raise MeshError(f"unknown boundary tag {' '.join(tok[2:])!r}", no)
    if src.pos != len(src.items):
        raise MeshError("trailing content after BOUNDARY section", src.items[src.pos][0])
    return QuadMesh(corners, elements, curves, boundary, periodic)


def load_mesh(path) -> QuadMesh:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read mesh file {path}: {exc}") from exc
    return parse_mesh(text)


# -- structured generator -------------------------------------------------

@dataclass(frozen=True)
class SinusoidalPerturbation:
    """Smooth interior distortion of a rectangle that leaves its boundary fixed.

    Maps (X, Y) to X + a Lx sin(k pi sx) sin(k pi sy), Y + a Ly sin(k pi sx) sin(k pi sy)
    with sx, sy the normalised coordinates in [0, 1]. With the default even
    ``wavenumber`` the centre lines stay straight.
    """

    amplitude: float = 0.05
    wavenumber: int = 2

    def __call__(self, X, Y, domain):
        x0, x1, y0, y1 = domain
        lx, ly = x1 - x0, y1 - y0
        bump = (np.sin(self.wavenumber * np.pi * (X - x0) / lx)
                * np.sin(self.wavenumber * np.pi * (Y - y0) / ly))
        return X + self.amplitude * lx * bump, Y + self.amplitude * ly * bump


Mapping = Callable[[np.ndarray, np.ndarray, tuple], tuple]


def generate_structured_mesh(
    nx: int,
    ny: int,
    domain=(-1.0, 1.0, -1.0, 1.0),
    perturbation: Mapping | None = None,
    periodic=(False, False),
    boundary=("wall", "wall", "wall", "wall"),
    curve_order: int = 4,
) -> QuadMesh:
    """Logically Cartesian ``nx`` x ``ny`` mesh, elements numbered row by row from the bottom left.

    ``boundary`` gives the tag of the (bottom, right, top, left) sides when
    that direction is not periodic. ``perturbation(X, Y, domain)`` maps the
    uniform grid; mapped edges are sampled at ``curve_order + 1`` LGL points.
    """
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be >= 1")
    x0, x1, y0, y1 = (float(v) for v in domain)
    dom = (x0, x1, y0, y1)
    X, Y = np.meshgrid(np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1), indexing="xy")
    # corner index = j * (nx + 1) + i
    if perturbation is not None:
        xs, ys = perturbation(X, Y, dom)
    else:
        xs, ys = X, Y
    corners = np.stack([np.ravel(xs), np.ravel(ys)], axis=-1)

    def cid(i, j):
        return j * (nx + 1) + i

    elements = [[cid(i, j), cid(i + 1, j), cid(i + 1, j + 1), cid(i, j + 1)]
                for j in range(ny) for i in range(nx)]

    curves = {}
    if perturbation is not None:
        zeta = legendre_gauss_lobatto(curve_order).nodes
        t = 0.5 * (1.0 + zeta)
        xs_line = np.linspace(x0, x1, nx + 1)
        ys_line = np.linspace(y0, y1, ny + 1)
        segments = []
        for j in range(ny + 1):
            for i in range(nx):
                segments.append((cid(i, j), cid(i + 1, j),
                                 xs_line[i] + t * (xs_line[i + 1] - xs_line[i]), np.full_like(t, ys_line[j])))
        for i in range(nx + 1):
            for j in range(ny):
                segments.append((cid(i, j), cid(i, j + 1),
                                 np.full_like(t, xs_line[i]), ys_line[j] + t * (ys_line[j + 1] - ys_line[j])))
        for a, b, sx, sy in segments:
            px, py = perturbation(sx, sy, dom)
            pts = np.stack([px, py], axis=-1)
            pts[0], pts[-1] = corners[a], corners[b]
            chord = corners[b] - corners[a]
            off = (pts - corners[a]) @ np.array([-chord[1], chord[0]])
            if np.abs(off).max() > 1e-14 * max(1.0, float(chord @ chord)):
                curves[(a, b)] = pts

    bottom, right, top, left = boundary
    tags, periodic_pairs = {}, []
    if periodic[0]:
        periodic_pairs += [(cid(0, j), cid(0, j + 1), cid(nx, j), cid(nx, j + 1)) for j in range(ny)]
    else:
        tags.update({(cid(0, j), cid(0, j + 1)): left for j in range(ny)})
        tags.update({(cid(nx, j), cid(nx, j + 1)): right for j in range(ny)})
    if periodic[1]:
        periodic_pairs += [(cid(i, 0), cid(i + 1, 0), cid(i, ny), cid(i + 1, ny)) for i in range(nx)]
    else:
        tags.update({(cid(i, 0), cid(i + 1, 0)): bottom for i in range(nx)})
        tags.update({(cid(i, ny), cid(i + 1, ny)): top for i in range(nx)})
    return QuadMesh(corners, elements, curves, tags, periodic_pairs)


def structured_corner_id(nx: int, i: int, j: int) -> int:
    return j * (nx + 1) + i
