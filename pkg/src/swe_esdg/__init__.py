"""Entropy conservative and entropy stable DGSEM for the 2D shallow water equations
on curvilinear quadrilateral meshes with (possibly discontinuous) bottom topography."""

from .dg import BoundarySpec, SemiDiscretization
from .geometry import build_geometry
from .mesh import QuadMesh, generate_structured_mesh, load_mesh, save_mesh
from .physics import PhysicsParams
from .runner import run_problem
from .scenarios import build_scenario
from .spectral import operators

__all__ = [
    "BoundarySpec",
    "PhysicsParams",
    "QuadMesh",
    "SemiDiscretization",
    "build_geometry",
    "build_scenario",
    "generate_structured_mesh",
    "load_mesh",
    "operators",
    "run_problem",
    "save_mesh",
]
__version__ = "0.1.0"
