"""Adaptive weakly penalized discontinuous Galerkin methods (P1, 2D Poisson)."""
from .assembly import MethodKind, assemble_system, assemble_rhs, min_alpha
from .driver import RunConfig, adapt_loop
from .estimate import MarkingConfig, Strategy
from .kernels import BACKEND
from .mesh import Mesh, MeshError, build_mesh, refine

__all__ = [
    "BACKEND",
    "MarkingConfig",
    "Mesh",
    "MeshError",
    "MethodKind",
    "RunConfig",
    "Strategy",
    "adapt_loop",
    "assemble_rhs",
    "assemble_system",
    "build_mesh",
    "min_alpha",
    "refine",
]
