"""Built-in test problems (homogeneous Dirichlet data)."""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .mesh import build_mesh


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    mesh: object
    f: Callable
    exact_gradient: Callable | None = None
    exact_solution: Callable | None = None
    description: str = ""

    def __post_init__(self):
        bary, _ = quadrature.triangle_rule(4)
        vals = quadrature.evaluate(
            self.f, quadrature.physical_points(self.mesh.vertices, self.mesh.triangles, bary))
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"problem {self.name!r}: f is not finite at quadrature points")


def unit_square_mesh(n=1):
    """Unit square split into ``n x n`` cells, each cut by its (0,0)-(1,1) diagonal."""
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            tris += [(a, b, c), (a, c, d)]
    return build_mesh(verts, tris)


def lshape_mesh():
    """(-1,1)^2 minus [0,1)x(-1,0): six triangles fanned around the reentrant corner."""
    verts = [(0, 0), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1)]
    tris = [(0, i, i + 1) for i in range(1, 7)]
    return build_mesh(np.array(verts, dtype=float), tris)


def _sine(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def _sine_rhs(x, y):
    return 2.0 * np.pi ** 2 * np.sin(np.pi * x) * np.sin(np.pi * y)


def _sine_grad(x, y):
    return (np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
            np.pi * np.sin(np.pi * x) * np.cos(np.pi * y))


def _one(x, y):
    return np.ones_like(np.asarray(x, dtype=float))


def square_sine(n=8):
    return Problem("square-sine", unit_square_mesh(n), _sine_rhs, _sine_grad, _sine,
                   "unit square, u = sin(pi x) sin(pi y)")


def lshape_const():
    return Problem("lshape-const", lshape_mesh(), _one, None, None,
                   "L-shaped domain, f = 1, exact solution unknown")


def from_mesh_file(path):
    from .mesh_io import read_mesh

    return Problem(str(path), read_mesh(path), _one, None, None, f"mesh file {path}, f = 1")


BUILTIN = {"square-sine": square_sine, "lshape-const": lshape_const}


def get_problem(name):
    if name in BUILTIN:
        return BUILTIN[name]()
    return from_mesh_file(name)
