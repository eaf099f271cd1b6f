"""Checks of the computable identities relating u_h, u_h* and the CR solution.

Shared by ``adaptive-dg verify`` and the test suite.
"""
from dataclasses import dataclass

import numpy as np

from . import assembly, dg_core, postprocess
from .assembly import METHODS, MethodKind
from .driver import auto_alpha
from .mesh import uniform_refine
from .solver import DEFAULT_RTOL, SolverError, solve_spd

AVERAGING_TOL = 1e-12
ENERGY_TOL = 1e-8
# absolute allowance for rounding when u_h - u_h* is itself tiny
ENERGY_FLOOR = 1e-12
CR_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    name: str
    method: str
    level: int
    value: float
    tol: float
    note: str = ""

    @property
    def passed(self):
        return bool(self.value <= self.tol)

    def line(self):
        status = "ok" if self.passed else "FAIL"
        return (f"{status:4s} {self.name:18s} {self.method:7s} level={self.level} "
                f"value={self.value:.3e} tol={self.tol:.3e} {self.note}").rstrip()


def energy_check(u_h, f, mesh, method, alpha, A, level=0):
    """``|A_h(d,d) - (f,d)| <= ENERGY_TOL |A_h(d,d)| + ENERGY_FLOOR`` with ``d = u_h - u_h*``."""
    d = dg_core.as_dg(u_h, mesh) - dg_core.cr_to_dg(postprocess.average_to_cr(u_h, mesh), mesh)
    add = abs(assembly.quadratic_form(A, d))
    res = postprocess.energy_identity_residual(u_h, f, mesh, method, alpha, A=A)
    rel = res / add if add > 0 else 0.0
    return Check("energy-identity", MethodKind(method).value, level, res,
                 ENERGY_TOL * add + ENERGY_FLOOR, f"relative={rel:.3e}")


def averaging_identity(mesh, n_pairs=100, rng=None):
    """Largest relative defect of the averaging identity over random DG pairs."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(n_pairs):
        u = rng.standard_normal(mesh.n_dofs)
        v = rng.standard_normal(mesh.n_dofs)
        worst = max(worst, postprocess.integral_relation_residual(u, v, mesh, relative=True))
    return worst


def solve_cr(mesh, f, rel_tol=DEFAULT_RTOL):
    """Directly assembled Crouzeix-Raviart solution as a per-edge vector."""
    A, b = assembly.assemble_cr_system(mesh, f)
    if A.shape[0] == 0:
        return np.zeros(mesh.n_edges)
    x, rep = solve_spd(A, b, rel_tol)
    if not rep.converged:
        raise SolverError(rep)
    return assembly.cr_solution_to_edges(x, mesh)


def solve_dg(mesh, f, method, alpha="auto", rel_tol=DEFAULT_RTOL):
    if alpha == "auto":
        alpha = auto_alpha(mesh, method)
    A = assembly.assemble_system(mesh, method, alpha)
    x, rep = solve_spd(A, assembly.assemble_rhs(mesh, f), rel_tol)
    if not rep.converged:
        raise SolverError(rep)
    return x, A, alpha


def cr_distance(u_h, u_cr, mesh):
    """``||grad_h(u_h* - u_CR)|| / ||grad_h u_CR||``."""
    d = postprocess.average_to_cr(u_h, mesh) - u_cr
    ref = dg_core.broken_h1(u_cr, mesh, space="cr")
    num = dg_core.broken_h1(d, mesh, space="cr")
    return num / ref if ref > 0 else num


def run_checks(problem, methods=METHODS, levels=3, n_pairs=100, rel_tol=DEFAULT_RTOL, seed=0):
    """All identity checks for ``problem`` on ``levels`` uniform refinements.

    The default solver tolerance keeps solver error well below the check
    tolerances.
    """
    rng = np.random.default_rng(seed)
    mesh = problem.mesh
    checks = []
    for level in range(levels):
        if level:
            mesh, _ = uniform_refine(mesh)
        checks.append(Check("averaging", "-", level, averaging_identity(mesh, n_pairs, rng),
                            AVERAGING_TOL))
        u_cr = solve_cr(mesh, problem.f, rel_tol)
        for method in methods:
            method = MethodKind(method)
            u_h, A, alpha = solve_dg(mesh, problem.f, method, rel_tol=rel_tol)
            checks.append(energy_check(u_h, problem.f, mesh, method, alpha, A, level))
            checks.append(Check("cr-equivalence", method.value, level,
                                cr_distance(u_h, u_cr, mesh), CR_TOL))
    return checks
