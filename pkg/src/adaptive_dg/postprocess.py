"""Auxiliary CR solution obtained by averaging a DG solution, and the
computable identities that tie the two together.
"""
import math

import numpy as np

from . import assembly, dg_core, quadrature


def average_to_cr(u_h, mesh):
    """CR function with the mean midpoint trace on interior edges, 0 on the boundary."""
    tr = dg_core.midpoint_traces(u_h, mesh)
    c = 0.5 * (tr[:, 0] + tr[:, 1])
    c[mesh.is_boundary] = 0.0
    return c


def _grad_inner(u, v, mesh):
    gu = dg_core.element_gradients(u, mesh)
    gv = dg_core.element_gradients(v, mesh)
    return float(np.sum(mesh.areas * np.einsum("td,td->t", gu, gv)))


def integral_relation_residual(u_h, v_h, mesh, relative=False):
    """Defect of the averaging identity

        (grad_h u, grad_h v) - sum_e int_e {grad v}.[[u]] = (grad_h u*, grad_h v)

    evaluated term by term. With ``relative=True`` the defect is divided by
    ``||u||_{1,h} ||v||_{1,h}`` (0 if either vanishes).
    """
    u_star = dg_core.cr_to_dg(average_to_cr(u_h, mesh), mesh)
    flux = assembly.flux_operator(mesh) @ dg_core.as_dg(v_h, mesh)
    edge_term = float(np.sum(mesh.lengths * flux * dg_core.jump_means(u_h, mesh)))
    res = abs(_grad_inner(u_h, v_h, mesh) - edge_term - _grad_inner(u_star, v_h, mesh))
    if relative:
        scale = dg_core.norm_1h(u_h, mesh) * dg_core.norm_1h(v_h, mesh)
        return res / scale if scale > 0 else 0.0
    return res


def energy_identity_residual(u_h, f, mesh, method, alpha, A=None, relative=False):
    """``|A_h(d, d) - (f, d)|`` with ``d = u_h - u_h*``.

    ``A`` may be passed to reuse an assembled matrix. ``relative`` divides by
    ``|A_h(d, d)|`` (the absolute value is returned when that is zero).
    """
    if A is None:
        A = assembly.assemble_system(mesh, method, alpha)
    d = dg_core.as_dg(u_h, mesh) - dg_core.cr_to_dg(average_to_cr(u_h, mesh), mesh)
    add = assembly.quadratic_form(A, d)
    fd = float(assembly.assemble_rhs(mesh, f) @ d)
    res = abs(add - fd)
    if relative and add != 0.0:
        return res / abs(add)
    return res


def data_oscillation(f, mesh):
    """Per-triangle ``h_T^2 ||f||^2_{L2(T)}`` (degree-4 rule)."""
    bary, w = quadrature.triangle_rule(assembly.RHS_DEGREE)
    fq = quadrature.evaluate(f, quadrature.physical_points(mesh.vertices, mesh.triangles, bary))
    return mesh.diameters ** 2 * mesh.areas * (fq ** 2 @ w)


def diff_norm_sq(u_h, u_star, mesh):
    """``||u_h - u_h*||_{1,h}^2`` for a DG ``u_h`` and CR ``u_star``."""
    d = dg_core.as_dg(u_h, mesh) - dg_core.cr_to_dg(u_star, mesh)
    return dg_core.norm_1h(d, mesh) ** 2


def volume_bound_constant(u_h, u_star, f, mesh):
    """Observed ratio ``||u_h* - u_h||_{1,h}^2 / ||hf||^2``; NaN when ``||hf|| = 0``."""
    hf = float(np.sum(data_oscillation(f, mesh)))
    if hf == 0.0:
        return math.nan
    return diff_norm_sq(u_h, u_star, mesh) / hf


def averaging_error_constant(u_h, mesh):
    """Observed constant in

        sum_T (h_T^-2 ||u - u*||_T^2 + ||grad(u - u*)||_T^2) <= C sum_e jm(u)^2.

    The L2 part is exact: a P1 function on ``T`` has
    ``||v||_T^2 = |T|/3 * sum of squared midpoint values``. NaN when all
    jump means vanish.
    """
    d = dg_core.as_dg(u_h, mesh) - dg_core.cr_to_dg(average_to_cr(u_h, mesh), mesh)
    mv = dg_core.midpoint_values(d, mesh)
    l2 = mesh.areas / 3.0 * np.sum(mv * mv, axis=1)
    g = dg_core.element_gradients(d, mesh)
    lhs = float(np.sum(l2 / mesh.diameters ** 2 + mesh.areas * np.einsum("td,td->t", g, g)))
    jm = dg_core.jump_means(u_h, mesh)
    rhs = float(np.sum(jm * jm))
    return lhs / rhs if rhs > 0 else math.nan
