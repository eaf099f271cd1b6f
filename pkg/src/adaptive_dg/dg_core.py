"""Discrete spaces, jumps, edge means, lifting operators and mesh norms.

Representations (all plain numpy arrays):

* DG function (piecewise P1, discontinuous): flat vector of length
  ``3 * n_triangles``; entry ``3*t + k`` is the value at local vertex ``k``
  of triangle ``t``.
* CR function: one value per edge midpoint, zero on boundary edges.
* piecewise-constant vector field: ``(n_triangles, 2)``.
* edge-constant vector field: ``(n_edges, 2)``.

Every P1 trace is linear along an edge, so its edge mean equals its
midpoint value. All edge and element integrals below are closed forms.
"""
import numpy as np
import scipy.sparse as sp


def as_dg(v, mesh):
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != mesh.n_dofs:
        raise ValueError(f"DG vector has length {v.shape[0]}, expected {mesh.n_dofs}")
    return v


def interpolate(u, mesh):
    """Nodal DG interpolant of a scalar field ``u(x, y)``."""
    c = mesh.vertices[mesh.triangles]
    vals = np.broadcast_to(np.asarray(u(c[..., 0], c[..., 1]), dtype=float), c.shape[:2])
    return vals.reshape(-1).copy()


def element_gradients(v, mesh):
    """Constant gradient of ``v`` on every triangle, shape ``(nt, 2)``."""
    v = as_dg(v, mesh).reshape(-1, 3)
    return np.einsum("tk,tkd->td", v, mesh.gradients)


def midpoint_values(v, mesh):
    """Value of ``v`` at the midpoint of local edge ``k`` of each triangle, ``(nt, 3)``."""
    v = as_dg(v, mesh).reshape(-1, 3)
    return 0.5 * (np.roll(v, -1, axis=1) + np.roll(v, -2, axis=1))


def midpoint_traces(v, mesh):
    """One-sided midpoint traces ``(v_-(m_e), v_+(m_e))``; plus side is 0 on the boundary."""
    mv = midpoint_values(v, mesh)
    et = mesh.edge_triangles
    el = mesh.edge_local
    out = np.zeros((mesh.n_edges, 2))
    out[:, 0] = mv[et[:, 0], el[:, 0]]
    inner = et[:, 1] >= 0
    out[inner, 1] = mv[et[inner, 1], el[inner, 1]]
    return out


def jump_means(v, mesh):
    """Scalar edge-mean jump ``v_-(m_e) - v_+(m_e)`` (``v(m_e)`` on the boundary).

    ``Pi_e([[v]])`` is this scalar times the edge normal.
    """
    tr = midpoint_traces(v, mesh)
    return tr[:, 0] - tr[:, 1]


def jump_mean_projection(v, mesh):
    """Edge-mean of the vector jump, ``(n_edges, 2)``."""
    return jump_means(v, mesh)[:, None] * mesh.normals


def jump_operator(mesh):
    """Sparse ``(n_edges, n_dofs)`` matrix mapping a DG vector to :func:`jump_means`."""
    et = mesh.edge_triangles
    el = mesh.edge_local
    ne = mesh.n_edges
    rows, cols, vals = [], [], []
    for side, sign in ((0, 0.5), (1, -0.5)):
        has = et[:, side] >= 0
        e = np.flatnonzero(has)
        t = et[has, side]
        k = el[has, side]
        for shift in (1, 2):
            rows.append(e)
            cols.append(3 * t + (k + shift) % 3)
            vals.append(np.full(len(e), sign))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(ne, mesh.n_dofs))


def _lift_weights(mesh):
    """Per-(edge, side) factor ``h_e * s / |T|`` with ``s = 1/2`` inside, 1 on the boundary."""
    et = mesh.edge_triangles
    s = np.where(mesh.is_boundary, 1.0, 0.5)
    w = np.zeros((mesh.n_edges, 2))
    w[:, 0] = mesh.lengths * s / mesh.areas[et[:, 0]]
    inner = et[:, 1] >= 0
    w[inner, 1] = mesh.lengths[inner] * s[inner] / mesh.areas[et[inner, 1]]
    return w


def lift_matrix(mesh):
    """Sparse ``(n_triangles, n_edges)`` matrix ``L`` with ``r(w) = L @ w`` componentwise.

    Valid for edge-constant data: ``r_e(w)|_T = -(h_e s / |T|) w`` on each
    triangle adjacent to ``e``.
    """
    et = mesh.edge_triangles
    w = _lift_weights(mesh)
    inner = et[:, 1] >= 0
    e = np.arange(mesh.n_edges)
    rows = np.concatenate([et[:, 0], et[inner, 1]])
    cols = np.concatenate([e, e[inner]])
    vals = -np.concatenate([w[:, 0], w[inner, 1]])
    return sp.csr_matrix((vals, (rows, cols)), shape=(mesh.n_triangles, mesh.n_edges))


def lift_local(e, w, mesh):
    """Local lifting ``r_e`` of a constant 2-vector ``w`` on edge ``e``; ``(nt, 2)``."""
    w = np.asarray(w, dtype=float).reshape(2)
    out = np.zeros((mesh.n_triangles, 2))
    weights = _lift_weights(mesh)[e]
    for side in (0, 1):
        t = mesh.edge_triangles[e, side]
        if t >= 0:
            out[t] = -weights[side] * w
    return out


def lift_global(w, mesh):
    """Global lifting ``r`` of edge-constant data ``w`` (``(n_edges, 2)``); ``(nt, 2)``."""
    w = np.asarray(w, dtype=float).reshape(mesh.n_edges, 2)
    return lift_matrix(mesh) @ w


def broken_h1(v, mesh, space="auto"):
    """Broken gradient norm ``||grad_h v||`` of a DG or CR vector.

    ``space`` is ``"dg"``, ``"cr"`` or ``"auto"`` (decided by length; DG wins
    when both lengths agree).
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if space == "cr" or (space == "auto" and v.shape[0] != mesh.n_dofs):
        v = cr_to_dg(v, mesh)
    g = element_gradients(v, mesh)
    return float(np.sqrt(np.sum(mesh.areas * np.einsum("td,td->t", g, g))))


def norm_1h(v, mesh):
    """Mesh-dependent norm: broken gradient plus squared edge-mean jumps (unweighted)."""
    g = element_gradients(v, mesh)
    jm = jump_means(v, mesh)
    return float(np.sqrt(np.sum(mesh.areas * np.einsum("td,td->t", g, g)) + np.sum(jm * jm)))


def cr_to_dg(c, mesh):
    """Embed a CR function (midpoint values per edge) into the DG space.

    A P1 function with midpoint values ``c_k`` (edge opposite vertex ``k``)
    has vertex values ``v_k = c_{k+1} + c_{k+2} - c_k``.
    """
    c = np.asarray(c, dtype=float).reshape(mesh.n_edges)
    ct = c[mesh.triangle_edges]
    return (np.roll(ct, -1, axis=1) + np.roll(ct, -2, axis=1) - ct).reshape(-1)


def cr_space_defect(v, mesh):
    """Largest edge-mean jump of ``v``; zero (to roundoff) iff ``v`` lies in the CR space."""
    jm = jump_means(v, mesh)
    return float(np.max(np.abs(jm))) if jm.size else 0.0
