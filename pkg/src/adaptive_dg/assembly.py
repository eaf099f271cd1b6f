"""Assembly of the weakly penalized DG forms, loads and the CR system.

Every form is a sum of five term matrices on the DG nodal basis (dof
``3*t + k``)::

    stiffness     sum_T (grad w, grad v)_T
    consistency   -sum_e h_e ({grad w}.n_e jm(v) + {grad v}.n_e jm(w))
    penalty       sum_e jm(w) jm(v)                 (= (1/h_e) int_e Pi[[w]].Pi[[v]])
    lift_global   int r(Pi[[w]]) . r(Pi[[v]])
    lift_local    sum_e int r_e(Pi[[w]]) . r_e(Pi[[v]])

where ``jm`` is the scalar edge-mean jump. The methods combine them as

    ip      stiffness + consistency + alpha * penalty
    ldg     stiffness + consistency + lift_global + alpha * penalty
    brezzi  stiffness + consistency + lift_global + alpha * lift_local
    bassi   stiffness + consistency + alpha * lift_local
"""
import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import dg_core, quadrature

RHS_DEGREE = 4


class MethodKind(str, enum.Enum):
    IP = "ip"
    LDG = "ldg"
    BREZZI = "brezzi"
    BASSI = "bassi"


METHODS = tuple(MethodKind)

_PENALTY_TERM = {
    MethodKind.IP: "penalty",
    MethodKind.LDG: "penalty",
    MethodKind.BREZZI: "lift_local",
    MethodKind.BASSI: "lift_local",
}
_USES_GLOBAL_LIFT = {MethodKind.LDG, MethodKind.BREZZI}


@dataclass(frozen=True)
class PenaltyReport:
    method: MethodKind
    alpha: float
    alpha_min: float

    @property
    def admissible(self):
        return self.alpha > self.alpha_min


class InadmissiblePenaltyError(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"alpha={report.alpha!r} is not admissible for {report.method.value}: "
            f"need alpha > {report.alpha_min!r}")


def local_stiffness(mesh):
    """Element stiffness blocks ``|T| grad(lambda_m).grad(lambda_n)``, shape ``(nt, 3, 3)``."""
    g = mesh.gradients
    return mesh.areas[:, None, None] * np.einsum("tmd,tnd->tmn", g, g)


def spectral_radii(mesh):
    """Spectral radius of every local stiffness matrix.

    Rows sum to zero, so the two other eigenvalues are those of the 2x2
    block ``P^T S P`` on the orthogonal complement of ``(1, 1, 1)``. Writing
    its discriminant as a sum of squares keeps double eigenvalues accurate.
    """
    P = np.array([[1.0, 1.0], [-1.0, 1.0], [0.0, -2.0]]) / np.array([np.sqrt(2.0), np.sqrt(6.0)])
    B = np.einsum("km,tkl,ln->tmn", P, local_stiffness(mesh), P)
    a, b, d = B[:, 0, 0], B[:, 0, 1], B[:, 1, 1]
    return 0.5 * (a + d) + np.hypot(0.5 * (a - d), b)


def local_stiffness_spectral_radius(t, mesh):
    if mesh.areas[t] <= 0:
        raise ValueError(f"triangle {t} is degenerate")
    return float(spectral_radii(mesh)[t])


def min_alpha(mesh, method):
    """Stability threshold on alpha; the penalty must be strictly larger."""
    method = MethodKind(method)
    if method is MethodKind.IP:
        return 4.0 * float(spectral_radii(mesh).max())
    if method is MethodKind.BASSI:
        return 3.0
    return 0.0


def penalty_report(mesh, method, alpha):
    method = MethodKind(method)
    return PenaltyReport(method, float(alpha), min_alpha(mesh, method))


def flux_operator(mesh):
    """Sparse ``(n_edges, n_dofs)`` matrix mapping ``w`` to ``{grad w}.n_e``."""
    et = mesh.edge_triangles
    g = mesh.gradients
    n = mesh.normals
    weight = np.where(mesh.is_boundary, 1.0, 0.5)
    rows, cols, vals = [], [], []
    for side in (0, 1):
        has = et[:, side] >= 0
        e = np.flatnonzero(has)
        t = et[has, side]
        for k in range(3):
            rows.append(e)
            cols.append(3 * t + k)
            vals.append(weight[has] * np.einsum("ed,ed->e", g[t, k], n[has]))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(mesh.n_edges, mesh.n_dofs))


def _stiffness_matrix(mesh):
    S = local_stiffness(mesh)
    nt = mesh.n_triangles
    dof = 3 * np.arange(nt)[:, None] + np.arange(3)[None, :]
    rows = np.repeat(dof, 3, axis=1).reshape(-1)
    cols = np.tile(dof, (1, 3)).reshape(-1)
    return sp.csr_matrix((S.reshape(-1), (rows, cols)), shape=(mesh.n_dofs, mesh.n_dofs))


def local_lift_weights(mesh):
    """``c_e`` with ``int r_e(Pi[[w]]).r_e(Pi[[v]]) = c_e jm(w) jm(v)``."""
    et = mesh.edge_triangles
    s = np.where(mesh.is_boundary, 1.0, 0.5)
    c = (mesh.lengths * s) ** 2 / mesh.areas[et[:, 0]]
    inner = et[:, 1] >= 0
    c[inner] += (mesh.lengths[inner] * s[inner]) ** 2 / mesh.areas[et[inner, 1]]
    return c


def assemble_terms(mesh):
    """All five term matrices (see module docstring) as CSR, keyed by name."""
    J = dg_core.jump_operator(mesh)
    F = flux_operator(mesh)
    H = sp.diags(mesh.lengths)
    C = F.T @ H @ J
    L = dg_core.lift_matrix(mesh)
    D = sp.diags(mesh.areas)
    Lx = L @ sp.diags(mesh.normals[:, 0])
    Ly = L @ sp.diags(mesh.normals[:, 1])
    G = Lx.T @ D @ Lx + Ly.T @ D @ Ly
    terms = {
        "stiffness": _stiffness_matrix(mesh),
        "consistency": -(C + C.T),
        "penalty": J.T @ J,
        "lift_global": J.T @ G @ J,
        "lift_local": J.T @ sp.diags(local_lift_weights(mesh)) @ J,
    }
    return {k: sp.csr_matrix(v) for k, v in terms.items()}


def combine_terms(terms, method, alpha):
    """Form the method's matrix from precomputed terms; exactly symmetric."""
    method = MethodKind(method)
    A = terms["stiffness"] + terms["consistency"] + alpha * terms[_PENALTY_TERM[method]]
    if method in _USES_GLOBAL_LIFT:
        A = A + terms["lift_global"]
    A = sp.csr_matrix(0.5 * (A + A.T))
    A.sum_duplicates()
    A.sort_indices()
    return A


def assemble_system(mesh, method, alpha, terms=None):
    """DG stiffness matrix of ``method`` with penalty ``alpha``.

    Raises :class:`InadmissiblePenaltyError` unless ``alpha`` exceeds
    :func:`min_alpha`.
    """
    report = penalty_report(mesh, method, alpha)
    if not report.admissible:
        raise InadmissiblePenaltyError(report)
    if terms is None:
        terms = assemble_terms(mesh)
    return combine_terms(terms, report.method, report.alpha)


def _quadrature_values(mesh, f, degree):
    bary, w = quadrature.triangle_rule(degree)
    pts = quadrature.physical_points(mesh.vertices, mesh.triangles, bary)
    return bary, w, quadrature.evaluate(f, pts)


def assemble_rhs(mesh, f):
    """Load vector ``(f, phi_i)`` on the DG nodal basis (degree-4 rule)."""
    bary, w, fq = _quadrature_values(mesh, f, RHS_DEGREE)
    local = mesh.areas[:, None] * np.einsum("tq,q,qk->tk", fq, w, bary)
    return local.reshape(-1)


def cr_dof_map(mesh):
    """CR unknown index per edge (interior edges ascending), -1 on the boundary."""
    dof = np.full(mesh.n_edges, -1, dtype=np.int64)
    inner = np.flatnonzero(~mesh.is_boundary)
    dof[inner] = np.arange(len(inner))
    return dof


def assemble_cr_system(mesh, f):
    """Crouzeix-Raviart stiffness and load on interior-edge unknowns.

    Basis function of the edge opposite vertex ``k`` is ``1 - 2 lambda_k`` on
    each adjacent triangle; boundary midpoint values are fixed to zero.
    """
    dof = cr_dof_map(mesh)
    n = int(np.sum(dof >= 0))
    Sl = 4.0 * local_stiffness(mesh)
    bary, w, fq = _quadrature_values(mesh, f, RHS_DEGREE)
    load = mesh.areas[:, None] * np.einsum("tq,q,qk->tk", fq, w, 1.0 - 2.0 * bary)

    ld = dof[mesh.triangle_edges]
    rows = np.repeat(ld, 3, axis=1).reshape(-1)
    cols = np.tile(ld, (1, 3)).reshape(-1)
    keep = (rows >= 0) & (cols >= 0)
    A = sp.csr_matrix((Sl.reshape(-1)[keep], (rows[keep], cols[keep])), shape=(n, n))
    A = sp.csr_matrix(0.5 * (A + A.T))
    A.sort_indices()
    b = np.zeros(n)
    lf = ld.reshape(-1)
    mask = lf >= 0
    np.add.at(b, lf[mask], load.reshape(-1)[mask])
    return A, b


def cr_solution_to_edges(x, mesh):
    """Scatter interior CR unknowns back to a per-edge CR function."""
    dof = cr_dof_map(mesh)
    c = np.zeros(mesh.n_edges)
    c[dof >= 0] = x
    return c


def quadratic_form(A, v, w=None):
    v = np.asarray(v, dtype=float)
    return float(v @ (A @ (v if w is None else np.asarray(w, dtype=float))))


def write_coo(path, A):
    """Write a sparse matrix as ``row col value`` lines (0-based)."""
    A = sp.coo_matrix(A)
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        fh.write(f"# {A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for i, j, v in zip(A.row[order], A.col[order], A.data[order]):
            fh.write(f"{i} {j} {float(v)!r}\n")
