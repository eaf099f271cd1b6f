"""Jacobi-preconditioned conjugate gradients for the SPD systems."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels

DEFAULT_RTOL = 1e-10


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    relative_residual: float
    converged: bool


class SolverError(RuntimeError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"CG did not converge: {report.iterations} iterations, "
            f"relative residual {report.relative_residual:.3e}")


def _csr32(A):
    A = sp.csr_matrix(A, dtype=float)
    A.sort_indices()
    return (np.ascontiguousarray(A.indptr, dtype=np.int32),
            np.ascontiguousarray(A.indices, dtype=np.int32),
            np.ascontiguousarray(A.data, dtype=np.float64))


def solve_spd(A, b, rel_tol=DEFAULT_RTOL, maxiter=None, x0=None, backend=None):
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    The reported residual ``||b - A x|| / ||b||`` is recomputed from the
    returned iterate, not taken from the CG recurrence. If the recurrence
    stops early because of drift, CG restarts from the current iterate while
    iterations remain. Non-convergence is reported in the
    :class:`SolveReport`, never raised here.

    ``maxiter`` defaults to ``10 * n``.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    b = np.ascontiguousarray(b, dtype=float)
    n = b.shape[0]
    if maxiter is None:
        maxiter = 10 * n
    impl = kernels if backend is None else kernels.get_backend(backend)
    indptr, indices, data = _csr32(A)
    Acsr = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = float(np.linalg.norm(b))
    if n == 0 or bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)

    used = 0
    while True:
        x, its, _ = impl.pcg_jacobi(indptr, indices, data, b, x, rel_tol, maxiter - used)
        used += int(its)
        rel = float(np.linalg.norm(b - Acsr @ x)) / bnorm
        if rel <= rel_tol or used >= maxiter or its == 0:
            return x, SolveReport(used, rel, rel <= rel_tol)
