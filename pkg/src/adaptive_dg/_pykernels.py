"""Pure-Python (numpy/scipy) versions of the hot loops in ``_ckernels``."""
import numpy as np
import scipy.sparse as sp


def nvb_closure(tri_edges, edge_triangles, ref_global, marked):
    marked = np.array(marked, dtype=bool)
    while True:
        need = marked[tri_edges].any(axis=1) & ~marked[ref_global]
        if not need.any():
            return marked
        marked[ref_global[need]] = True


def nvb_bisect(triangles, tri_edges, ref_local, generation, midpoint_vertex):
    nt = len(triangles)
    rows = np.arange(nt)
    k = ref_local
    k1 = (k + 1) % 3
    k2 = (k + 2) % 3
    a = triangles[rows, k]
    b = triangles[rows, k1]
    c = triangles[rows, k2]
    m = midpoint_vertex[tri_edges[rows, k]]
    p = midpoint_vertex[tri_edges[rows, k2]]
    q = midpoint_vertex[tri_edges[rows, k1]]

    slots = np.full((nt, 4, 3), -1, dtype=np.int64)
    ref = np.zeros((nt, 4), dtype=np.int64)
    gen = np.zeros((nt, 4), dtype=np.int64)
    valid = np.zeros((nt, 4), dtype=bool)

    keep = m < 0
    slots[keep, 0] = triangles[keep]
    ref[keep, 0] = ref_local[keep]
    gen[keep, 0] = generation[keep]
    valid[keep, 0] = True

    split = ~keep
    left1 = split & (p < 0)
    left2 = split & (p >= 0)
    right1 = split & (q < 0)
    right2 = split & (q >= 0)
    slots[left1, 0] = np.stack([m, a, b], axis=1)[left1]
    gen[left1, 0] = generation[left1] + 1
    valid[left1, 0] = True
    slots[left2, 0] = np.stack([p, m, a], axis=1)[left2]
    slots[left2, 1] = np.stack([p, b, m], axis=1)[left2]
    gen[left2, 0:2] = (generation[left2] + 2)[:, None]
    valid[left2, 0:2] = True
    slots[right1, 2] = np.stack([m, c, a], axis=1)[right1]
    gen[right1, 2] = generation[right1] + 1
    valid[right1, 2] = True
    slots[right2, 2] = np.stack([q, m, c], axis=1)[right2]
    slots[right2, 3] = np.stack([q, a, m], axis=1)[right2]
    gen[right2, 2:4] = (generation[right2] + 2)[:, None]
    valid[right2, 2:4] = True

    parent = np.broadcast_to(rows[:, None], (nt, 4))
    return (slots[valid], ref[valid], gen[valid], parent[valid].copy())


def pcg_jacobi(indptr, indices, data, b, x0, rtol, maxiter):
    """Jacobi-preconditioned CG on a CSR matrix given by its raw arrays."""
    n = len(b)
    A = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    d = A.diagonal()
    dinv = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 1.0)
    b = np.asarray(b, dtype=float)
    x = np.array(x0, dtype=float, copy=True)
    bnorm = np.sqrt(b @ b)
    if bnorm == 0.0:
        return np.zeros(n), 0, True
    r = b - A @ x
    z = dinv * r
    p = z.copy()
    rz = r @ z
    rr = r @ r
    it = 0
    while np.sqrt(rr) > rtol * bnorm and it < maxiter:
        q = A @ p
        pq = p @ q
        if pq <= 0.0:
            break
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = dinv * r
        rz_new = r @ z
        rr = r @ r
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    return x, it, bool(np.sqrt(rr) <= rtol * bnorm)
