# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: newest-vertex-bisection closure/split and Jacobi PCG.

Each function mirrors the pure-Python version in ``_pykernels`` and must
return bitwise-identical integer output (mesh kernels).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.int64_t idx_t


def nvb_closure(const idx_t[:, ::1] tri_edges, const idx_t[:, ::1] edge_triangles,
                const idx_t[::1] ref_global, marked_in):
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] marked_arr = np.array(marked_in, dtype=np.uint8)
    cdef cnp.uint8_t[::1] marked = marked_arr
    cdef Py_ssize_t ne = marked.shape[0]
    cdef idx_t[::1] stack = np.empty(ne + 1, dtype=np.int64)
    cdef Py_ssize_t top = 0, e, s
    cdef idx_t t, r
    for e in range(ne):
        if marked[e]:
            stack[top] = e
            top += 1
    while top > 0:
        top -= 1
        e = stack[top]
        for s in range(2):
            t = edge_triangles[e, s]
            if t < 0:
                continue
            r = ref_global[t]
            if not marked[r]:
                marked[r] = 1
                stack[top] = r
                top += 1
    return marked_arr.astype(bool)


def nvb_bisect(const idx_t[:, ::1] triangles, const idx_t[:, ::1] tri_edges,
               const idx_t[::1] ref_local, const idx_t[::1] generation,
               const idx_t[::1] midpoint_vertex):
    cdef Py_ssize_t nt = triangles.shape[0]
    cdef Py_ssize_t t, n = 0, k, k1, k2
    cdef idx_t a, b, c, m, p, q, g
    cdef Py_ssize_t cap = 4 * nt
    out_tris = np.empty((cap, 3), dtype=np.int64)
    out_ref = np.empty(cap, dtype=np.int64)
    out_gen = np.empty(cap, dtype=np.int64)
    out_par = np.empty(cap, dtype=np.int64)
    cdef idx_t[:, ::1] T = out_tris
    cdef idx_t[::1] R = out_ref
    cdef idx_t[::1] G = out_gen
    cdef idx_t[::1] P = out_par
    for t in range(nt):
        k = ref_local[t]
        k1 = (k + 1) % 3
        k2 = (k + 2) % 3
        m = midpoint_vertex[tri_edges[t, k]]
        g = generation[t]
        if m < 0:
            T[n, 0] = triangles[t, 0]
            T[n, 1] = triangles[t, 1]
            T[n, 2] = triangles[t, 2]
            R[n] = k
            G[n] = g
            P[n] = t
            n += 1
            continue
        a = triangles[t, k]
        b = triangles[t, k1]
        c = triangles[t, k2]
        p = midpoint_vertex[tri_edges[t, k2]]
        q = midpoint_vertex[tri_edges[t, k1]]
        if p < 0:
            T[n, 0] = m; T[n, 1] = a; T[n, 2] = b
            R[n] = 0; G[n] = g + 1; P[n] = t
            n += 1
        else:
            T[n, 0] = p; T[n, 1] = m; T[n, 2] = a
            R[n] = 0; G[n] = g + 2; P[n] = t
            n += 1
            T[n, 0] = p; T[n, 1] = b; T[n, 2] = m
            R[n] = 0; G[n] = g + 2; P[n] = t
            n += 1
        if q < 0:
            T[n, 0] = m; T[n, 1] = c; T[n, 2] = a
            R[n] = 0; G[n] = g + 1; P[n] = t
            n += 1
        else:
            T[n, 0] = q; T[n, 1] = m; T[n, 2] = c
            R[n] = 0; G[n] = g + 2; P[n] = t
            n += 1
            T[n, 0] = q; T[n, 1] = a; T[n, 2] = m
            R[n] = 0; G[n] = g + 2; P[n] = t
            n += 1
    return out_tris[:n].copy(), out_ref[:n].copy(), out_gen[:n].copy(), out_par[:n].copy()


def pcg_jacobi(const int[::1] indptr, const int[::1] indices, const double[::1] data,
               const double[::1] b, x0, double rtol, Py_ssize_t maxiter):
    """Jacobi-preconditioned CG on a CSR matrix; matvec fused with the p.Ap dot."""
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, jj, it = 0
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef double[::1] r = np.empty(n)
    cdef double[::1] z = np.empty(n)
    cdef double[::1] p = np.empty(n)
    cdef double[::1] q = np.empty(n)
    cdef double[::1] dinv = np.empty(n)
    cdef double s, bnorm = 0.0, rz, rz_new, pq, alpha, beta, rr, d
    for i in range(n):
        d = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            if indices[jj] == i:
                d += data[jj]
        dinv[i] = 1.0 / d if d > 0.0 else 1.0
        bnorm += b[i] * b[i]
    bnorm = sqrt(bnorm)
    if bnorm == 0.0:
        for i in range(n):
            x[i] = 0.0
        return x_arr, 0, True
    rz = 0.0
    rr = 0.0
    for i in range(n):
        s = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            s += data[jj] * x[indices[jj]]
        r[i] = b[i] - s
        z[i] = dinv[i] * r[i]
        p[i] = z[i]
        rz += r[i] * z[i]
        rr += r[i] * r[i]
    while sqrt(rr) > rtol * bnorm and it < maxiter:
        pq = 0.0
        for i in range(n):
            s = 0.0
            for jj in range(indptr[i], indptr[i + 1]):
                s += data[jj] * p[indices[jj]]
            q[i] = s
            pq += p[i] * s
        if pq <= 0.0:
            break
        alpha = rz / pq
        rz_new = 0.0
        rr = 0.0
        for i in range(n):
            x[i] += alpha * p[i]
            r[i] -= alpha * q[i]
            z[i] = dinv[i] * r[i]
            rz_new += r[i] * z[i]
            rr += r[i] * r[i]
        beta = rz_new / rz
        rz = rz_new
        for i in range(n):
            p[i] = z[i] + beta * p[i]
        it += 1
    return x_arr, it, sqrt(rr) <= rtol * bnorm
