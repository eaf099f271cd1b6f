"""Conforming triangulations with edge adjacency and newest-vertex bisection.

Conventions
-----------
* Triangles are stored counterclockwise. Local edge ``k`` of a triangle is
  the edge opposite its local vertex ``k``.
* Each edge has a minus side ``T-`` (the adjacent triangle with the lower
  global index) and, for interior edges, a plus side ``T+``. The unit normal
  is the outer normal of ``T-``; the edge's vertex pair is stored in the
  counterclockwise order of ``T-`` so that the tangent ``(B - A) / h_e`` is
  the normal rotated by +90 degrees.
* ``refinement_edge[t]`` is the local index of the edge bisected first by
  newest-vertex bisection (NVB).
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels


class MeshError(ValueError):
    """Invalid triangulation input (degenerate, non-conforming, bad indices)."""


class Edge(NamedTuple):
    vertex_ids: tuple
    t_minus: int
    t_plus: int | None
    normal: np.ndarray
    length: float
    midpoint: np.ndarray


class Triangle(NamedTuple):
    vertex_ids: tuple
    refinement_edge: int
    generation: int
    parent_id: int | None


@dataclass(frozen=True, eq=False)
class RefinementMap:
    """Links a refined mesh back to its parent.

    ``child_to_parent[t]`` is the parent-mesh index of child triangle ``t``;
    ``bisected_edges`` lists the parent edges that were split.
    """

    child_to_parent: np.ndarray
    bisected_edges: np.ndarray


class Mesh:
    """Immutable 2D triangulation with derived edge and element geometry.

    Construct with :func:`build_mesh`; :func:`refine` returns new instances.
    Arrays are read-only views.
    """

    def __init__(self, vertices, triangles, refinement_edge, generation, parent):
        self.vertices = _frozen(np.asarray(vertices, dtype=float))
        self.triangles = _frozen(np.asarray(triangles, dtype=np.int64))
        self.refinement_edge = _frozen(np.asarray(refinement_edge, dtype=np.int64))
        self.generation = _frozen(np.asarray(generation, dtype=np.int64))
        self.parent = _frozen(np.asarray(parent, dtype=np.int64))
        self._derive()

    def _derive(self):
        v = self.vertices
        t = self.triangles
        nt = len(t)
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        d1 = p1 - p0
        d2 = p2 - p0
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        self.areas = _frozen(0.5 * det)

        # Barycentric gradients: grad(lambda_k) = rot(p_{k+2} - p_{k+1}) / (2|T|).
        corners = v[t]
        opp = np.roll(corners, -2, axis=1) - np.roll(corners, -1, axis=1)
        grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / det[:, None, None]
        self.gradients = _frozen(grads)

        local = np.stack([np.roll(t, -1, axis=1), np.roll(t, -2, axis=1)], axis=-1)
        flat = local.reshape(-1, 2)
        lo = flat.min(axis=1)
        hi = flat.max(axis=1)
        nv = len(v)
        keys = lo * nv + hi
        uniq, first, inverse, counts = np.unique(
            keys, return_index=True, return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            raise MeshError("an edge is shared by more than two triangles")
        ne = len(uniq)
        tri_edges = inverse.reshape(nt, 3)
        self.triangle_edges = _frozen(tri_edges)

        slot_tri = np.repeat(np.arange(nt), 3)
        slot_loc = np.tile(np.arange(3), nt)
        # Second occurrence (if any) is the plus side.
        order = np.argsort(inverse, kind="stable")
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        second = np.full(ne, -1, dtype=np.int64)
        has2 = counts == 2
        second[has2] = order[starts[has2] + 1]

        edge_tris = np.full((ne, 2), -1, dtype=np.int64)
        edge_loc = np.full((ne, 2), -1, dtype=np.int64)
        edge_tris[:, 0] = slot_tri[first]
        edge_loc[:, 0] = slot_loc[first]
        edge_tris[has2, 1] = slot_tri[second[has2]]
        edge_loc[has2, 1] = slot_loc[second[has2]]
        self.edge_triangles = _frozen(edge_tris)
        self.edge_local = _frozen(edge_loc)

        edges = flat[first]  # counterclockwise order of T-
        self.edges = _frozen(edges)
        a = v[edges[:, 0]]
        b = v[edges[:, 1]]
        tangent = b - a
        lengths = np.hypot(tangent[:, 0], tangent[:, 1])
        self.lengths = _frozen(lengths)
        self.tangents = _frozen(tangent / lengths[:, None])
        self.normals = _frozen(np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / lengths[:, None])
        self.midpoints = _frozen(0.5 * (a + b))
        self.is_boundary = _frozen(edge_tris[:, 1] < 0)
        self.diameters = _frozen(lengths[tri_edges].max(axis=1))

    # --- sizes -----------------------------------------------------------
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_dofs(self):
        """Dimension of the discontinuous P1 space (3 per triangle)."""
        return 3 * len(self.triangles)

    @property
    def interior_edges(self):
        return np.flatnonzero(~self.is_boundary)

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.is_boundary)

    # --- single-entity queries -----------------------------------------
    def edge(self, e):
        tp = int(self.edge_triangles[e, 1])
        return Edge(tuple(int(i) for i in self.edges[e]), int(self.edge_triangles[e, 0]),
                    None if tp < 0 else tp, self.normals[e], float(self.lengths[e]),
                    self.midpoints[e])

    def triangle(self, t):
        par = int(self.parent[t])
        return Triangle(tuple(int(i) for i in self.triangles[t]), int(self.refinement_edge[t]),
                        int(self.generation[t]), None if par < 0 else par)

    def refinement_edge_ids(self):
        """Global edge index of every triangle's refinement edge."""
        return self.triangle_edges[np.arange(self.n_triangles), self.refinement_edge]

    def total_area(self):
        return float(np.sum(self.areas))

    def min_angle(self):
        """Smallest interior angle (radians) over all triangles."""
        c = self.vertices[self.triangles]
        u = np.roll(c, -1, axis=1) - c
        w = np.roll(c, -2, axis=1) - c
        cosang = np.einsum("tkd,tkd->tk", u, w) / (
            np.linalg.norm(u, axis=2) * np.linalg.norm(w, axis=2))
        return float(np.arccos(np.clip(cosang, -1.0, 1.0)).min())

    def __repr__(self):
        return (f"Mesh(nv={self.n_vertices}, nt={self.n_triangles}, ne={self.n_edges}, "
                f"interior={int(np.sum(~self.is_boundary))})")


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _longest_edge_choice(mesh):
    L = mesh.lengths[mesh.triangle_edges]
    E = mesh.triangle_edges
    lmax = L.max(axis=1, keepdims=True)
    tie = L >= lmax * (1.0 - 1e-12)
    return np.where(tie, E, np.iinfo(np.int64).max).argmin(axis=1)


def _check_hanging_nodes(mesh, tol=1e-12):
    bnd = mesh.boundary_edges
    if len(bnd) == 0:
        return
    v = mesh.vertices
    scale = max(float(np.ptp(v[:, 0])), float(np.ptp(v[:, 1])), 1.0)
    for start in range(0, len(bnd), 256):
        chunk = bnd[start:start + 256]
        a = v[mesh.edges[chunk, 0]][:, None, :]
        d = (v[mesh.edges[chunk, 1]] - v[mesh.edges[chunk, 0]])[:, None, :]
        rel = v[None, :, :] - a
        cross = d[..., 0] * rel[..., 1] - d[..., 1] * rel[..., 0]
        s = np.einsum("eid,eid->ei", rel, d) / np.einsum("eid,eid->ei", d, d)
        on_line = np.abs(cross) <= tol * scale * scale
        inside = (s > tol) & (s < 1 - tol)
        if np.any(on_line & inside):
            raise MeshError("non-conforming input: hanging node detected")


def build_mesh(vertices, triangle_vertex_ids):
    """Build a :class:`Mesh` from coordinates and vertex-index triples.

    Clockwise triangles are reoriented. The refinement edge of each triangle
    is its longest edge, ties going to the lowest global edge index.

    Raises
    ------
    MeshError
        On bad indices, degenerate triangles, edges shared by more than two
        triangles or hanging nodes.
    """
    v = np.asarray(vertices, dtype=float)
    t = np.array(triangle_vertex_ids, dtype=np.int64).reshape(-1, 3)
    if v.ndim != 2 or v.shape[1] != 2 or not np.all(np.isfinite(v)):
        raise MeshError("vertices must be a finite (n, 2) array")
    if t.size and (t.min() < 0 or t.max() >= len(v)):
        raise MeshError("triangle references a nonexistent vertex")
    if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
        raise MeshError("triangle with repeated vertex")
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    scale = max(float(np.ptp(v[:, 0])), float(np.ptp(v[:, 1])), 1e-300)
    if np.any(np.abs(det) <= 1e-14 * scale * scale):
        raise MeshError("zero-area triangle")
    cw = det < 0
    t[cw] = t[cw][:, [0, 2, 1]]

    nt = len(t)
    zeros = np.zeros(nt, dtype=np.int64)
    mesh = Mesh(v, t, zeros, zeros, np.full(nt, -1, dtype=np.int64))
    _check_hanging_nodes(mesh)
    ref = _longest_edge_choice(mesh)
    return Mesh(v, t, ref, zeros, np.full(nt, -1, dtype=np.int64))


def refine(mesh, marked_edges=(), marked_triangles=()):
    """Refine by newest-vertex bisection with conforming closure.

    Every marked edge is bisected; every marked triangle has its refinement
    edge bisected. Further edges are bisected as needed to remove hanging
    nodes. Returns ``(new_mesh, RefinementMap)``; with nothing marked the
    input mesh is returned unchanged with the identity map.
    """
    marked = np.zeros(mesh.n_edges, dtype=bool)
    marked[np.fromiter(marked_edges, dtype=np.int64)] = True
    mt = np.fromiter(marked_triangles, dtype=np.int64)
    ref_global = np.ascontiguousarray(mesh.refinement_edge_ids(), dtype=np.int64)
    marked[ref_global[mt]] = True
    if not marked.any():
        return mesh, RefinementMap(np.arange(mesh.n_triangles), np.zeros(0, dtype=np.int64))

    marked = kernels.nvb_closure(np.ascontiguousarray(mesh.triangle_edges),
                                 np.ascontiguousarray(mesh.edge_triangles), ref_global, marked)
    split = np.flatnonzero(marked)
    mid_vertex = np.full(mesh.n_edges, -1, dtype=np.int64)
    mid_vertex[split] = mesh.n_vertices + np.arange(len(split))
    vertices = np.vstack([mesh.vertices, mesh.midpoints[split]])

    tris, ref, gen, parent = kernels.nvb_bisect(
        np.ascontiguousarray(mesh.triangles), np.ascontiguousarray(mesh.triangle_edges),
        np.ascontiguousarray(mesh.refinement_edge), np.ascontiguousarray(mesh.generation),
        mid_vertex)
    child = Mesh(vertices, tris, ref, gen, parent)
    return child, RefinementMap(np.asarray(parent), split)


def uniform_refine(mesh):
    """Bisect every edge once (each triangle splits into four similar-class children)."""
    return refine(mesh, marked_edges=np.arange(mesh.n_edges))


def conformity_defects(mesh):
    """Recompute adjacency from the raw triangle list and report problems.

    Returns a list of human-readable defects; empty means conforming.
    """
    defects = []
    counts = {}
    for t, tri in enumerate(mesh.triangles.tolist()):
        for k in range(3):
            e = tuple(sorted((tri[(k + 1) % 3], tri[(k + 2) % 3])))
            counts.setdefault(e, []).append(t)
    if len(counts) != mesh.n_edges:
        defects.append(f"edge count {len(counts)} != stored {mesh.n_edges}")
    for e, ts in counts.items():
        if len(ts) > 2:
            defects.append(f"edge {e} has {len(ts)} triangles")
    try:
        _check_hanging_nodes(mesh)
    except MeshError as exc:
        defects.append(str(exc))
    if np.any(mesh.areas <= 0):
        defects.append("non-positive area")
    return defects
