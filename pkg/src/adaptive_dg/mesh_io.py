"""Plain-text node/element mesh files and legacy VTK export.

Node/element format: first line ``NV NT``, then ``NV`` lines ``x y``, then
``NT`` lines ``v0 v1 v2`` with 0-based vertex indices. Lines starting with
``#`` are ignored on read.
"""
import numpy as np

from .mesh import MeshError, build_mesh


def read_mesh(path):
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        nv, nt = int(lines[0][0]), int(lines[0][1])
        verts = np.array([[float(a) for a in ln[:2]] for ln in lines[1:1 + nv]])
        tris = np.array([[int(a) for a in ln[:3]] for ln in lines[1 + nv:1 + nv + nt]],
                        dtype=np.int64)
    except (IndexError, ValueError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from None
    if len(verts) != nv or len(tris) != nt:
        raise MeshError(f"mesh file {path} is truncated")
    return build_mesh(verts, tris)


def write_mesh(path, mesh):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")


def write_vtk(path, mesh, dg=None, cell_data=None, title="adaptive-dg mesh"):
    """Legacy ASCII VTK unstructured grid.

    With a DG vector ``dg`` every triangle gets its own three points so the
    discontinuous field is stored exactly as point data.
    """
    cell_data = cell_data or {}
    nt = mesh.n_triangles
    if dg is None:
        pts = mesh.vertices
        conn = mesh.triangles
    else:
        pts = mesh.vertices[mesh.triangles].reshape(-1, 2)
        conn = np.arange(3 * nt).reshape(nt, 3)
    with open(path, "w") as fh:
        fh.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(pts)} double\n")
        for x, y in pts:
            fh.write(f"{float(x)!r} {float(y)!r} 0.0\n")
        fh.write(f"CELLS {nt} {4 * nt}\n")
        for a, b, c in conn:
            fh.write(f"3 {a} {b} {c}\n")
        fh.write(f"CELL_TYPES {nt}\n")
        fh.write("5\n" * nt)
        if dg is not None:
            fh.write(f"POINT_DATA {3 * nt}\nSCALARS u_h double 1\nLOOKUP_TABLE default\n")
            for val in np.asarray(dg, dtype=float).reshape(-1):
                fh.write(f"{float(val)!r}\n")
        if cell_data:
            fh.write(f"CELL_DATA {nt}\n")
            for name, vals in cell_data.items():
                fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                for val in np.asarray(vals, dtype=float).reshape(-1):
                    fh.write(f"{float(val)!r}\n")
