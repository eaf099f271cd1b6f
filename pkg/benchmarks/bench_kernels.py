"""Compare the compiled and numpy kernel backends on NVB refinement and PCG.

    python benchmarks/bench_kernels.py --levels 6 --repeat 3
"""
import argparse
import time

import numpy as np

from adaptive_dg import assembly, kernels
from adaptive_dg.mesh import uniform_refine
from adaptive_dg.problems import square_sine
from adaptive_dg.solver import solve_spd


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_closure(mesh, impl, rng):
    marked = np.zeros(mesh.n_edges, dtype=np.uint8)
    marked[rng.choice(mesh.n_edges, max(1, mesh.n_edges // 50), replace=False)] = 1
    ref = mesh.refinement_edge_ids().astype(np.int64)
    return lambda: impl.nvb_closure(np.asarray(mesh.triangle_edges, dtype=np.int64),
                                    np.asarray(mesh.edge_triangles, dtype=np.int64),
                                    ref, marked.copy())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--levels", type=int, default=5, help="uniform refinements of the 8x8 mesh")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    prob = square_sine()
    mesh = prob.mesh
    for _ in range(args.levels):
        mesh, _ = uniform_refine(mesh)
    A = assembly.assemble_system(mesh, "ip", 1.01 * assembly.min_alpha(mesh, "ip"))
    b = assembly.assemble_rhs(mesh, prob.f)
    rng = np.random.default_rng(0)
    print(f"mesh: {mesh.n_triangles} triangles, {mesh.n_dofs} dofs")
    print(f"{'kernel':10s} " + " ".join(f"{name:>10s}" for name in kernels.BACKENDS))

    rows = {
        "closure": {n: bench_closure(mesh, m, rng) for n, m in kernels.BACKENDS.items()},
        "pcg": {n: (lambda n=n: solve_spd(A, b, backend=n)) for n in kernels.BACKENDS},
    }
    for kernel, fns in rows.items():
        times = {n: best_of(fn, args.repeat) for n, fn in fns.items()}
        print(f"{kernel:10s} " + " ".join(f"{times[n]:9.4f}s" for n in kernels.BACKENDS))

    # full refinement exercises closure and bisection through the selected backend
    t = best_of(lambda: uniform_refine(mesh), args.repeat)
    print(f"uniform_refine with backend {kernels.BACKEND}: {t:.4f}s")


if __name__ == "__main__":
    main()
