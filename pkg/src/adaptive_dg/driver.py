"""SOLVE -> ESTIMATE -> MARK -> REFINE loop with convergence monitoring."""
import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import assembly, dg_core, estimate, postprocess, quadrature
from .assembly import MethodKind
from .estimate import MarkingConfig
from .mesh import refine, uniform_refine
from .mesh_io import write_mesh, write_vtk
from .problems import get_problem
from .solver import DEFAULT_RTOL, SolverError, solve_spd

log = logging.getLogger(__name__)

ENERGY_DEGREE = 6
WEAK_PENALTY = 0.01
BASSI_AUTO = 3.01


@dataclass(frozen=True)
class RunConfig:
    method: MethodKind = MethodKind.IP
    alpha: object = "auto"
    marking: MarkingConfig = field(default_factory=MarkingConfig)
    problem: str = "square-sine"
    max_dofs: int = 50000
    max_iterations: int = 40
    rel_tol: float = DEFAULT_RTOL
    gamma_monitor: float = 10.0
    out_dir: str | None = None
    uniform: bool = False
    snapshots: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", MethodKind(self.method))
        if self.alpha != "auto":
            object.__setattr__(self, "alpha", float(self.alpha))
            if not math.isfinite(self.alpha) or self.alpha <= 0:
                raise ValueError("alpha must be 'auto' or a positive number")
        if self.max_dofs < 1 or self.max_iterations < 1:
            raise ValueError("max_dofs and max_iterations must be positive")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.gamma_monitor < 0:
            raise ValueError("gamma_monitor must be nonnegative")


def auto_alpha(mesh, method):
    """Smallest-reasonable stable penalty: just above the stability threshold."""
    method = MethodKind(method)
    if method is MethodKind.IP:
        return 1.01 * assembly.min_alpha(mesh, method)
    if method is MethodKind.BASSI:
        return BASSI_AUTO
    return WEAK_PENALTY


@dataclass
class ConvergenceRecord:
    iteration: int
    ndof: int
    ntriangles: int
    energy_error: float | None
    energy_error_star: float | None
    eta_sq_total: float
    jump_total: float
    volume_total: float
    diff_norm_sq: float
    contraction_quantity: float
    contraction_basis: str
    ratio: float | None
    alpha: float
    solver_iterations: int
    relative_residual: float
    marked_edges: int = 0
    marked_triangles: int = 0
    branch: str = ""
    wall_time: float = 0.0


# wall_time is excluded so that identical runs give byte-identical files.
CSV_COLUMNS = [f.name for f in fields(ConvergenceRecord) if f.name != "wall_time"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class ConvergenceHistory:
    problem: str
    method: str
    records: list = field(default_factory=list)
    failure: str | None = None

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in self.records:
                w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])

    def observed_constants(self, start=5):
        recs = self.records
        cstar = [r.diff_norm_sq / r.volume_total for r in recs if r.volume_total > 0]
        osc = [b.volume_total / a.volume_total for a, b in zip(recs, recs[1:])
               if a.volume_total > 0]
        ratios = [r.ratio for r in recs[start:] if r.ratio is not None]
        return {
            "C_star_obs": max(cstar) if cstar else None,
            "rho2_obs": max(osc) if osc else None,
            "max_contraction_ratio": max(ratios) if ratios else None,
            "contraction_from_iteration": start,
        }

    def report(self):
        last = self.records[-1] if self.records else None
        return {
            "problem": self.problem,
            "method": self.method,
            "iterations": len(self.records),
            "final_ndof": last.ndof if last else None,
            "final_energy_error": last.energy_error if last else None,
            "final_eta": math.sqrt(last.eta_sq_total) if last else None,
            "contraction_basis": last.contraction_basis if last else None,
            "failure": self.failure,
            "total_wall_time": sum(r.wall_time for r in self.records),
            **self.observed_constants(),
        }


def energy_error(u_h, exact_gradient, mesh, degree=ENERGY_DEGREE):
    """``||grad_h (u - u_h)||`` by a fixed symmetric rule of the given degree."""
    bary, w = quadrature.triangle_rule(degree)
    pts = quadrature.physical_points(mesh.vertices, mesh.triangles, bary)
    gx, gy = exact_gradient(pts[..., 0], pts[..., 1])
    gh = dg_core.element_gradients(u_h, mesh)
    dx = np.broadcast_to(gx, pts.shape[:2]) - gh[:, None, 0]
    dy = np.broadcast_to(gy, pts.shape[:2]) - gh[:, None, 1]
    return float(math.sqrt(np.sum(mesh.areas * ((dx * dx + dy * dy) @ w))))


def contraction_ratios(history, gamma_mon, use_estimator_proxy=False):
    """Successive ratios of ``err^2 + gamma_mon * ||hf||^2``.

    ``err`` is the exact energy error, or the estimator when
    ``use_estimator_proxy`` is set. Pairs with an undefined quantity or a
    vanishing denominator are skipped.
    """
    records = history.records if hasattr(history, "records") else list(history)
    if not records:
        raise ValueError("empty history")

    def quantity(r):
        err2 = r.eta_sq_total if use_estimator_proxy else (
            None if r.energy_error is None else r.energy_error ** 2)
        return None if err2 is None else err2 + gamma_mon * r.volume_total

    q = [quantity(r) for r in records]
    return np.array([b / a for a, b in zip(q, q[1:])
                     if a is not None and b is not None and a > 0])


def _solve_dg(mesh, problem, method, alpha, rel_tol):
    A = assembly.assemble_system(mesh, method, alpha)
    b = assembly.assemble_rhs(mesh, problem.f)
    x, rep = solve_spd(A, b, rel_tol)
    return A, b, x, rep


def adapt_loop(cfg, problem=None):
    """Run the adaptive (or uniform) loop; returns a :class:`ConvergenceHistory`.

    On solver failure the partial history is written (when ``out_dir`` is
    set) and :class:`~adaptive_dg.solver.SolverError` is raised with the
    history attached as ``exc.history``.
    """
    if problem is None:
        problem = get_problem(cfg.problem)
    out = Path(cfg.out_dir) if cfg.out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if cfg.snapshots:
            (out / "meshes").mkdir(exist_ok=True)
    history = ConvergenceHistory(problem.name, cfg.method.value)
    mesh = problem.mesh
    prev_q = None

    for it in range(cfg.max_iterations):
        t0 = time.perf_counter()
        alpha = auto_alpha(mesh, cfg.method) if cfg.alpha == "auto" else cfg.alpha
        A, b, u_h, rep = _solve_dg(mesh, problem, cfg.method, alpha, cfg.rel_tol)
        if not rep.converged:
            history.failure = (f"iteration {it}: CG stopped after {rep.iterations} iterations "
                               f"with relative residual {rep.relative_residual:.3e}")
            _persist(history, out)
            exc = SolverError(rep)
            exc.history = history
            raise exc

        u_star = postprocess.average_to_cr(u_h, mesh)
        est = estimate.estimate(u_star, problem.f, mesh)
        if problem.exact_gradient is not None:
            err = energy_error(u_h, problem.exact_gradient, mesh)
            err_star = energy_error(dg_core.cr_to_dg(u_star, mesh), problem.exact_gradient, mesh)
            basis = "error"
            q = err ** 2 + cfg.gamma_monitor * est.volume_total
        else:
            err = err_star = None
            basis = "estimator-proxy"
            q = est.eta_sq_total + cfg.gamma_monitor * est.volume_total
        rec = ConvergenceRecord(
            iteration=it, ndof=mesh.n_dofs, ntriangles=mesh.n_triangles,
            energy_error=err, energy_error_star=err_star,
            eta_sq_total=est.eta_sq_total, jump_total=est.jump_total,
            volume_total=est.volume_total,
            diff_norm_sq=postprocess.diff_norm_sq(u_h, u_star, mesh),
            contraction_quantity=q, contraction_basis=basis,
            ratio=(q / prev_q) if prev_q else None, alpha=float(alpha),
            solver_iterations=rep.iterations, relative_residual=rep.relative_residual)
        prev_q = q

        if out is not None and cfg.snapshots:
            stem = out / "meshes" / f"mesh_{it:03d}"
            write_mesh(stem.with_suffix(".txt"), mesh)
            write_vtk(stem.with_suffix(".vtk"), mesh, dg=u_h,
                      cell_data={"volume_indicator": est.per_element_volume,
                                 "generation": mesh.generation})

        history.records.append(rec)
        if it == cfg.max_iterations - 1:
            rec.wall_time = time.perf_counter() - t0
            break
        if cfg.uniform:
            new_mesh, _ = uniform_refine(mesh)
            rec.marked_edges = mesh.n_edges
        else:
            marks = estimate.mark(est, cfg.marking)
            rec.marked_edges = len(marks.marked_edges)
            rec.marked_triangles = len(marks.marked_triangles)
            rec.branch = marks.branch or ""
            if rec.marked_edges == 0 and rec.marked_triangles == 0:
                log.info("nothing marked at iteration %d; stopping", it)
                rec.wall_time = time.perf_counter() - t0
                break
            new_mesh, _ = refine(mesh, marks.marked_edges, marks.marked_triangles)
        rec.wall_time = time.perf_counter() - t0
        log.info("it=%d ndof=%d eta=%.4e ratio=%s", it, rec.ndof,
                 math.sqrt(rec.eta_sq_total), rec.ratio)
        if new_mesh.n_dofs > cfg.max_dofs:
            break
        mesh = new_mesh

    _persist(history, out, cfg)
    return history


def _persist(history, out, cfg=None):
    if out is None:
        return
    history.write_csv(out / "history.csv")
    rep = history.report()
    if cfg is not None:
        c = asdict(cfg)
        c["method"] = cfg.method.value
        c["marking"]["strategy"] = cfg.marking.strategy.value
        rep["config"] = c
    with open(out / "report.json", "w") as fh:
        json.dump(rep, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
