import csv
import json
import math

import numpy as np
import pytest

from adaptive_dg import dg_core, driver
from adaptive_dg.driver import (CSV_COLUMNS, ConvergenceRecord, RunConfig, adapt_loop,
                                contraction_ratios, energy_error)
from adaptive_dg.estimate import MarkingConfig
from adaptive_dg.problems import Problem, lshape_const, square_sine, unit_square_mesh
from adaptive_dg.solver import SolveReport, SolverError


def record(it, err, vol):
    return ConvergenceRecord(it, 10, 5, err, err, 1.0, 0.5, vol, 0.0, 0.0, "error", None, 1.0, 1, 0.0)


def test_energy_error_linear_is_exact(lshape):
    u = lambda x, y: 3.0 * x - y
    uh = dg_core.interpolate(u, lshape)
    assert energy_error(uh, lambda x, y: (3.0, -1.0), lshape) < 1e-13


def test_energy_error_of_zero_is_gradient_norm():
    prob = square_sine(4)
    val = energy_error(np.zeros(prob.mesh.n_dofs), prob.exact_gradient, prob.mesh)
    assert val == pytest.approx(np.pi / np.sqrt(2.0), rel=1e-6)


def test_energy_error_quadrature_degree_insensitive():
    prob = square_sine(8)
    uh = dg_core.interpolate(prob.exact_solution, prob.mesh)
    e6 = energy_error(uh, prob.exact_gradient, prob.mesh, degree=6)
    e8 = energy_error(uh, prob.exact_gradient, prob.mesh, degree=8)
    assert abs(e6 - e8) < 1e-10


def test_contraction_ratio_examples():
    assert np.allclose(contraction_ratios([record(i, 2.0, 0.3) for i in range(4)], 10.0), 1.0)
    hist = [record(0, 4.0, 0.0), record(1, 2.0, 0.0), record(2, 1.0, 0.0)]
    assert np.allclose(contraction_ratios(hist, 1.0), [0.25, 0.25])
    with pytest.raises(ValueError):
        contraction_ratios([], 1.0)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(alpha=-1.0)
    with pytest.raises(ValueError):
        RunConfig(method="cg")
    with pytest.raises(ValueError):
        RunConfig(max_dofs=0)
    assert RunConfig(alpha="2.5").alpha == 2.5


def test_auto_alpha_policy(lshape):
    assert driver.auto_alpha(lshape, "ldg") == 0.01
    assert driver.auto_alpha(lshape, "brezzi") == 0.01
    assert driver.auto_alpha(lshape, "bassi") == 3.01
    from adaptive_dg.assembly import min_alpha
    assert driver.auto_alpha(lshape, "ip") == pytest.approx(1.01 * min_alpha(lshape, "ip"))


def test_zero_load_terminates_immediately():
    prob = Problem("zero", unit_square_mesh(2), lambda x, y: 0.0)
    hist = adapt_loop(RunConfig(max_iterations=10), prob)
    assert len(hist.records) == 1
    r = hist.records[0]
    assert r.eta_sq_total == 0.0 and r.marked_edges == 0 and r.marked_triangles == 0


def test_lshape_ip_contracts():
    hist = adapt_loop(RunConfig(method="ip", max_iterations=25), lshape_const())
    eta = np.array([r.eta_sq_total for r in hist.records])
    assert np.all(np.diff(eta) < 0)
    assert np.all(eta[6:] / eta[5:-1] < 1)
    assert hist.records[-1].contraction_basis == "estimator-proxy"
    assert contraction_ratios(hist, 10.0, use_estimator_proxy=True)[4:].max() < 1


@pytest.fixture(scope="module")
def square_run():
    cfg = RunConfig(method="ldg", marking=MarkingConfig(strategy="bms"), max_iterations=10)
    return adapt_loop(cfg, square_sine(4))


def test_record_invariants(square_run):
    recs = square_run.records
    assert all(b.ndof >= a.ndof for a, b in zip(recs, recs[1:]))
    for r in recs:
        assert r.relative_residual <= driver.DEFAULT_RTOL
        assert min(r.energy_error, r.eta_sq_total, r.volume_total, r.diff_norm_sq) >= 0
        assert r.contraction_quantity == pytest.approx(r.energy_error ** 2 + 10.0 * r.volume_total)
    assert np.allclose([r.ratio for r in recs[1:]], contraction_ratios(square_run, 10.0))


def test_rate_of_nonconforming_method(square_run):
    consts = square_run.observed_constants()
    c = math.sqrt(consts["C_star_obs"])
    for r in square_run.records:
        assert r.energy_error <= r.energy_error_star + c * math.sqrt(r.volume_total) + 1e-12


def test_outputs_written(tmp_path):
    cfg = RunConfig(method="bassi", max_iterations=3, out_dir=str(tmp_path))
    hist = adapt_loop(cfg, square_sine(2))
    with open(tmp_path / "history.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS and len(rows) == 1 + len(hist.records)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["iterations"] == 3 and rep["config"]["method"] == "bassi"
    assert {"C_star_obs", "rho2_obs", "max_contraction_ratio"} <= set(rep)
    assert sorted(p.name for p in (tmp_path / "meshes").iterdir()) == [
        f"mesh_{i:03d}.{ext}" for i in range(3) for ext in ("txt", "vtk")]


def test_max_dofs_stops_before_solving_larger_mesh():
    hist = adapt_loop(RunConfig(uniform=True, max_dofs=100, max_iterations=10), square_sine(2))
    assert [r.ndof for r in hist.records] == [24, 96]


def test_solver_failure_persists_history(tmp_path, monkeypatch):
    calls = {"n": 0}
    real = driver.solve_spd

    def flaky(A, b, rel_tol):
        calls["n"] += 1
        if calls["n"] == 3:
            return np.zeros(len(b)), SolveReport(7, 0.5, False)
        return real(A, b, rel_tol)

    monkeypatch.setattr(driver, "solve_spd", flaky)
    with pytest.raises(SolverError) as info:
        adapt_loop(RunConfig(max_iterations=6, out_dir=str(tmp_path), snapshots=False),
                   square_sine(2))
    assert len(info.value.history.records) == 2
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["failure"].startswith("iteration 2")
    assert len((tmp_path / "history.csv").read_text().splitlines()) == 3
