import subprocess
import sys

import pytest

from adaptive_dg import cli
from adaptive_dg.mesh_io import write_mesh
from adaptive_dg.problems import lshape_mesh


def test_run_and_determinism(tmp_path, capsys):
    args = ["run", "--method", "brezzi", "--marking", "bms", "--max-iterations", "6",
            "--problem", "square-sine"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "history.csv").read_bytes()
    assert a == (tmp_path / "b" / "history.csv").read_bytes()
    assert "brezzi" in capsys.readouterr().out


def test_mesh_file_problem(tmp_path):
    path = tmp_path / "l.txt"
    write_mesh(path, lshape_mesh())
    assert cli.main(["run", "--problem", str(path), "--max-iterations", "3", "--no-snapshots",
                     "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("argv", [
    ["run", "--method", "cg"],
    ["run", "--alpha", "zero"],
    ["run", "--theta", "1.5"],
    ["run", "--method", "bassi", "--alpha", "2"],
    ["run", "--problem", "no/such/file.txt"],
    ["frobnicate"],
])
def test_invalid_config_exit_code(argv, capsys):
    assert cli.main(argv) == cli.EXIT_CONFIG


def test_solver_failure_exit_code(monkeypatch, tmp_path):
    from adaptive_dg import driver
    from adaptive_dg.solver import SolveReport
    import numpy as np

    monkeypatch.setattr(driver, "solve_spd",
                        lambda A, b, tol: (np.zeros(len(b)), SolveReport(1, 1.0, False)))
    assert cli.main(["run", "--out", str(tmp_path), "--no-snapshots"]) == cli.EXIT_SOLVER
    assert (tmp_path / "report.json").exists()


def test_verify(capsys):
    assert cli.main(["verify", "--problem", "lshape-const", "--levels", "2", "--pairs", "5"]) == 0
    out = capsys.readouterr().out
    assert "18/18 checks passed" in out


def test_verify_failure_exit_code(monkeypatch):
    from adaptive_dg import verify
    monkeypatch.setattr(verify, "CR_TOL", -1.0)
    assert cli.main(["verify", "--method", "ip", "--levels", "1", "--pairs", "1"]) == cli.EXIT_VERIFY


def test_sweep(tmp_path, capsys):
    assert cli.main(["sweep", "--max-iterations", "2", "--problem", "lshape-const",
                     "--no-snapshots", "--out", str(tmp_path)]) == 0
    assert len(list(tmp_path.glob("*/history.csv"))) == 8
    assert len(capsys.readouterr().out.splitlines()) == 8


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "adaptive_dg.cli", "run", "--max-iterations", "2",
                           "--out", str(tmp_path), "--no-snapshots"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
