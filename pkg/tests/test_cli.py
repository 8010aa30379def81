"""Command-line workflows, exit codes and report schema."""

import json
import subprocess
import sys

import numpy as np
import pytest

from abreu import read_field, sup_norm, write_field
from abreu.cli import main
from tests.support import manufactured_problem


@pytest.fixture()
def manufactured_files(tmp_path):
    """A.fld for the 1D manufactured problem plus its solved phi.fld."""
    _, a, _ = manufactured_problem(64)
    a_path = tmp_path / "A.fld"
    write_field(a_path, a)
    phi_path = tmp_path / "phi.fld"
    code = main(
        ["solve", "--rhs", str(a_path), "--out", str(phi_path)]
    )
    assert code == 0
    return a_path, phi_path


class TestSynthAndApply:
    def test_synth_writes_expression(self, tmp_path):
        out = tmp_path / "f.fld"
        code = main(
            ["synth", "--dim", "2", "--resolution", "16,16",
             "--expr", "cos(2*pi*x1)+cos(2*pi*x2)", "--out", str(out)]
        )
        assert code == 0
        f = read_field(out)
        x, y = f.grid.coordinate_arrays()
        assert np.array_equal(f.values, np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y))

    def test_apply_flat_is_zero_bytes(self, tmp_path):
        phi = tmp_path / "phi.fld"
        out = tmp_path / "A.fld"
        assert main(["synth", "--dim", "1", "--resolution", "16",
                     "--expr", "0", "--out", str(phi)]) == 0
        assert main(["apply", "--phi", str(phi), "--out", str(out)]) == 0
        f = read_field(out)
        assert np.array_equal(f.values, np.zeros(16))

    def test_nonperiodic_warning(self, tmp_path, capsys):
        out = tmp_path / "saw.fld"
        assert main(["synth", "--dim", "1", "--resolution", "16",
                     "--expr", "x1", "--out", str(out)]) == 0
        assert "not numerically periodic" in capsys.readouterr().err


class TestSolve:
    def test_manufactured_solve_report(self, tmp_path, manufactured_files):
        a_path, _ = manufactured_files
        out = tmp_path / "phi2.fld"
        report = tmp_path / "run.json"
        code = main(["solve", "--rhs", str(a_path), "--out", str(out),
                     "--report", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["schema_version"] == 1
        assert payload["config"]["newton_tolerance"] == 1e-10
        steps = payload["trace"]["steps"]
        assert steps[-1]["t"] == 1.0
        assert payload["residual_norms"]["final_sup"] < 1e-7
        assert payload["bounds"]["det_min"] <= payload["bounds"]["det_max"]
        assert payload["wall_clock_seconds"] > 0.0

    def test_nonzero_mean_exits_2(self, tmp_path):
        out = tmp_path / "x.fld"
        code = main(["solve", "--dim", "1", "--resolution", "16",
                     "--expr", "1", "--out", str(out)])
        assert code == 2
        assert not out.exists()

    def test_project_mean_flag(self, tmp_path):
        out = tmp_path / "x.fld"
        code = main(["solve", "--dim", "1", "--resolution", "16",
                     "--expr", "1", "--project-mean", "--out", str(out)])
        assert code == 0
        assert sup_norm(read_field(out)) < 1e-12  # projected rhs is zero

    def test_deterministic_output(self, tmp_path, manufactured_files):
        a_path, _ = manufactured_files
        p1, p2 = tmp_path / "s1.fld", tmp_path / "s2.fld"
        assert main(["solve", "--rhs", str(a_path), "--out", str(p1)]) == 0
        assert main(["solve", "--rhs", str(a_path), "--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_grid_flag_mismatch_exits_1(self, tmp_path, manufactured_files):
        a_path, _ = manufactured_files
        code = main(["solve", "--dim", "2", "--rhs", str(a_path),
                     "--out", str(tmp_path / "n.fld")])
        assert code == 1

    def test_tolerance_flags_reach_config(self, tmp_path, manufactured_files):
        a_path, _ = manufactured_files
        report = tmp_path / "run.json"
        code = main(["solve", "--rhs", str(a_path), "--out", str(tmp_path / "p.fld"),
                     "--tol", "1e-9", "--t-step", "0.25", "--report", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["config"]["newton_tolerance"] == 1e-9
        assert payload["config"]["initial_t_step"] == 0.25


class TestResidualAndVerify:
    def test_residual_of_solution_small(self, tmp_path, manufactured_files):
        a_path, phi_path = manufactured_files
        out = tmp_path / "r.fld"
        assert main(["residual", "--phi", str(phi_path), "--rhs", str(a_path),
                     "--out", str(out)]) == 0
        assert sup_norm(read_field(out)) < 1e-7

    def test_verify_passes_on_solution(self, tmp_path, manufactured_files):
        a_path, phi_path = manufactured_files
        report = tmp_path / "verify.json"
        code = main(["verify", "--phi", str(phi_path), "--rhs", str(a_path),
                     "--report", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["verification"]["passed"] is True
        checks = payload["verification"]["bounds"]["inequalities"]
        assert all(c["satisfied"] for c in checks)

    def test_verify_flags_corruption(self, tmp_path, manufactured_files):
        a_path, phi_path = manufactured_files
        phi = read_field(phi_path)
        x = phi.grid.axis_coordinates(0)
        from abreu import ScalarField

        bad = ScalarField(phi.grid, phi.values + 3e-4 * np.cos(2 * np.pi * x))
        bad_path = tmp_path / "bad.fld"
        write_field(bad_path, bad)
        report = tmp_path / "verify.json"
        code = main(["verify", "--phi", str(bad_path), "--rhs", str(a_path),
                     "--report", str(report)])
        assert code == 3
        payload = json.loads(report.read_text())
        assert payload["verification"]["passed"] is False


class TestLegendreAndCurvature:
    def test_legendre_round_trip(self, tmp_path, manufactured_files):
        _, phi_path = manufactured_files
        psi_path = tmp_path / "psi.fld"
        back_path = tmp_path / "back.fld"
        assert main(["legendre", "--phi", str(phi_path), "--out", str(psi_path)]) == 0
        assert main(["legendre", "--phi", str(psi_path), "--out", str(back_path)]) == 0
        phi = read_field(phi_path)
        back = read_field(back_path)
        assert sup_norm(back - phi) < 1e-8

    def test_curvature_prescribe_round_trip(self, tmp_path):
        metric = tmp_path / "m.fld"
        s_path = tmp_path / "S.fld"
        recovered = tmp_path / "m2.fld"
        assert main(["synth", "--dim", "1", "--resolution", "64",
                     "--expr", "0.01*cos(2*pi*x1)", "--out", str(metric)]) == 0
        assert main(["curvature", "--psi", str(metric), "--symplectic",
                     "--out", str(s_path)]) == 0
        assert main(["prescribe", "--scalar", str(s_path),
                     "--out", str(recovered)]) == 0
        m1, m2 = read_field(metric), read_field(recovered)
        assert sup_norm(m1 - m2) < 1e-6

    def test_prescribe_rejects_nonzero_mean(self, tmp_path):
        code = main(["prescribe", "--dim", "1", "--resolution", "16",
                     "--expr", "0.1", "--out", str(tmp_path / "m.fld")])
        assert code == 2


class TestErrorPaths:
    def test_missing_file_exits_1(self, tmp_path):
        code = main(["apply", "--phi", str(tmp_path / "nope.fld"),
                     "--out", str(tmp_path / "o.fld")])
        assert code == 1

    def test_syntax_error_exits_1(self, tmp_path):
        code = main(["synth", "--dim", "1", "--resolution", "16",
                     "--expr", "cos(2*pi*x1", "--out", str(tmp_path / "o.fld")])
        assert code == 1

    def test_bad_flag_exits_1(self):
        assert main(["solve", "--frobnicate"]) == 1

    def test_corrupt_field_file_exits_1(self, tmp_path):
        bad = tmp_path / "bad.fld"
        bad.write_bytes(b"PABR0" + b"\0" * 32)
        code = main(["apply", "--phi", str(bad), "--out", str(tmp_path / "o.fld")])
        assert code == 1


def test_console_entry_point(tmp_path):
    """The installed script behaves like main(); one subprocess smoke test."""
    out = tmp_path / "f.fld"
    proc = subprocess.run(
        [sys.executable, "-m", "abreu.cli", "synth", "--dim", "1",
         "--resolution", "16", "--expr", "cos(2*pi*x1)", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert out.exists()


def test_thread_env_applied(tmp_path, monkeypatch):
    monkeypatch.setenv("ABREU_THREADS", "1")
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    import abreu.cli as cli

    cli._apply_thread_env()
    import os

    assert os.environ["OMP_NUM_THREADS"] == "1"
