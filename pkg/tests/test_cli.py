"""End-to-end tests of the command-line interface (in-process)."""

import json

import numpy as np
import pytest

from photon_catalysis.cli import main
from photon_catalysis.fock import state_from_json


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestState:
    def test_summary_and_json(self, tmp_path, capsys):
        out = tmp_path / "state.json"
        code, stdout, _ = run(capsys, "state", "--alpha", "1", "--r2", "0.332",
                              "--k", "1", "--out", str(out))
        assert code == 0
        names = [line.split(" = ")[0] for line in stdout.strip().split("\n")]
        assert names == ["success_prob", "var_x_db", "var_p_db", "g2",
                         "wigner_min"]
        state = state_from_json(out.read_text())
        assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_passthrough_values(self, capsys):
        code, stdout, _ = run(capsys, "state", "--alpha", "1", "--r2", "0",
                              "--k", "1")
        assert code == 0
        summary = dict(line.split(" = ") for line in stdout.strip().split("\n"))
        assert float(summary["g2"]) == pytest.approx(1.0, abs=1e-8)
        assert float(summary["var_x_db"]) == pytest.approx(0.0, abs=1e-7)
        assert float(summary["success_prob"]) == 1.0

    def test_truncation_gate_is_validation_error(self, capsys):
        code, _, stderr = run(capsys, "state", "--alpha", "2", "--r2", "0.3",
                              "--k", "1", "--dim", "4")
        assert code == 2
        assert "truncation" in stderr

    def test_zero_probability_herald_is_numerical_error(self, capsys):
        code, _, stderr = run(capsys, "state", "--alpha", "0", "--r2", "1",
                              "--k", "1")
        assert code == 3
        assert "numerical" in stderr

    def test_unknown_flag_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["state", "--alpha", "1", "--r2", "0.3", "--frequency", "5"])
        assert exc.value.code == 2


class TestSweep:
    def test_csv_shape(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code, _, _ = run(capsys, "sweep", "--metric", "var_x_db",
                         "--axis", "r2:0.1:0.9:5", "--axis", "alpha:0.5:1.5:3",
                         "--out", str(out))
        assert code == 0
        lines = out.read_text().rstrip("\n").split("\n")
        assert lines[0] == "r2,alpha,var_x_db,success_prob"
        assert len(lines) == 1 + 5 * 3

    def test_integer_k_axis_column(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code, _, _ = run(capsys, "sweep", "--metric", "success_prob",
                         "--axis", "k:1:2:2", "--r2", "0.4", "--out", str(out))
        assert code == 0
        rows = out.read_text().rstrip("\n").split("\n")[1:]
        assert [r.split(",")[0] for r in rows] == ["1", "2"]

    def test_byte_identical_repeats(self, tmp_path, capsys, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sweep", "--metric", "g2", "--axis", "r2:0.05:0.95:9"]
        monkeypatch.setenv("CATALYSIS_THREADS", "4")
        assert main(argv + ["--out", str(a)]) == 0
        monkeypatch.setenv("CATALYSIS_THREADS", "1")
        assert main(argv + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_bad_axis_spec(self, tmp_path, capsys):
        code, _, stderr = run(capsys, "sweep", "--metric", "g2",
                              "--axis", "r2:0:1", "--out",
                              str(tmp_path / "x.csv"))
        assert code == 2
        assert "axis" in stderr

    def test_fidelity_needs_target(self, tmp_path, capsys):
        code, _, _ = run(capsys, "sweep", "--metric", "fidelity_to_target",
                         "--axis", "r2:0:1:3", "--out", str(tmp_path / "x.csv"))
        assert code == 2


class TestWigner:
    def test_csv_output(self, tmp_path, capsys):
        out = tmp_path / "w.csv"
        code, stdout, _ = run(capsys, "wigner", "--alpha", "1", "--r2", "0.332",
                              "--grid", "21", "--out", str(out))
        assert code == 0
        assert stdout.startswith("integral = ")
        lines = out.read_text().rstrip("\n").split("\n")
        assert lines[0] == "x,p,w"
        assert len(lines) == 1 + 21 * 21

    def test_pgm_output(self, tmp_path, capsys):
        out = tmp_path / "w.pgm"
        code, _, _ = run(capsys, "wigner", "--alpha", "1.35", "--r2", "0.77",
                         "--grid", "31", "--format", "pgm", "--out", str(out))
        assert code == 0
        blob = out.read_bytes()
        assert blob.startswith(b"P5\n31 31\n65535\n")

    def test_extent_spec(self, tmp_path, capsys):
        out = tmp_path / "w.csv"
        code, _, _ = run(capsys, "wigner", "--alpha", "0.5", "--r2", "0.2",
                         "--grid=-3:3:13", "--out", str(out))
        assert code == 0
        first_x = float(out.read_text().split("\n")[1].split(",")[0])
        # first cell centre of 13 cells spanning [-3, 3]
        assert first_x == pytest.approx(-3 + 0.5 * 6 / 13, abs=1e-7)


class TestJoint:
    def test_scan_rows(self, tmp_path, capsys):
        out = tmp_path / "joint.csv"
        code, _, _ = run(capsys, "joint", "--alpha2", "1.11",
                         "--r2", "0.4:0.6:3", "--k", "1", "--out", str(out))
        assert code == 0
        lines = out.read_text().rstrip("\n").split("\n")
        assert lines[0] == "r2,i,j,p"
        assert (len(lines) - 1) % 3 == 0

    def test_single_point_and_probability_sum(self, tmp_path, capsys):
        out = tmp_path / "joint.csv"
        code, _, _ = run(capsys, "joint", "--alpha2", "1.0", "--r2", "0.5",
                         "--out", str(out))
        assert code == 0
        rows = out.read_text().rstrip("\n").split("\n")[1:]
        total = sum(float(r.split(",")[3]) for r in rows)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestOptimize:
    def test_end_to_end(self, tmp_path, capsys):
        target = tmp_path / "target.json"
        assert main(["state", "--alpha", "1", "--r2", "0.37", "--k", "1",
                     "--out", str(target)]) == 0
        out = tmp_path / "result.json"
        code, stdout, _ = run(capsys, "optimize", "--target", str(target),
                              "--stages", "1", "--k", "1", "--alpha", "1",
                              "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"stages", "fidelity", "success_prob",
                            "evaluations", "stagnated"}
        assert doc["fidelity"] > 1 - 1e-8
        assert doc["stages"][0] == pytest.approx(0.37, abs=1e-4)

    def test_free_alpha_reports_alpha(self, tmp_path, capsys):
        target = tmp_path / "target.json"
        main(["state", "--alpha", "1.2", "--r2", "0.4", "--k", "1",
              "--out", str(target)])
        code, stdout, _ = run(capsys, "optimize", "--target", str(target),
                              "--stages", "1", "--k", "1", "--alpha", "1",
                              "--alpha-bounds", "0.8:1.6", "--tol", "1e-5")
        assert code == 0
        doc = json.loads(stdout.strip().split("\n")[-1])
        assert doc["alpha"] == pytest.approx(1.2, abs=1e-2)

    def test_unreadable_target(self, tmp_path, capsys):
        code, _, stderr = run(capsys, "optimize", "--target",
                              str(tmp_path / "missing.json"), "--stages", "1",
                              "--k", "1", "--alpha", "1")
        assert code == 2
        assert "missing.json" in stderr


class TestTopLevel:
    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_repeated_state_runs_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["state", "--alpha", "1.35", "--r2", "0.77", "--k", "1"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
