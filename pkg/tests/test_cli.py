"""End-to-end tests of the command-line interface."""

import json
import math

import pytest

from chshcert import cli


def _run(args):
    return cli.main(args)


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestBoundsCommand:
    def test_ns_curve_endpoints(self, tmp_path):
        out = tmp_path / "ns.csv"
        assert _run([
            "bounds", "--curve", "ns", "--g", "1.0", "--steps", "5",
            "--out", str(out),
        ]) == 0
        header, rows = _read_csv(out)
        assert header == ["P", "value", "branch"]
        assert float(rows[0][1]) == pytest.approx(2.0, abs=1e-12)
        assert float(rows[-1][1]) == pytest.approx(4.0, abs=1e-12)

    def test_quantum_curve_branch_tags(self, tmp_path):
        out = tmp_path / "q.csv"
        assert _run([
            "bounds", "--curve", "quantum", "--steps", "26", "--out", str(out),
        ]) == 0
        _, rows = _read_csv(out)
        tags = {row[2] for row in rows}
        assert tags == {"quantum", "deterministic"}
        assert float(rows[0][1]) == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-12)

    def test_g_of_p_requires_s(self, tmp_path, capsys):
        assert _run(["bounds", "--curve", "g-of-p", "--steps", "3"]) == 1
        assert "requires --s" in capsys.readouterr().err

    def test_skip_invalid_rows(self, tmp_path):
        out = tmp_path / "g.csv"
        assert _run([
            "bounds", "--curve", "g-of-p", "--s", "3.5", "--p-max", "0.4",
            "--steps", "4", "--skip-invalid", "--out", str(out),
        ]) == 0
        _, rows = _read_csv(out)
        assert rows[-1][1] == "nan"
        assert rows[-1][2] == "domain-error"

    def test_domain_error_without_skip(self, capsys):
        assert _run([
            "bounds", "--curve", "g-of-p", "--s", "3.5", "--p-max", "0.4",
            "--steps", "4",
        ]) == 1


class TestModelCommand:
    def test_general_model_json(self, tmp_path):
        out = tmp_path / "model.json"
        assert _run([
            "model", "--kind", "general", "--g", "0.8", "--p", "0.3",
            "--out", str(out),
        ]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["components"]) == 4

    def test_high_p_requires_extra_args(self, capsys):
        assert _run(["model", "--kind", "high-p", "--g", "0.8", "--p", "0.4"]) == 1
        assert "--q" in capsys.readouterr().err

    def test_out_of_range_fails(self, capsys):
        assert _run(["model", "--kind", "general", "--g", "0.8", "--p", "0.5"]) == 1


class TestSimulateCommand:
    def test_pipeline(self, tmp_path):
        model_path = tmp_path / "model.json"
        report_path = tmp_path / "report.json"
        assert _run([
            "model", "--kind", "general", "--g", "1.0", "--p", "0.25",
            "--out", str(model_path),
        ]) == 0
        assert _run([
            "simulate", "--model", str(model_path), "--trials", "50000",
            "--seed", "3", "--p-assumed", "0.25", "--mode", "ns",
            "--out", str(report_path),
        ]) == 0
        doc = json.loads(report_path.read_text())
        assert doc["certified_bits"] > 0.0
        assert abs(doc["S_hat"] - 2.0) <= 5.0 * max(doc["S_stderr"], 1e-9)

    def test_missing_model_file(self, tmp_path, capsys):
        assert _run([
            "simulate", "--model", str(tmp_path / "nope.json"),
            "--trials", "10", "--seed", "0", "--p-assumed", "0.25",
        ]) == 1


class TestVerifyCommand:
    def test_lp_target(self, tmp_path):
        out = tmp_path / "verify.json"
        assert _run([
            "verify", "--target", "lp", "--p-steps", "4", "--out", str(out),
        ]) == 0
        doc = json.loads(out.read_text())
        assert doc["soundness_violation"] is False
        assert doc["max_gap"] <= 1e-6
        assert len(doc["points"]) == 4

    def test_ns_target_small(self, tmp_path):
        out = tmp_path / "verify.json"
        assert _run([
            "verify", "--target", "ns", "--g-steps", "2", "--p-steps", "2",
            "--p-max", "0.3", "--restarts", "4", "--out", str(out),
        ]) == 0
        doc = json.loads(out.read_text())
        assert doc["soundness_violation"] is False

    def test_quantum_target_small(self, tmp_path):
        out = tmp_path / "verify.json"
        assert _run([
            "verify", "--target", "quantum", "--samples", "3", "--restarts", "4",
            "--out", str(out),
        ]) == 0
        doc = json.loads(out.read_text())
        assert doc["soundness_violation"] is False
