"""The poisson-darboux command line: exit codes, JSON payloads, reproducibility."""

import json
from pathlib import Path

import pytest

from poissondarboux import FLOAT, parse_expression
from poissondarboux.cli import main

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"
EX1 = str(PROBLEMS / "example1.json")
EX2 = str(PROBLEMS / "example2.json")
EX4 = str(PROBLEMS / "example4.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.err


class TestCheckStructure:
    def test_exact_chart_file(self, capsys):
        code, payload, _ = run(capsys, "check-structure", EX1)
        assert code == 0
        assert payload["ok"] and payload["skew"] and payload["jacobi"]["ok"]
        assert payload["generic_rank"] == 4
        assert payload["n"] == 4 and payload["mode"] == "exact"

    def test_casimirs_reported(self, capsys):
        code, payload, _ = run(capsys, "check-structure", EX4)
        assert code == 0
        assert len(payload["casimirs"]) == 1
        assert payload["casimirs"][0]["is_casimir"] is True
        assert payload["generic_rank"] == 4

    def test_jacobi_failure_exits_1(self, capsys, tmp_path):
        bad = {
            "mode": "exact",
            "m": 1,
            "s": 1,
            "variables": ["x1", "x2", "x3"],
            "canonical_variables": ["q", "p", "z"],
            "mu": [1],
            "V": "q^4",
            "structure": [
                ["0", "x1", "-x3"],
                ["-x1", "0", "x2"],
                ["x3", "-x2", "0"],
            ],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        code, payload, _ = run(capsys, "check-structure", str(path))
        assert code == 1
        assert not payload["ok"]
        assert not payload["jacobi"]["ok"]
        assert payload["jacobi"]["violations"] == [[1, 2, 3]]


class TestBuildIntegral:
    def test_canonical_quartic(self, capsys):
        code, payload, _ = run(capsys, "build-integral", EX2, "--theorem", "2")
        assert code == 0
        assert payload["ok"] and payload["verified"] and payload["proper"]
        assert payload["additional"] is True
        assert payload["theorem"] == "T2"
        assert payload["H_F"] == "2*q2^4 + p2^2"
        assert payload["mode"] == "exact"
        names = ["q1", "q2", "p1", "p2"]
        HF = parse_expression(payload["H_F"], names)
        assert HF == parse_expression("p2^2 + 2*q2^4", names)
        assert isinstance(payload["residual"], str)
        flag_names = {f["name"] for f in payload["hypothesis_flags"]}
        assert {"deg_V_at_least_3", "additionality_m_and_mu", "F_proper"} <= flag_names
        assert all(f["ok"] for f in payload["hypothesis_flags"])

    def test_casimir_chart_file(self, capsys):
        code, payload, _ = run(capsys, "build-integral", EX4)
        assert code == 0
        assert payload["theorem"] == "T3"
        assert payload["independence"]["full_rank"] == 3
        assert payload["independence"]["additional"]

    def test_missing_f_is_usage_error(self, capsys):
        code, payload, err = run(capsys, "build-integral", EX1)
        assert code == 2
        assert payload is None
        assert "F entry" in err

    def test_seeded_runs_identical(self, capsys):
        code_a, payload_a, _ = run(capsys, "build-integral", EX2, "--seed", "7")
        code_b, payload_b, _ = run(capsys, "build-integral", EX2, "--seed", "7")
        assert (code_a, payload_a) == (code_b, payload_b)

    def test_verbose_keeps_stdout_json(self, capsys):
        code, payload, err = run(capsys, "build-integral", EX2, "--verbose")
        assert code == 0 and payload["ok"]
        assert err.strip()  # prose notes land on stderr


class TestVerify:
    def test_integral_accepted(self, capsys):
        code, payload, _ = run(
            capsys, "verify", EX2, "--integral", "p2^2 + 2*q2^4"
        )
        assert code == 0 and payload["ok"]
        assert payload["residual_max"] <= 1e-9

    def test_non_integral_rejected(self, capsys):
        code, payload, _ = run(capsys, "verify", EX2, "--integral", "q1")
        assert code == 1
        assert not payload["ok"]
        names = ["q1", "q2", "p1", "p2"]
        residual = parse_expression(payload["residual"], names, FLOAT)
        p1 = parse_expression("p1", names, FLOAT)
        assert (residual - p1).max_abs_coeff() == 0.0

    def test_bad_expression_is_usage_error(self, capsys):
        code, payload, err = run(capsys, "verify", EX2, "--integral", "q1 +")
        assert code == 2 and payload is None
        assert "error" in err


class TestIndependence:
    def test_hf_from_file(self, capsys):
        code, payload, _ = run(capsys, "independence", EX2)
        assert code == 0
        assert payload["additional"] and payload["full_rank"] == 2

    def test_dependent_expression(self, capsys):
        code, payload, _ = run(
            capsys,
            "independence",
            EX2,
            "--integral",
            "2*q1^2 + 2*q2^4 + 1.0*p1^2 + 1.0*p2^2",
        )
        assert code == 1
        assert not payload["additional"]


class TestFindDarboux:
    def test_kernel_search_with_file_cofactor(self, capsys):
        code, payload, _ = run(capsys, "find-darboux", EX2)
        assert code == 0
        assert payload["search"] == "kernel"
        assert len(payload["results"]) == 1
        assert "q2^2" in payload["results"][0]

    def test_bilinear_search(self, capsys):
        code, payload, _ = run(
            capsys,
            "find-darboux",
            EX2,
            "--cofactor-basis",
            "q2",
            "--attempts",
            "40",
            "--seed",
            "0",
        )
        assert code == 0
        assert payload["search"] == "bilinear"
        for cand in payload["candidates"]:
            assert set(cand) == {"F", "cofactor", "proper", "exact"}
            assert cand["proper"]

    def test_no_cofactor_anywhere_is_usage_error(self, capsys):
        code, payload, err = run(capsys, "find-darboux", EX1)
        assert code == 2 and payload is None
        assert "cofactor" in err


class TestSimulate:
    def test_drift_payload(self, capsys):
        code, payload, _ = run(
            capsys, "simulate", EX2, "--x0", "1,0,0,1", "--t-end", "1",
            "--dt", "0.001", "--backend", "numpy",
        )
        assert code == 0
        assert payload["completed"] and payload["status"] == "ok"
        assert payload["samples"] == 1001
        assert payload["t_final"] == pytest.approx(1.0)
        assert set(payload["drift"]) == {"H", "H_F"}
        assert payload["drift"]["H"] < 1e-9

    def test_casimir_monitored(self, capsys):
        code, payload, _ = run(
            capsys, "simulate", EX4, "--x0", "0.4,-0.3,0.2,0.5,0.1",
            "--t-end", "1", "--dt", "0.001", "--backend", "numpy",
        )
        assert code == 0
        assert set(payload["drift"]) == {"H", "C1", "H_F"}
        assert all(v < 1e-8 for v in payload["drift"].values())

    def test_csv_written(self, capsys, tmp_path):
        out = tmp_path / "orbit.csv"
        code, payload, _ = run(
            capsys, "simulate", EX2, "--x0", "1,0,0,1", "--t-end", "0.1",
            "--dt", "0.01", "--csv", str(out), "--backend", "numpy",
        )
        assert code == 0 and payload["csv"] == str(out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,q1,q2,p1,p2,H,H_F"
        assert len(lines) == payload["samples"] + 1

    def test_wrong_x0_arity_is_usage_error(self, capsys):
        code, payload, err = run(
            capsys, "simulate", EX2, "--x0", "1,0", "--t-end", "1"
        )
        assert code == 2 and payload is None
        assert "comma-separated" in err


class TestTopLevel:
    def test_missing_file(self, capsys):
        code, payload, err = run(capsys, "check-structure", "no-such-file.json")
        assert code == 2 and payload is None
        assert "error" in err

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate", EX1])
        assert exc.value.code == 2

    def test_module_entry_point(self):
        import subprocess
        import sys

        proc = subprocess.run(
            [sys.executable, "-m", "poissondarboux", "check-structure", EX1],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["ok"]
