import csv
import json
import logging
import subprocess
import sys

import numpy as np
import pytest

from pgadmm.cli import main

EPS = {"kind": "scaled_identity", "eps": 1e-4}
UNIT = {"kind": "scaled_identity", "eps": 1.0}


def write_spec(tmp_path, doc, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def toy_spec(tmp_path, **extra):
    doc = {
        "problem": {"family": "scalar_toy"},
        "configs": [
            {"variant": "pgadmm", "rho": 1.5, "S": UNIT, "T": UNIT, "tol": 1e-10},
            {"variant": "gadmm", "rho": 1.5, "tol": 1e-10},
            {"variant": "classic_admm", "tau": 1.0, "tol": 1e-10},
        ],
        **extra,
    }
    return write_spec(tmp_path, doc)


class TestRun:
    def test_toy_three_variants_agree(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", "--spec", toy_spec(tmp_path), "--out", str(out)]) == 0
        summaries = [json.loads(p.read_text()) for p in sorted(out.glob("*/summary.json"))]
        assert [s["config"]["variant"] for s in summaries] == ["pgadmm", "gadmm", "classic_admm"]
        for s in summaries:
            assert s["status"] == "converged"
            assert np.allclose(s["y"] + s["z"] + s["x"], 1.0, atol=1e-8)
        rows = list(csv.DictReader((out / "comparison.csv").open()))
        assert [r["status"] for r in rows] == ["converged"] * 3

    def test_trace_csv_and_plot_files(self, tmp_path):
        out = tmp_path / "out"
        main(["run", "--spec", toy_spec(tmp_path), "--out", str(out)])
        sub = out / "00_pgadmm"
        lines = (sub / "trace.csv").read_text().splitlines()
        assert lines[0] == "k,primal_res,kkt_res,upsilon,lyapunov,descent_gap,dist_xi_sq,ratio"
        first = lines[1].split(",")
        assert first[0] == "1" and len(first[1].replace("-", "").replace(".", "").split("e")[0]) >= 16
        kkt = np.loadtxt(sub / "kkt_res.dat")
        assert kkt.shape[1] == 2 and kkt[-1, 1] <= 1e-10
        assert not list(out.rglob(".*"))

    def test_lasso_rates_certified(self, tmp_path):
        doc = {
            "problem": {"family": "lasso", "dims": 8, "seed": 7},
            "configs": [
                {"variant": "pgadmm", "rho": rho, "S": EPS, "T": EPS, "tol": 1e-10, "max_iter": 5000}
                for rho in (0.8, 1.0, 1.5)
            ],
            "calmness_modulus": 10.0,
        }
        out = tmp_path / "out"
        assert main(["run", "--spec", write_spec(tmp_path, doc), "--out", str(out)]) == 0
        reports = [json.loads(p.read_text()) for p in sorted(out.glob("*/rate.json"))]
        assert len(reports) == 3
        for rep in reports:
            assert rep["certified"] and rep["zeta_hat"] < 1.0
            assert rep["alpha"] == pytest.approx(1 / (1 + rep["beta"]))
            assert {"alpha", "beta", "zeta_hat", "kappa", "lambda_max_xi", "kappa_bar_index"} <= set(rep)

    def test_problem_file_relative_to_spec(self, tmp_path):
        assert main(["generate", "--family", "sep_qp", "--dims", "5,4,3", "--seed", "2",
                     "--out", str(tmp_path / "qp.json")]) == 0
        spec = write_spec(tmp_path, {"problem": "qp.json", "configs": [{"tol": 1e-9}], "output": str(tmp_path / "o")})
        assert main(["run", "--spec", spec]) == 0
        assert json.loads((tmp_path / "o" / "00_pgadmm" / "summary.json").read_text())["oracle_error"] <= 1e-7

    def test_rate_without_oracle_warns(self, tmp_path, caplog):
        doc = {
            "problem": {"family": "basis_pursuit", "dims": [4, 8], "seed": 0},
            "configs": [{"y_mode": "prox_linearized", "max_iter": 50}],
        }
        out = tmp_path / "out"
        with caplog.at_level(logging.WARNING, logger="pgadmm"):
            assert main(["run", "--spec", write_spec(tmp_path, doc), "--out", str(out)]) == 0
        assert "no oracle applies" in caplog.text
        assert (out / "00_pgadmm" / "trace.csv").exists()
        assert not (out / "00_pgadmm" / "rate.json").exists()

    @pytest.mark.parametrize("doc,needle", [
        ({"problem": {"family": "scalar_toy"}, "configs": []}, "at least one"),
        ({"configs": [{}]}, "'problem'"),
        ({"problem": {"family": "lasso", "dims": 8}, "configs": [{}]}, "seed"),
        ({"problem": {"family": "scalar_toy"}, "configs": [{"sigmaa": 1}]}, "configs[0]"),
    ])
    def test_invalid_spec(self, tmp_path, capsys, doc, needle):
        assert main(["run", "--spec", write_spec(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2
        assert needle in capsys.readouterr().err

    def test_parse_error_location(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"problem": "x.json",\n "configs": [}\n')
        assert main(["run", "--spec", str(path), "--out", str(tmp_path / "o")]) == 2
        assert "broken.json:2:" in capsys.readouterr().err


class TestCheck:
    def test_healthy(self, tmp_path, capsys):
        assert main(["check", "--spec", toy_spec(tmp_path)]) == 0
        assert "0 violation(s)" in capsys.readouterr().out

    def test_x_update_fault(self, tmp_path, capsys):
        assert main(["check", "--spec", toy_spec(tmp_path), "--inject-fault", "x_update"]) == 1
        out = capsys.readouterr().out
        assert "multiplier" in out and "k=1 " in out and "slack" in out

    def test_relaxation_fault(self, tmp_path, capsys):
        doc = {"problem": {"family": "scalar_toy"},
               "configs": [{"rho": 1.5, "S": UNIT, "T": UNIT, "max_iter": 50}]}
        assert main(["check", "--spec", write_spec(tmp_path, doc), "--inject-fault", "relaxation"]) == 1
        assert "lyapunov_gap" in capsys.readouterr().out

    def test_rho_rejected_before_running(self, tmp_path, capsys):
        doc = {"problem": {"family": "scalar_toy"}, "configs": [{"rho": 2.5}]}
        assert main(["check", "--spec", write_spec(tmp_path, doc)]) == 2
        assert "rho" in capsys.readouterr().err

    def test_unknown_fault(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["check", "--spec", toy_spec(tmp_path), "--inject-fault", "cosmic_ray"])


class TestGenerate:
    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert main(["generate", "--family", "lasso", "--dims", "8", "--seed", "7", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_params(self, tmp_path):
        p = tmp_path / "bp.json"
        assert main(["generate", "--family", "basis_pursuit", "--dims", "4,9", "--seed", "1",
                     "--param", "delta=0.05", "--out", str(p)]) == 0
        assert json.loads(p.read_text())["g"]["hi"] == [0.05] * 4

    def test_unsupported_family(self, tmp_path, capsys):
        assert main(["generate", "--family", "sdp", "--seed", "1", "--out", str(tmp_path / "x.json")]) == 2
        assert "unsupported family" in capsys.readouterr().err


def test_log_level_from_environment(monkeypatch):
    monkeypatch.setenv("PGADMM_LOG", "debug")
    with pytest.raises(SystemExit):
        main(["--help"])
    assert logging.getLogger("pgadmm").level == logging.DEBUG
    monkeypatch.setenv("PGADMM_LOG", "WARNING")
    with pytest.raises(SystemExit):
        main(["--help"])


def test_console_entry_point(tmp_path):
    out = tmp_path / "t.json"
    proc = subprocess.run(
        [sys.executable, "-m", "pgadmm.cli", "generate", "--family", "scalar_toy", "--seed", "0", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["name"] == "scalar_toy"
