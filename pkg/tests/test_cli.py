import csv
import dataclasses
import io
import json

import numpy as np
import pytest

from discrimkit import cli
from discrimkit.cli import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def csv_rows(text):
    return list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))


class TestMinErr:
    def test_theta_sweep_traces_helstrom(self, capsys):
        code, out, _ = run(capsys, "minerr", "--two-pure", "--theta-sweep", "0:45:91", "--p0", "0.5")
        assert code == EXIT_OK
        rows = csv_rows(out)
        assert len(rows) == 91
        for row in rows:
            theta = np.radians(float(row["theta"]))
            assert float(row["p_error"]) == pytest.approx(0.5 * (1 - np.sin(2 * theta)), abs=1e-10)
            assert float(row["residual_hel1"]) <= 1e-9
            assert row["converged"] == "true"

    def test_csv_and_json_carry_identical_numbers(self, capsys):
        args = ["minerr", "--two-pure", "--sweep", "p0:0.1:0.9:5", "--theta", "20"]
        _, text, _ = run(capsys, *args)
        _, js, _ = run(capsys, *args, "--format", "json")
        rows = json.loads(js)["rows"]
        for c, j in zip(csv_rows(text), rows):
            for key, value in j.items():
                if isinstance(value, float):
                    assert float(c[key]) == value

    def test_trine_uses_optimizer(self, capsys):
        code, out, _ = run(capsys, "minerr", "--trine", "--seed", "1")
        assert code == EXIT_OK
        assert float(csv_rows(out)[0]["p_correct"]) == pytest.approx(2 / 3, abs=1e-6)

    def test_not_converged_exit_code(self, capsys, monkeypatch):
        real = cli.optimize_min_error

        def stalled(*args, **kwargs):
            return dataclasses.replace(real(*args, **kwargs), converged=False)

        monkeypatch.setattr(cli, "optimize_min_error", stalled)
        code, out, _ = run(capsys, "minerr", "--tetrad", "--seed", "3")
        assert code == EXIT_NOT_CONVERGED
        assert csv_rows(out)[0]["converged"] == "false"

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "out.csv"
        code, out, _ = run(capsys, "minerr", "--two-pure", "--out", str(path))
        assert code == EXIT_OK and out == ""
        assert csv_rows(path.read_text())[0]["theta"] == "15"

    def test_deterministic(self, capsys):
        first = run(capsys, "minerr", "--trine", "--seed", "4")
        assert run(capsys, "minerr", "--trine", "--seed", "4") == first


class TestInvalidInput:
    def test_malformed_json_reports_line(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dim": 2,\n "states": [}')
        code, _, err = run(capsys, "minerr", "--ensemble", str(path))
        assert code == EXIT_INVALID
        assert "line 2" in err

    def test_bad_field_named(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "states": [{"vector": [1, 0, 0]}], "priors": [1]}))
        code, _, err = run(capsys, "minerr", "--ensemble", str(path))
        assert code == EXIT_INVALID
        assert "states[0].vector" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "minerr", "--ensemble", str(tmp_path / "none.json"))[0] == EXIT_INVALID

    @pytest.mark.parametrize(
        "args",
        [
            ["unamb", "--two-pure", "--theta-sweep", "0:100:5"],
            ["minerr", "--two-pure", "--sweep", "gamma:0:1:3"],
            ["minerr", "--two-pure", "--sweep", "p0:0:1"],
            ["minerr", "--two-pure", "--p0", "1.5"],
            ["minerr"],
            ["simulate", "--trine", "--trials", "0"],
            ["simulate", "--two-pure", "--theta-sweep", "5:10:2"],
        ],
    )
    def test_usage_errors(self, capsys, args):
        assert run(capsys, *args)[0] == EXIT_INVALID

    def test_sweep_with_file_rejected(self, capsys, tmp_path):
        path = tmp_path / "e.json"
        path.write_text(json.dumps({"dim": 2, "states": [{"vector": [1, 0]}], "priors": [1]}))
        assert run(capsys, "minerr", "--ensemble", str(path), "--sweep", "p0:0:1:3")[0] == EXIT_INVALID

    def test_bad_tolerance_env(self, capsys, monkeypatch):
        monkeypatch.setenv("DISCRIMKIT_TOL", "bogus=1")
        code, _, err = run(capsys, "minerr", "--two-pure")
        assert code == EXIT_INVALID
        assert "DISCRIMKIT_TOL" in err


class TestUnamb:
    def test_equal_priors(self, capsys):
        code, out, _ = run(capsys, "unamb", "--two-pure", "--theta", "30")
        row = csv_rows(out)[0]
        assert code == EXIT_OK
        assert float(row["p_inconclusive"]) == pytest.approx(0.5, abs=1e-10)
        assert row["regime"] == "equal-priors"

    def test_p0_sweep_regimes(self, capsys):
        _, out, _ = run(capsys, "unamb", "--two-pure", "--theta", "10", "--sweep", "p0:0.05:0.95:7")
        rows = csv_rows(out)
        assert len({r["regime"] for r in rows}) >= 2
        assert all(float(r["residual_zero_error"]) <= 1e-9 for r in rows)

    def test_coherent(self, capsys):
        _, out, _ = run(capsys, "unamb", "--coherent", "--alpha", "1")
        row = csv_rows(out)[0]
        assert float(row["p_inconclusive"]) == pytest.approx(np.exp(-2), abs=1e-12)
        assert float(row["beam_splitter_p_inconclusive"]) == pytest.approx(np.exp(-2), abs=1e-12)


    def test_vacuum_coherent_is_degenerate(self, capsys):
        code, out, _ = run(capsys, "unamb", "--coherent", "--alpha", "0")
        assert code == EXIT_OK
        assert float(csv_rows(out)[0]["p_inconclusive"]) == 1.0

    def test_identical_two_pure_rejected(self, capsys):
        assert run(capsys, "unamb", "--two-pure", "--theta", "0")[0] == EXIT_INVALID


class TestMaxConf:
    def test_trine_compare(self, capsys):
        code, out, _ = run(capsys, "maxconf", "--trine", "--theta", "30", "--compare-minerr", "--seed", "0")
        assert code == EXIT_OK
        rows = csv_rows(out)
        assert len(rows) == 3
        for row in rows:
            assert float(row["confidence_mc"]) == pytest.approx(2 / 3, abs=1e-9)
            assert float(row["confidence_me"]) == pytest.approx((1 + np.sin(np.radians(60))) / 3, abs=1e-6)
            assert float(row["p_inconclusive"]) == pytest.approx(np.cos(np.radians(60)), abs=1e-9)

    def test_without_comparison(self, capsys):
        _, out, _ = run(capsys, "maxconf", "--trine", "--no-compare-minerr")
        assert "confidence_me" not in out.splitlines()[0]


class TestMutInfo:
    def test_table(self, capsys):
        code, out, _ = run(capsys, "mutinfo", "--table")
        assert code == EXIT_OK
        rows = csv_rows(out)
        refs = {(r["ensemble"], r["strategy"]): r for r in rows}
        assert float(refs["trine", "elimination"]["reference"]) == 0.585
        assert float(refs["tetrad", "best-projective"]["reference"]) == 0.311
        tolerances = {"elimination": 1e-3, "best-projective": 2e-3, "helstrom": 1e-3}
        for r in rows:
            assert float(r["deviation"]) <= tolerances[r["strategy"]]
            assert {"ensemble", "strategy", "mi_bits", "reference", "deviation"} <= set(r)

    def test_search(self, capsys):
        code, out, _ = run(capsys, "mutinfo", "--trine", "--search-outcomes", "3", "--restarts", "3", "--seed", "0")
        assert code in (EXIT_OK, EXIT_NOT_CONVERGED)
        bits = {r["strategy"]: float(r["mi_bits"]) for r in csv_rows(out)}
        assert bits["elimination"] == pytest.approx(np.log2(3) - 1, abs=1e-9)
        assert bits["search"] >= bits["elimination"] - 1e-3


class TestSimulate:
    def test_counts_csv(self, capsys):
        code, out, _ = run(capsys, "simulate", "--trine", "--strategy", "srm", "--trials", "2000", "--seed", "7")
        assert code == EXIT_OK
        assert out.startswith("# seed=7 n_trials=2000\nstate,outcome,count\n")
        assert sum(int(r["count"]) for r in csv_rows(out)) == 2000

    def test_json_figures(self, capsys):
        _, out, _ = run(
            capsys, "simulate", "--two-pure", "--theta", "30", "--strategy", "unambiguous", "--trials", "5000", "--format", "json"
        )
        data = json.loads(out)
        assert data["figures"]["p_error"] == 0.0
        assert sum(map(sum, data["counts"])) == 5000

    def test_workers_do_not_change_output(self, capsys):
        base = ["simulate", "--trine", "--trials", "5000", "--seed", "1"]
        assert run(capsys, *base) == run(capsys, *base, "--workers", "4")


class TestVerify:
    def test_passes(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == EXIT_OK
        assert "FAIL" not in out

    def test_json_matches_text(self, capsys):
        _, text, _ = run(capsys, "verify")
        _, js, _ = run(capsys, "verify", "--json")
        checks = json.loads(js)["checks"]
        lines = text.splitlines()[:-1]
        assert len(lines) == len(checks)
        for line, check in zip(lines, checks):
            assert check["name"] in line
            assert f"value={check['value']:.12g}" in line

    def test_tight_completeness_fails(self, capsys, monkeypatch):
        monkeypatch.setenv("DISCRIMKIT_TOL", "completeness=1e-15")
        code, out, _ = run(capsys, "verify")
        assert code != EXIT_OK
        assert "FAIL" in out
