from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from logipareto.characterization import GridFunction, fixed_point_grid
from logipareto.cli import OUTPUT_ENV, canonical_json, parse_law, run
from logipareto.distributions import Exponential, Logistic, ParetoII


@pytest.fixture
def out(tmp_path):
    return tmp_path / "reports"


def report(out, name):
    return json.loads((out / f"{name}.json").read_text())


class TestCatalog:
    def test_lists_fifteen(self, out, capsys):
        assert run(["catalog", "--out", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 15
        assert len(report(out, "catalog")["identities"]) == 15


class TestVerify:
    def test_all_small(self, out, capsys):
        code = run(["verify", "--identity", "all", "--n-max", "3", "--base", "matching",
                    "--tol", "1e-6", "--seed", "7", "--out", str(out)])
        assert code == 0
        csv = capsys.readouterr().out.strip().splitlines()
        assert csv[0] == "id,k,m,n,family,sup_dist,mc_dist,verdict"
        assert {row.split(",")[0] for row in csv[1:]} == {r["identity"] for r in report(out, "verify")["reports"]}
        assert all(row.endswith(",pass") for row in csv[1:])
        assert len({row.split(",")[0] for row in csv[1:]}) == 15
        assert (out / "verify.csv").read_text().strip().splitlines() == csv

    def test_constraint_violation_is_usage_error(self, out):
        assert run(["verify", "--identity", "L8i", "--k", "2", "--n", "2", "--out", str(out)]) == 2

    def test_unknown_identity(self, out):
        assert run(["verify", "--identity", "L9", "--out", str(out)]) == 2

    def test_unknown_flag(self, out):
        assert run(["verify", "--identity", "L8i", "--bogus", "--out", str(out)]) == 2

    def test_mismatched_base_fails(self, out):
        code = run(["verify", "--identity", "L8i", "--k", "1", "--n", "2",
                    "--base", "Normal:mu=0,sigma=1.8138", "--out", str(out)])
        assert code == 1
        rep = report(out, "verify")
        assert rep["summary"] == {"total": 1, "passed": 0, "failed": 1}

    def test_bad_base_syntax(self, out):
        assert run(["verify", "--identity", "L8i", "--base", "Cauchy", "--out", str(out)]) == 2
        assert run(["verify", "--identity", "L8i", "--base", "Logistic:mu", "--out", str(out)]) == 2

    def test_monte_carlo_needs_seed(self, out):
        assert run(["verify", "--identity", "L8i", "--k", "1", "--n", "2", "--mc-size", "1000",
                    "--out", str(out)]) == 2

    def test_monte_carlo(self, out):
        code = run(["verify", "--identity", "L7ii", "--k", "1", "--n", "3", "--mc-size", "20000",
                    "--seed", "3", "--out", str(out)])
        assert code == 0
        r = report(out, "verify")["reports"][0]
        assert r["mc_pass"] and r["seed"] == 3

    def test_numerical_failure_writes_partial_report(self, out):
        code = run(["verify", "--identity", "L8i", "--k", "1", "--n", "2",
                    "--quad-tol", "1e-30", "--quad-panels", "5", "--out", str(out)])
        assert code == 3
        rep = report(out, "verify")
        assert rep["reports"][0]["identity"] == "L8i"
        assert rep["reports"][0]["error"]
        assert rep["reports"][0]["verdict"] == "fail"

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        argv = ["verify", "--identity", "L8ii", "--n-max", "4", "--mc-size", "2000", "--seed", "7"]
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert (a / "verify.json").read_bytes() == (b / "verify.json").read_bytes()

    def test_uniform_grid(self, out):
        code = run(["verify", "--identity", "L7i", "--k", "1", "--n", "2", "--grid-lower", "0.01",
                    "--grid-upper", "50", "--out", str(out)])
        assert code == 0
        assert report(out, "verify")["config"]["grid"]["spacing"] == "uniform"


class TestOutputDirectory:
    def test_env_var(self, tmp_path, monkeypatch):
        target = tmp_path / "envdir"
        monkeypatch.setenv(OUTPUT_ENV, str(target))
        assert run(["catalog"]) == 0
        assert (target / "catalog.json").exists()

    def test_default_relative(self, tmp_path, monkeypatch):
        monkeypatch.delenv(OUTPUT_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        assert run(["catalog"]) == 0
        assert (tmp_path / "reports" / "catalog.json").exists()

    def test_no_temp_files_left(self, out):
        run(["catalog", "--out", str(out)])
        assert sorted(p.name for p in out.iterdir()) == ["catalog.json"]


class TestSample:
    def test_sample(self, out):
        argv = ["sample", "--identity", "L8i", "--k", "1", "--n", "3", "--count", "500", "--seed", "1",
                "--out", str(out)]
        assert run(argv) == 0
        first = (out / "sample.txt").read_text()
        assert len(first.splitlines()) == 500
        assert run(argv) == 0
        assert (out / "sample.txt").read_text() == first

    def test_needs_seed(self, out):
        assert run(["sample", "--identity", "L8i", "--k", "1", "--n", "3", "--out", str(out)]) == 2

    def test_bad_count(self, out):
        assert run(["sample", "--identity", "L8i", "--k", "1", "--n", "3", "--count", "0",
                    "--seed", "1", "--out", str(out)]) == 2


class TestOdeCheck:
    def test_ok(self, out):
        assert run(["ode-check", "--r", "2", "--a", "0.5", "--out", str(out)]) == 0
        assert report(out, "ode_check")["residual"] < 1e-12

    def test_bad_params(self, out):
        assert run(["ode-check", "--a", "2", "--out", str(out)]) == 2


class TestResidual:
    def test_law(self, out):
        assert run(["residual", "--eq", "eq9", "--k", "1", "--n", "3", "--law", "ParetoII:lam=1,power=1",
                    "--out", str(out)]) == 0
        assert report(out, "residual")["residual"] < 1e-7

    def test_grid_function(self, out, tmp_path):
        y = np.geomspace(1e-3, 1e3, 2000)
        path = tmp_path / "F.csv"
        path.write_text(GridFunction(y, y / (1 + y)).to_csv())
        assert run(["residual", "--eq", "eq6", "--k", "1", "--n", "2", "--grid-function", str(path),
                    "--out", str(out)]) == 0

    def test_wrong_shift_law(self, out):
        assert run(["residual", "--eq", "eq9", "--k", "1", "--n", "3", "--law", "ParetoII",
                    "--shift-law", "Beta:alpha=2,beta=2", "--out", str(out)]) == 2

    def test_needs_exactly_one_source(self, out):
        assert run(["residual", "--eq", "eq9", "--k", "1", "--n", "3", "--out", str(out)]) == 2

    def test_eq14_range(self, out):
        assert run(["residual", "--eq", "eq14", "--k", "3", "--m", "2", "--n", "4", "--law", "ParetoII",
                    "--out", str(out)]) == 2


class TestSolveFixedPoint:
    def test_default(self, out):
        assert run(["solve-fp", "--out", str(out)]) == 0
        rep = report(out, "solve_fp")
        assert rep["converged"]
        F = np.array(rep["F"])
        y = np.array(rep["y"])
        assert np.max(np.abs(F - ParetoII().cdf(y))) < 1e-4
        assert (out / "solve_fp.csv").exists()

    def test_nonconvergence_exit_3(self, out, tmp_path):
        y = fixed_point_grid(400)
        init = tmp_path / "exact.csv"
        init.write_text(GridFunction(y, y / (1 + y)).to_csv())
        code = run(["solve-fp", "--init", str(init), "--noise-floor", "0", "--out", str(out)])
        assert code == 3
        rep = report(out, "solve_fp")
        assert rep["error"] and len(rep["trace"]) >= 6

    def test_domain_error(self, out):
        assert run(["solve-fp", "--eq", "eq14", "--k", "3", "--m", "2", "--n", "4", "--out", str(out)]) == 2


class TestGof:
    def write(self, tmp_path, values):
        path = tmp_path / "data.txt"
        path.write_text("".join(f"{float(v)!r}\n" for v in values))
        return str(path)

    def test_retain(self, out, tmp_path):
        data = self.write(tmp_path, Logistic(3.0, 1.0).sample(np.random.default_rng(0), 10_000))
        assert run(["gof", "--data", data, "--seed", "1", "--resamples", "199", "--out", str(out)]) == 0
        assert report(out, "gof")["decision"] == "retain"

    def test_reject(self, out, tmp_path):
        data = self.write(tmp_path, Exponential(1.0).sample(np.random.default_rng(0), 10_000))
        assert run(["gof", "--data", data, "--seed", "1", "--resamples", "199", "--out", str(out)]) == 1
        assert report(out, "gof")["decision"] == "reject"

    def test_needs_seed(self, out, tmp_path):
        data = self.write(tmp_path, [0.0] * 100)
        assert run(["gof", "--data", data, "--out", str(out)]) == 2

    def test_too_short(self, out, tmp_path):
        data = self.write(tmp_path, [1.0, 2.0, 3.0])
        assert run(["gof", "--data", data, "--seed", "1", "--out", str(out)]) == 2

    def test_missing_file(self, out, tmp_path):
        assert run(["gof", "--data", str(tmp_path / "nope"), "--seed", "1", "--out", str(out)]) == 2


class TestCalibrate:
    def test_runs(self, out):
        argv = ["calibrate", "--truth", "Logistic", "--repetitions", "50", "--resamples", "199",
                "--seed", "3", "--out", str(out)]
        assert run(argv) == 0
        first = (out / "calibrate.json").read_bytes()
        rep = json.loads(first)
        assert rep["repetitions"] == 50 and 0 <= rep["rate"] <= 1
        assert run(argv) == 0
        assert (out / "calibrate.json").read_bytes() == first

    def test_repetitions_validated(self, out):
        assert run(["calibrate", "--truth", "Logistic", "--repetitions", "0", "--seed", "3",
                    "--out", str(out)]) == 2


class TestHelpers:
    def test_parse_law(self):
        assert parse_law("ParetoII:lam=2,power=1") == ParetoII(2.0, 1.0)
        assert parse_law("Logistic") == Logistic()

    def test_canonical_json_sorted(self):
        assert canonical_json({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'

    def test_no_subcommand(self):
        assert run([]) == 2

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "logipareto", "catalog", "--out", str(tmp_path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "L8i" in proc.stdout
