"""CLI: subcommands, config handling, determinism, exit codes, figures."""

import json
import os
import subprocess
import sys

import pytest

from paulilab.cli import KNOBS, main, parse_real, resolve_knobs
from paulilab.errors import InvalidParameterError


def run_cli(args, cwd):
    old = os.getcwd()
    os.chdir(cwd)
    try:
        return main(args)
    finally:
        os.chdir(old)


class TestParsing:
    def test_rational_syntax(self):
        assert parse_real("2/7") == pytest.approx(2 / 7)
        assert parse_real("0.4") == 0.4
        assert parse_real(3) == 3.0

    def test_unknown_config_keys(self):
        with pytest.raises(InvalidParameterError):
            resolve_knobs("series-eval", {}, {"bogus": 1})

    def test_round_trip_structure(self):
        # config -> parsed -> re-serialized -> parsed is identical
        base = {"s": 2.5, "t": 0.5, "r": 1.25, "route": "direct"}
        k = resolve_knobs("series-eval", {}, base)
        text = json.dumps(k)
        k2 = resolve_knobs("series-eval", {}, json.loads(text))
        assert k2 == k

    def test_flags_override_config(self):
        k = resolve_knobs("series-eval", {"r": 2.0}, {"r": 1.0, "s": 3.0})
        assert k["r"] == 2.0 and k["s"] == 3.0

    def test_every_knob_has_default(self):
        for sub, knobs in KNOBS.items():
            for kn in knobs:
                assert "default" in kn, (sub, kn["name"])


class TestSeriesEval:
    def test_zero_argument_row(self, tmp_path):
        assert run_cli(["series-eval", "--s", "3", "--t", "1", "--r", "0"], tmp_path) == 0
        text = (tmp_path / "series_eval.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1].startswith("s,t,r,")
        assert lines[2].split(",")[4] == "0"

    def test_deterministic_bytes(self, tmp_path):
        args = ["series-eval", "--s", "2.5", "--t", "1/2", "--r", "1.5", "--tol", "1e-8"]
        assert run_cli(args, tmp_path) == 0
        first = (tmp_path / "series_eval.csv").read_bytes()
        assert run_cli(args, tmp_path) == 0
        assert (tmp_path / "series_eval.csv").read_bytes() == first

    def test_json_format(self, tmp_path):
        assert run_cli(
            ["series-eval", "--s", "3", "--t", "1", "--r", "1", "--format", "json",
             "--output", "out.json"], tmp_path) == 0
        data = json.loads((tmp_path / "out.json").read_text())
        assert data["result"]["certified"] is True
        assert data["result"]["value"] > 0

    def test_asym_fit_report(self, tmp_path):
        # shortened window for test runtime; the acceptance suite runs the
        # full [1e3, 1e6] fit
        assert run_cli(
            ["series-asym", "--s", "2", "--t", "1", "--law", "power",
             "--r-min", "1e3", "--r-max", "1e5", "--n-points", "8",
             "--format", "json", "--output", "fit.json", "--no-figure"],
            tmp_path) == 0
        data = json.loads((tmp_path / "fit.json").read_text())
        assert data["result"]["exponent"] == pytest.approx(1.0, abs=0.02)
        assert data["result"]["prefactor"] == pytest.approx(1.5708, rel=0.02)


class TestExitCodes:
    def test_validation_error(self, tmp_path, capsys):
        code = run_cli(["series-eval", "--s", "0.5", "--t", "1", "--r", "1"], tmp_path)
        assert code == 2
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "InvalidParameterError"

    def test_resource_limit(self, tmp_path, capsys):
        code = run_cli(
            ["series-eval", "--s", "1.2", "--t", "0.2", "--r", "1e6", "--tol", "1e-12"],
            tmp_path)
        assert code == 3
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "ResourceLimitError"
        assert "achievable_tol" in record

    def test_config_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"subcommand": "spectrum"}))
        code = run_cli(["series-eval", "--config", str(cfg)], tmp_path)
        assert code == 2


class TestReports:
    def test_vdc_report_and_figure(self, tmp_path):
        assert run_cli(["vdc-verify", "--trials", "25", "--n-max", "64"], tmp_path) == 0
        assert (tmp_path / "vdc_verify.csv").exists()
        assert (tmp_path / "vdc_verify.png").exists()
        lines = (tmp_path / "vdc_verify.csv").read_text().splitlines()
        assert len(lines) == 2 + 25
        assert all(line.rsplit(",", 1)[1] == "true" for line in lines[2:])

    def test_no_figure_flag(self, tmp_path):
        assert run_cli(
            ["vdc-verify", "--trials", "5", "--n-max", "32", "--no-figure"], tmp_path) == 0
        assert not (tmp_path / "vdc_verify.png").exists()

    def test_vdc_seed_determinism(self, tmp_path):
        args = ["vdc-verify", "--trials", "10", "--n-max", "32", "--no-figure"]
        run_cli(args, tmp_path)
        first = (tmp_path / "vdc_verify.csv").read_bytes()
        run_cli(args, tmp_path)
        assert (tmp_path / "vdc_verify.csv").read_bytes() == first
        run_cli(args + ["--seed", "999"], tmp_path)
        assert (tmp_path / "vdc_verify.csv").read_bytes() != first

    def test_zero_modes_report(self, tmp_path):
        assert run_cli(
            ["zero-modes", "--preset", "th4", "--t", "2/7", "--K", "9",
             "--m-max", "4", "--format", "json", "--output", "zm.json",
             "--no-figure"], tmp_path) == 0
        data = json.loads((tmp_path / "zm.json").read_text())
        pred = data["result"]["prediction"]
        assert pred["rule"] == "critical_floor"
        assert pred["dim"] == 3 and pred["admissible"] is True
        assert data["result"]["integrable_count"] == 3
        assert len(data["result"]["kappa_fits"]) == 5

    def test_field_build_round_trip(self, tmp_path):
        assert run_cli(
            ["field-build", "--preset", "gaussian", "--amplitude", "5",
             "--format", "json", "--output", "fb.json", "--no-figure"], tmp_path) == 0
        data = json.loads((tmp_path / "fb.json").read_text())
        cfg = data["result"]["field"]
        from paulilab.fields import DecayingField, spec_from_config

        assert spec_from_config(cfg) == DecayingField("gaussian", 5.0)

    def test_spectrum_report(self, tmp_path):
        assert run_cli(
            ["spectrum", "--preset", "gaussian", "--amplitude", "5", "--L", "10",
             "--n", "48", "--k", "6", "--gap-hint", "0.05",
             "--export-matrix", "mat.txt", "--no-figure"], tmp_path) == 0
        lines = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert lines[1] == "index,eigenvalue,residual,flag"
        assert (tmp_path / "mat.txt").exists()

    def test_poisson_report(self, tmp_path):
        assert run_cli(
            ["poisson-check", "--preset", "cosine", "--b0", "0",
             "--h", "0.02", "--levels", "1", "--format", "json",
             "--output", "pc.json", "--no-figure"], tmp_path) == 0
        data = json.loads((tmp_path / "pc.json").read_text())
        ratios = data["result"]["ratios"]
        assert len(ratios) == 1 and 3.0 <= ratios[0] <= 5.0

    def test_no_tmp_leftovers(self, tmp_path):
        run_cli(["series-eval", "--s", "3", "--t", "1", "--r", "0"], tmp_path)
        assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp")]


class TestEntryPoint:
    def test_subprocess_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "paulilab.cli", "series-eval",
             "--s", "3", "--t", "1", "--r", "0"],
            cwd=tmp_path, capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0
        assert (tmp_path / "series_eval.csv").exists()
