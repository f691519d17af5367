"""Command-line harness: reports, exit codes, sweep artifacts."""

import json
import os

import pytest
from click.testing import CliRunner

from spherelp.cli import JobConfig, main
from spherelp.errors import ConfigError


@pytest.fixture()
def runner():
    return CliRunner()


class TestConfig:
    def test_defaults(self):
        cfg = JobConfig.from_options("lp")
        assert cfg.precision == 128 and cfg.format == "json"

    def test_rejections(self):
        with pytest.raises(ConfigError):
            JobConfig.from_options("lp", precision=32)
        with pytest.raises(ConfigError):
            JobConfig.from_options("lp", series_order=2)
        with pytest.raises(ConfigError):
            JobConfig.from_options("lp", format="xml")
        with pytest.raises(ConfigError):
            JobConfig.from_options("warp")
        with pytest.raises(ConfigError):
            JobConfig.from_options("lp", colour="red")

    def test_cache_dir_from_environment(self, monkeypatch):
        monkeypatch.setenv("SPHERELP_CACHE_DIR", "/tmp/somewhere")
        assert JobConfig.from_options("forms").cache_dir == "/tmp/somewhere"

    def test_bad_precision_exits_2(self, runner):
        result = runner.invoke(main, ["--precision", "32",
                                      "lattice", "info", "z1"])
        assert result.exit_code == 2
        assert "configuration error" in result.output


class TestLattice:
    def test_info_e8(self, runner):
        result = runner.invoke(main, ["lattice", "info", "e8"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["determinant"] == "1"
        assert doc["min_squared_length"] == 2.0
        assert doc["kissing_number"] == 240
        assert abs(doc["density"] - 0.253669507) < 1e-8

    def test_poisson_translated(self, runner):
        result = runner.invoke(main, ["lattice", "poisson", "z2",
                                      "--translate", "0.3"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["pass"] and doc["residual"] < 1e-10


class TestForms:
    def test_print_series(self, runner):
        result = runner.invoke(main, ["--series-order", "8",
                                      "forms", "print", "e4"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["name"] == "E4"
        assert doc["coefficients"][:3] == ["1", "240", "2160"]

    def test_print_unknown_exits_2(self, runner):
        result = runner.invoke(main, ["forms", "print", "nonesuch"])
        assert result.exit_code == 2

    def test_print_uses_cache(self, runner, tmp_path):
        result = runner.invoke(main, ["--cache-dir", str(tmp_path),
                                      "--series-order", "8",
                                      "forms", "print", "E6"])
        assert result.exit_code == 0
        assert any(name.startswith("series-E6") for name in os.listdir(tmp_path))

    def test_verify_identities(self, runner):
        result = runner.invoke(main, ["--series-order", "10",
                                      "forms", "verify"])
        assert result.exit_code == 0
        assert json.loads(result.output)["passed"]


class TestMagic:
    def test_taylor_report(self, runner):
        result = runner.invoke(main, ["magic", "taylor"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["f"]["value"] == "1"
        assert doc["f"]["quadratic"] == "-27/10"
        assert doc["f_hat"]["quadratic"] == "-3/2"

    def test_eval_at_root(self, runner):
        result = runner.invoke(main, ["magic", "eval", "1.4142135623730951"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert abs(float(doc["value"])) < 1e-8


class TestLP:
    def test_bound_report(self, runner, tmp_path):
        out = tmp_path / "bound.json"
        result = runner.invoke(main, ["--out", str(out),
                                      "lp", "bound", "--dim", "1"])
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["comparison"]["sandwiched"]
        assert abs(doc["r_star"] - 1.0) < 5e-3

    def test_sweep_writes_csv_and_figure(self, runner, tmp_path):
        out = tmp_path / "bounds.csv"
        result = runner.invoke(main, ["lp", "sweep", "--dims", "1,2",
                                      "--out", str(out), "--jobs", "1"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["failures"] == []
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("dimension,bound,record")
        assert len(lines) == 3
        figure = tmp_path / "bounds.png"
        assert figure.exists() and figure.stat().st_size > 0

    def test_bad_dims_exit_2(self, runner):
        result = runner.invoke(main, ["lp", "sweep", "--dims", "0..2"])
        assert result.exit_code == 2


class TestReproduce:
    def test_quick_pipeline(self, runner):
        result = runner.invoke(main, ["reproduce", "--quick"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["quick"] and doc["passed"]
        names = [c["name"] for c in doc["checks"]]
        assert names == ["e8_invariants", "modular_identities",
                         "magic_roots", "lp_bounds"]
