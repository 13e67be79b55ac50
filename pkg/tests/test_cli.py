#!/usr/bin/env python3
"""
Tests for run configuration and the rou-lab command line
(rou_lab/config.py, rou_lab/cli.py).

Run with:  python -m pytest tests/test_cli.py -v
"""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
import rou_lab.cli as _cli
import rou_lab.config as _config
from rou_lab.cli import dispatch
from rou_lab.config import RunConfig, load_config
from rou_lab.errors import DegeneratePathError, ValidationError, exit_code_for
from rou_lab.estimators import EstimatorKind
from rou_lab.montecarlo import ExperimentKind

SMALL_INI = """\
[model]
H = 0.7
alpha = 1.0
basis = const
mu = 1.0

[grid]
points_per_unit = 16
burn_in = 5
n_points = 33
horizon = 4

[experiment]
kind = consistency
horizons = 2, 4
replicates = 3
base_seed = 9
"""


# ─── fixtures ────────────────────────────────────────────────────────────


@pytest.fixture
def ini(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(SMALL_INI)
    return path


def run_cli(*argv):
    return dispatch([str(a) for a in argv])


# ─── configuration ───────────────────────────────────────────────────────


class TestConfig:
    def test_defaults(self):
        config = load_config(None)
        assert config == RunConfig()
        assert config.H == 0.7
        assert config.horizons == (50, 100, 200)
        assert config.experiment_kind() is ExperimentKind.CONSISTENCY
        assert config.estimator_kind() is None

    def test_load(self, ini):
        config = load_config(ini)
        assert config.points_per_unit == 16
        assert config.burn_in == 5.0
        assert config.horizons == (2, 4)
        assert config.basis == ("const",)
        assert config.model_params().theta.tolist() == [1.0, 1.0]

    def test_lists(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[model]\nbasis = const, sin:1\nmu = 1, 0.5\n[experiment]\nphi_extra = cos:1\n")
        config = load_config(path)
        assert config.basis == ("const", "sin:1")
        assert config.mu == (1.0, 0.5)
        assert config.experiment_config().resolved_phi_extra.name == "cos:1"

    def test_auto_is_none(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nphi_extra = auto\nestimator = auto\n")
        config = load_config(path)
        assert config.phi_extra is None
        assert config.estimator_kind() is None

    @pytest.mark.parametrize(
        "text",
        [
            "[plot]\nwidth = 3\n",
            "[model]\ngamma = 3\n",
            "[grid]\npoints_per_unit = many\n",
            "not an ini file",
        ],
    )
    def test_rejects(self, tmp_path, text):
        path = tmp_path / "bad.ini"
        path.write_text(text)
        with pytest.raises(ValidationError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_config(tmp_path / "nope.ini")

    def test_unknown_choices(self):
        with pytest.raises(ValidationError):
            RunConfig(estimator="mle").estimator_kind()
        with pytest.raises(ValidationError):
            RunConfig(kind="bootstrap").experiment_kind()
        assert RunConfig(estimator="lse").estimator_kind() is EstimatorKind.LSE

    def test_overrides_skip_none(self):
        config = RunConfig().with_overrides(base_seed=5, kind=None)
        assert config.base_seed == 5
        assert config.kind == "consistency"

    def test_to_dict_resolves_burn_in(self):
        assert RunConfig(alpha=2.0).to_dict()["burn_in"] == pytest.approx(20.0)

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv("ROU_LAB_WORKERS", "4")
        assert _config._env_workers() == 4
        monkeypatch.setenv("ROU_LAB_WORKERS", "lots")
        assert _config._env_workers() == 1
        monkeypatch.delenv("ROU_LAB_WORKERS")
        assert _config._env_workers() == 1


# ─── command line ────────────────────────────────────────────────────────


class TestClassify:
    def test_a1(self, tmp_path, capsys):
        assert run_cli("classify", "--basis", "const,sin:1", "--out", tmp_path, "--quiet") == 0
        assert capsys.readouterr().out.strip() == "A1, suggested phi: cos:1"
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["subcommand"] == "classify"
        assert manifest["assumption"] == "A1"
        assert manifest["suggested_phi"] == "cos:1"

    def test_a1_star(self, tmp_path, capsys):
        assert run_cli("classify", "--basis", "sin:2,cos:2", "--out", tmp_path, "--quiet") == 0
        assert capsys.readouterr().out.strip() == "A1*"

    def test_unsupported_basis(self, tmp_path, capsys):
        assert run_cli("classify", "--basis", "tan:1", "--out", tmp_path, "--quiet") == 1
        assert "error:" in capsys.readouterr().err


class TestUsage:
    def test_missing_subcommand(self, capsys):
        assert run_cli() == 1

    def test_unknown_flag(self, tmp_path):
        assert run_cli("calibrate", "--out", tmp_path, "--frobnicate") == 1

    def test_estimate_needs_path(self, tmp_path):
        assert run_cli("estimate", "--out", tmp_path) == 1

    def test_bad_workers(self, tmp_path):
        assert run_cli("classify", "--out", tmp_path, "--workers", "0", "--quiet") == 1

    def test_unexpected_failure_exits_2(self, tmp_path, monkeypatch, capsys):
        def boom(run):
            raise RuntimeError("boom")

        monkeypatch.setitem(_cli.COMMANDS, "classify", boom)
        assert run_cli("classify", "--out", tmp_path, "--quiet") == exit_code_for(RuntimeError()) == 2
        assert "boom" in capsys.readouterr().err

    def test_exit_codes_follow_the_error_hierarchy(self):
        assert exit_code_for(ValidationError("x")) == 1
        assert exit_code_for(DegeneratePathError("x")) == 2
        assert exit_code_for(KeyError("x")) == 2

    def test_version(self, capsys):
        assert run_cli("--version") == 0
        assert "rou-lab" in capsys.readouterr().out


class TestPipeline:
    def test_calibrate(self, tmp_path, ini, capsys):
        out = tmp_path / "cal"
        assert run_cli("calibrate", "--config", ini, "--out", out, "--quiet") == 0
        constants = json.loads((out / "constants.json").read_text())
        assert constants["points_per_unit"] == 16
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["outputs"] == ["constants.json"]
        assert len(manifest["calibration"]["sha256"]) == 64
        assert (out / "rou_lab.log").exists()
        printed = capsys.readouterr().out
        assert "c_Hprime=" in printed
        assert "neighbor_weight=" in printed
        assert constants["neighbor_weight"] > 0.0

    def test_refuses_overwrite_without_force(self, tmp_path, ini):
        out = tmp_path / "cal"
        assert run_cli("calibrate", "--config", ini, "--out", out, "--quiet") == 0
        assert run_cli("calibrate", "--config", ini, "--out", out, "--quiet") == 1
        assert run_cli("calibrate", "--config", ini, "--out", out, "--quiet", "--force") == 0

    def test_manifest_needs_force(self, tmp_path, ini):
        out = tmp_path / "shared"
        assert run_cli("calibrate", "--config", ini, "--out", out, "--quiet") == 0
        before = (out / "manifest.json").read_bytes()
        assert run_cli("classify", "--basis", "sin:1", "--out", out, "--quiet") == 1
        assert (out / "manifest.json").read_bytes() == before
        assert run_cli("classify", "--basis", "sin:1", "--out", out, "--quiet", "--force") == 0
        assert json.loads((out / "manifest.json").read_text())["subcommand"] == "classify"

    def test_simulate_rosenblatt(self, tmp_path, ini):
        out = tmp_path / "z"
        assert run_cli("simulate-rosenblatt", "--config", ini, "--out", out, "--quiet") == 0
        lines = (out / "rosenblatt_path.csv").read_text().splitlines()
        assert lines[0] == "t,z"
        assert len(lines) == 34

    def test_simulate_rosenblatt_rejects_short_lattice(self, tmp_path):
        path = tmp_path / "short.ini"
        path.write_text("[grid]\npoints_per_unit = 16\nn_points = 1\n")
        assert run_cli("simulate-rosenblatt", "--config", path, "--out", tmp_path / "z", "--quiet") == 1
        assert not (tmp_path / "z" / "constants.json").exists()

    def test_simulate_then_estimate(self, tmp_path, ini, capsys):
        cal = tmp_path / "cal"
        assert run_cli("calibrate", "--config", ini, "--out", cal, "--quiet") == 0
        constants = cal / "constants.json"

        sim = tmp_path / "sim"
        assert run_cli("simulate-rou", "--config", ini, "--calibration", constants, "--out", sim, "--quiet") == 0
        lines = (sim / "rou_path.csv").read_text().splitlines()
        assert lines[0] == "t,x"
        assert len(lines) == 4 * 16 + 2

        est = tmp_path / "est"
        code = run_cli(
            "estimate", "--config", ini, "--path", sim / "rou_path.csv",
            "--estimator", "lse", "--out", est, "--quiet",
        )
        assert code == 0
        rows = (est / "estimate.csv").read_text().splitlines()
        assert rows[0].startswith("replicate,seed,n,estimator,mu_hat_1,alpha_hat")
        assert rows[1].split(",")[3] == "lse"
        assert rows[1].endswith("pathwise_surrogate")
        assert "alpha_hat=" in capsys.readouterr().out
        manifest = json.loads((est / "manifest.json").read_text())
        assert len(manifest["path_sha256"]) == 64

    def test_estimate_rejects_uneven_grid(self, tmp_path):
        path = tmp_path / "path.csv"
        path.write_text("t,x\n0,0\n0.1,1\n0.3,2\n")
        assert run_cli("estimate", "--path", path, "--out", tmp_path / "est", "--quiet") == 1

    def test_estimate_rejects_late_start(self, tmp_path):
        path = tmp_path / "path.csv"
        path.write_text("t,x\n1,0\n2,1\n3,2\n")
        assert run_cli("estimate", "--path", path, "--out", tmp_path / "est", "--quiet") == 1

    def test_degenerate_path_exits_2(self, tmp_path):
        path = tmp_path / "flat.csv"
        rows = "\n".join(f"{k / 16!r},1.0" for k in range(33))
        path.write_text("t,x\n" + rows + "\n")
        code = run_cli("estimate", "--path", path, "--estimator", "lse", "--out", tmp_path / "est", "--quiet")
        assert code == 2

    def test_simulate_rou_is_reproducible(self, tmp_path, ini):
        for name in ("a", "b"):
            assert run_cli("simulate-rou", "--config", ini, "--out", tmp_path / name, "--quiet") == 0
        assert (tmp_path / "a" / "rou_path.csv").read_bytes() == (tmp_path / "b" / "rou_path.csv").read_bytes()

    def test_seed_override(self, tmp_path, ini):
        assert run_cli("simulate-rou", "--config", ini, "--out", tmp_path / "a", "--quiet") == 0
        assert run_cli("simulate-rou", "--config", ini, "--seed", 10, "--out", tmp_path / "b", "--quiet") == 0
        assert (tmp_path / "a" / "rou_path.csv").read_bytes() != (tmp_path / "b" / "rou_path.csv").read_bytes()
        manifest = json.loads((tmp_path / "b" / "manifest.json").read_text())
        assert manifest["seed"] == 10


class TestMontecarloCommand:
    def test_consistency_run(self, tmp_path, ini):
        out = tmp_path / "mc"
        assert run_cli("montecarlo", "--config", ini, "--out", out, "--quiet") == 0
        lines = (out / "replicates.csv").read_text().splitlines()
        assert len(lines) == 1 + 3 * 2
        summary = json.loads((out / "summary.json").read_text())
        assert summary["kind"] == "consistency"
        assert set(summary["per_horizon"]) == {"2", "4"}
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["outputs"] == ["constants.json", "replicates.csv", "summary.json"]

    def test_rerun_from_calibration_is_byte_identical(self, tmp_path, ini):
        first = tmp_path / "first"
        assert run_cli("montecarlo", "--config", ini, "--out", first, "--quiet") == 0
        second = tmp_path / "second"
        code = run_cli(
            "montecarlo", "--config", ini, "--calibration", first / "constants.json",
            "--workers", 2, "--out", second, "--quiet",
        )
        assert code == 0
        assert (first / "replicates.csv").read_bytes() == (second / "replicates.csv").read_bytes()

    def test_experiment_override(self, tmp_path, ini):
        out = tmp_path / "erg"
        assert run_cli("montecarlo", "--config", ini, "--experiment", "ergodicity", "--out", out, "--quiet") == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["kind"] == "ergodicity"

    def test_rate_with_too_few_horizons(self, tmp_path, ini):
        assert run_cli("montecarlo", "--config", ini, "--experiment", "rate", "--out", tmp_path / "r", "--quiet") == 1
