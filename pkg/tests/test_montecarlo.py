#!/usr/bin/env python3
"""
Tests for the Monte Carlo experiment runners (rou_lab/montecarlo.py).

These use coarse lattices and a handful of replicates; the acceptance-scale
runs live in tests/test_acceptance.py behind the `slow` marker.

Run with:  python -m pytest tests/test_montecarlo.py -v
"""

import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
from rou_lab.artifacts import to_json
from rou_lab.errors import ValidationError
from rou_lab.estimators import EstimatorKind
from rou_lab.kernel import HurstParams, calibrate_constants
from rou_lab.model import DriftSpec, ModelParams, TrigBasisFunction, compute_limits, parse_basis
from rou_lab.montecarlo import (
    ExperimentConfig,
    ExperimentKind,
    coordinate_names,
    fit_rate,
    limit_reference_sample,
    moment_summary,
    replicate_seed,
    run_consistency,
    run_ergodicity_check,
    run_experiment,
    run_limit_distribution,
    run_rate,
    simulate_replicate,
    simulate_rosenblatt_variable,
    summarize_errors,
)

PPU = 16


# ─── helpers / fixtures ──────────────────────────────────────────────────


def make_model(basis="const", mu=(1.0,), alpha=1.0, H=0.7):
    return ModelParams(DriftSpec(parse_basis(basis), tuple(mu)), alpha, HurstParams(H))


def make_config(**overrides):
    settings = dict(
        model=make_model(),
        horizons=(5, 10),
        replicates=4,
        points_per_unit=PPU,
        burn_in=5.0,
        base_seed=123,
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


@pytest.fixture(scope="module")
def consts():
    return calibrate_constants(HurstParams(0.7), PPU)


# ─── configuration ───────────────────────────────────────────────────────


class TestConfig:
    def test_auto_estimator_for_symmetric_basis(self):
        assert make_config().estimator is EstimatorKind.ALT_A1STAR

    def test_auto_estimator_for_asymmetric_basis(self):
        config = make_config(model=make_model("const, sin:1", (1.0, 1.0)))
        assert config.estimator is EstimatorKind.ALT_A1
        assert config.resolved_phi_extra == TrigBasisFunction.parse("cos:1")

    def test_explicit_estimator_wins(self):
        assert make_config(estimator_kind=EstimatorKind.LSE).estimator is EstimatorKind.LSE

    def test_default_burn_in(self):
        config = make_config(model=make_model(alpha=2.0), burn_in=None)
        assert config.resolved_burn_in == pytest.approx(20.0)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"horizons": ()},
            {"horizons": (10, 5)},
            {"horizons": (0, 5)},
            {"replicates": 1},
            {"points_per_unit": 8},
            {"burn_in": -1.0},
            {"noise_scale": -0.5},
            {"base_seed": -3},
        ],
    )
    def test_rejects_invalid(self, overrides):
        with pytest.raises(ValidationError):
            make_config(**overrides)

    def test_to_dict_is_json_ready(self):
        doc = json.loads(to_json(make_config().to_dict()))
        assert doc["estimator"] == "alt_a1star"
        assert doc["basis"] == ["const"]
        assert doc["phi"] == "const"


# ─── seeds and replicates ────────────────────────────────────────────────


class TestReplicates:
    def test_seed_is_pure(self):
        assert replicate_seed(7, 3) == replicate_seed(7, 3)
        seeds = {replicate_seed(7, k) for k in range(100)}
        assert len(seeds) == 100
        assert replicate_seed(7, 0) != replicate_seed(8, 0)

    def test_replicate_is_reproducible(self, consts):
        config = make_config()
        seed_a, X_a = simulate_replicate(config, consts, 2)
        seed_b, X_b = simulate_replicate(config, consts, 2)
        assert seed_a == seed_b
        np.testing.assert_array_equal(X_a.values, X_b.values)
        _, X_c = simulate_replicate(config, consts, 3)
        assert not np.array_equal(X_a.values, X_c.values)

    def test_replicate_covers_largest_horizon(self, consts):
        _, X = simulate_replicate(make_config(), consts, 0)
        assert X.horizon == pytest.approx(10.0)

    def test_coordinate_names(self):
        assert coordinate_names(2) == ["mu_1", "mu_2", "alpha"]


# ─── aggregation ─────────────────────────────────────────────────────────


class TestAggregation:
    def test_summarize_errors(self):
        summary = summarize_errors(np.array([1.0, -1.0, 1.0, -1.0]))
        assert summary.bias == 0.0
        assert summary.rmse == 1.0
        assert summary.rmse_se == 0.0
        assert summary.count == 4

    def test_summarize_empty(self):
        assert summarize_errors(np.array([])).count == 0

    def test_fit_rate_recovers_power_law(self):
        n = np.array([50, 100, 200, 400])
        rmse = 2.0 * n**-0.3
        fit = fit_rate(n, rmse, 0.01 * rmse, expected=-0.3)
        assert fit.slope == pytest.approx(-0.3, abs=1e-10)
        assert fit.low <= -0.3 <= fit.high

    def test_fit_rate_without_errors(self):
        n = np.array([10, 20, 40])
        fit = fit_rate(n, 1.0 / n, np.zeros(3), expected=-1.0)
        assert fit.slope == pytest.approx(-1.0)

    def test_fit_rate_degenerate(self):
        assert fit_rate([10, 20], [0.0, 0.1], [0.0, 0.0], expected=-0.3) is None

    def test_moment_summary(self):
        summary = moment_summary(np.array([0.0, 1.0, 2.0, 3.0, 10.0]))
        assert summary.mean == pytest.approx(3.2)
        assert summary.variance == pytest.approx(np.var([0, 1, 2, 3, 10], ddof=1))
        assert summary.skewness > 0.0

    def test_moment_summary_too_small(self):
        with pytest.raises(ValidationError):
            moment_summary(np.array([1.0, 2.0]))


# ─── experiments ─────────────────────────────────────────────────────────


class TestConsistency:
    def test_report(self, consts):
        report = run_consistency(make_config(), consts)
        assert report.kind is ExperimentKind.CONSISTENCY
        assert len(report.rows) == 4 * 2
        assert report.header[:4] == ["replicate", "seed", "n", "estimator"]
        for n, summary in report.per_horizon.items():
            assert summary.total == 4
            assert summary.ok + sum(summary.excluded.values()) == summary.total
            assert set(summary.coordinates) == {"mu_1", "alpha"}

    def test_thread_pool_matches_serial(self, consts):
        config = make_config()
        serial = run_consistency(config, consts, workers=1)
        pooled = run_consistency(config, consts, workers=3)
        assert to_json(serial.to_summary()) == to_json(pooled.to_summary())
        assert serial.rows == pooled.rows

    def test_noise_free_bias_is_discretization_sized(self, consts):
        config = make_config(
            model=make_model("const, sin:1", (1.0, 1.0)),
            estimator_kind=EstimatorKind.LSE,
            burn_in=40.0,
            noise_scale=0.0,
            replicates=2,
        )
        report = run_consistency(config, consts)
        for summary in report.per_horizon.values():
            for coord in summary.coordinates.values():
                assert abs(coord.bias) <= 5.0 / PPU

    def test_calibrates_when_needed(self):
        report = run_consistency(make_config(replicates=2, horizons=(2,)))
        assert report.per_horizon[2].total == 2

    def test_rejects_mismatched_constants(self):
        wrong = calibrate_constants(HurstParams(0.7), 32)
        with pytest.raises(ValidationError):
            run_consistency(make_config(), wrong)


class TestRate:
    def test_needs_three_horizons(self, consts):
        with pytest.raises(ValidationError):
            run_rate(make_config(horizons=(5, 10)), consts)
        with pytest.raises(ValidationError):
            run_rate(make_config(horizons=(5, 6, 7)), consts)

    def test_noise_free_slope(self, consts):
        config = make_config(
            model=make_model("sin:1", (1.0,)),
            estimator_kind=EstimatorKind.ALT_A1,
            phi_extra=TrigBasisFunction.parse("cos:1"),
            horizons=(10, 20, 40),
            burn_in=0.0,
            noise_scale=0.0,
            replicates=2,
        )
        report = run_rate(config, consts)
        fit = report.rate_slope["alpha"]
        assert fit.expected == pytest.approx(-0.3)
        assert fit.slope <= -0.9

    def test_summary_is_serialisable(self, consts):
        report = run_rate(make_config(horizons=(2, 4, 8), replicates=3), consts)
        doc = json.loads(to_json(report.to_summary()))
        assert doc["kind"] == "rate"
        assert set(doc["rate_slope"]) == {"mu_1", "alpha"}


class TestLimitDistribution:
    def test_reference_variable(self, consts):
        hurst = HurstParams(0.7)
        a = simulate_rosenblatt_variable(hurst, consts, 300, seed=4)
        b = simulate_rosenblatt_variable(hurst, consts, 300, seed=4, workers=2)
        np.testing.assert_array_equal(a, b)
        summary = moment_summary(a)
        assert abs(summary.mean) < 4 * summary.mean_se
        assert abs(summary.variance - 1.0) < 4 * summary.variance_se

    def test_reference_for_constant_basis(self):
        config = make_config()
        V = np.array([1.0, -2.0, 0.5])
        R = np.array([0.3, 0.1, -1.0])
        sample, flags = limit_reference_sample(config, V, R)
        law = compute_limits(config.model).limit_law
        # h_tilde is constant, so Lambda = mu/alpha and both terms enter mu_1
        np.testing.assert_allclose(sample[:, 1], -law.C_alpha * law.B_H * R)
        np.testing.assert_allclose(sample[:, 0], law.lam[0] * sample[:, 1] + V)
        assert flags == {"mu_1": "joint_law_unverified", "alpha": "ok"}

    def test_reference_for_a1_basis(self):
        config = make_config(model=make_model("const, sin:1", (1.0, 1.0)))
        V = np.array([1.0, 2.0])
        sample, flags = limit_reference_sample(config, V, np.zeros(2))
        limits = compute_limits(config.model)
        w = 2.0 * math.pi
        # r = int(cos:1) / <cos:1, h_tilde> = 0
        assert sample.shape == (2, 3)
        np.testing.assert_allclose(sample[:, 2], 0.0, atol=1e-15)
        np.testing.assert_allclose(sample[:, 0], V * 1.0)
        assert all(flag == "ok" for flag in flags.values())
        assert limits.Lambda[1] == pytest.approx(1.0 / (w * w + 1.0))

    def test_reference_for_lse(self):
        config = make_config(estimator_kind=EstimatorKind.LSE)
        sample, flags = limit_reference_sample(config, np.array([1.0, 2.0]), np.zeros(2))
        np.testing.assert_allclose(sample[1], 2.0 * sample[0])
        assert set(flags.values()) == {"pathwise_surrogate"}

    def test_reference_uses_the_experiment_grid(self):
        config = make_config(model=make_model("const, sin:1", (1.0, 1.0)), estimator_kind=EstimatorKind.LSE)
        sample, _ = limit_reference_sample(config, np.array([1.0]), np.zeros(1))
        on_grid = compute_limits(config.model, 1 / PPU)
        continuous = compute_limits(config.model)
        law = on_grid.limit_law
        expected = on_grid.Q @ np.append(law.integrals_phi, -law.h_tilde_integral)
        np.testing.assert_allclose(sample[0], expected, rtol=1e-12)
        assert not np.allclose(on_grid.Q, continuous.Q, rtol=1e-6)

    def test_small_run_warns_and_reports(self, consts, caplog):
        config = make_config(horizons=(4,), replicates=8)
        with caplog.at_level(logging.WARNING, logger="rou_lab.montecarlo"):
            report = run_limit_distribution(config, consts)
        assert "replicates" in caplog.text
        assert set(report.moment_table) == {"mu_1", "alpha"}
        assert "V" in report.reference_moments
        assert set(report.standardized_differences["alpha"]) >= {"mean", "variance", "skewness"}


class TestErgodicity:
    def test_report(self, consts):
        config = make_config(horizons=(2, 4, 8), replicates=6, lags=(0.5, 1.0, 2.0))
        report = run_ergodicity_check(config, consts)
        assert report.header == ["replicate", "seed", "n", "statistic"]
        assert len(report.rows) == 6 * 3
        erg = report.ergodicity
        assert set(erg["per_horizon"]) == {"2", "4", "8"}
        assert set(erg["autocovariance"]) == {"0.5", "1.0", "2.0"}

    def test_noise_free_statistic_vanishes(self, consts):
        config = make_config(
            model=make_model("const, sin:1", (1.0, 1.0)),
            horizons=(2, 4, 8),
            burn_in=40.0,
            noise_scale=0.0,
            replicates=2,
        )
        report = run_ergodicity_check(config, consts)
        for stats_at_n in report.ergodicity["per_horizon"].values():
            assert abs(stats_at_n["mean"]) <= 5.0 / PPU

    def test_needs_burn_in(self, consts):
        with pytest.raises(ValidationError):
            run_ergodicity_check(make_config(burn_in=0.0), consts)

    def test_dispatch(self, consts):
        report = run_experiment(ExperimentKind.ERGODICITY, make_config(horizons=(2, 4)), consts)
        assert report.kind is ExperimentKind.ERGODICITY
