"""
Replicated experiments for the drift estimators.

Replicate k of an experiment draws its noise from the seed
SeedSequence(base_seed, spawn_key=(k,)), simulates one path covering
burn-in + max(horizons), and evaluates every horizon on nested prefixes of
that path. Replicates are mapped over a thread pool; executor.map keeps
replicate order, so reports do not depend on completion order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import EstimationError, ValidationError
from .estimators import EstimateResult, EstimatorKind, estimate
from .kernel import MIN_POINTS_PER_UNIT, HurstParams, KernelConstants, calibrate_constants
from .model import (
    Assumption,
    ModelParams,
    SamplePath,
    TrigBasisFunction,
    burn_in_steps,
    classify_assumption,
    compute_limits,
    eval_h_tilde,
    h_tilde_projection,
    simulate_rou,
)
from .rosenblatt import RosenblattPath, generate_brownian, rosenblatt_path_fast

logger = logging.getLogger("rou_lab.montecarlo")

MIN_LIMIT_REPLICATES = 1000
REFERENCE_STREAM_V = 2**32
REFERENCE_STREAM_R = 2**32 + 1
Z_95 = 1.959963984540054


class ExperimentKind(Enum):
    CONSISTENCY = "consistency"
    RATE = "rate"
    LIMIT = "limit"
    ERGODICITY = "ergodicity"


# ─────────────────────────────────────────────
# configuration
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment; ``estimator_kind=None`` means pick by (A1)/(A1*) classification."""

    model: ModelParams
    horizons: tuple[int, ...] = (50, 100, 200)
    replicates: int = 500
    points_per_unit: int = 64
    estimator_kind: EstimatorKind | None = None
    base_seed: int = 0
    burn_in: float | None = None
    phi_extra: TrigBasisFunction | None = None
    noise_scale: float = 1.0
    x0: float = 0.0
    phi: TrigBasisFunction | None = None
    lags: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)

    def __post_init__(self):
        horizons = tuple(self.horizons)
        if not horizons or any(int(h) != h or h < 1 for h in horizons):
            raise ValidationError(f"horizons must be positive integers, got {horizons!r}")
        if any(b <= a for a, b in zip(horizons, horizons[1:])):
            raise ValidationError(f"horizons must be strictly increasing, got {horizons!r}")
        if int(self.replicates) != self.replicates or self.replicates < 2:
            raise ValidationError(f"replicates must be an integer >= 2, got {self.replicates!r}")
        if int(self.points_per_unit) != self.points_per_unit or self.points_per_unit < MIN_POINTS_PER_UNIT:
            raise ValidationError(
                f"points_per_unit must be an integer >= {MIN_POINTS_PER_UNIT}, got {self.points_per_unit!r}"
            )
        if self.burn_in is not None and self.burn_in < 0.0:
            raise ValidationError(f"burn_in must be non-negative, got {self.burn_in!r}")
        if not (self.noise_scale >= 0.0 and math.isfinite(self.noise_scale)):
            raise ValidationError(f"noise_scale must be non-negative, got {self.noise_scale!r}")
        if int(self.base_seed) != self.base_seed or self.base_seed < 0:
            raise ValidationError(f"base_seed must be an unsigned integer, got {self.base_seed!r}")
        object.__setattr__(self, "horizons", tuple(int(h) for h in horizons))
        object.__setattr__(self, "lags", tuple(float(s) for s in self.lags))

    @property
    def delta(self) -> float:
        return 1.0 / self.points_per_unit

    @property
    def resolved_burn_in(self) -> float:
        return self.model.default_burn_in if self.burn_in is None else float(self.burn_in)

    @property
    def estimator(self) -> EstimatorKind:
        if self.estimator_kind is not None:
            return self.estimator_kind
        if classify_assumption(self.model.drift).assumption is Assumption.A1_STAR:
            return EstimatorKind.ALT_A1STAR
        return EstimatorKind.ALT_A1

    @property
    def resolved_phi_extra(self) -> TrigBasisFunction | None:
        if self.phi_extra is not None or self.estimator is not EstimatorKind.ALT_A1:
            return self.phi_extra
        return classify_assumption(self.model.drift).suggested_phi

    @property
    def resolved_phi(self) -> TrigBasisFunction:
        return self.phi or self.model.drift.basis[0]

    def to_dict(self) -> dict[str, Any]:
        phi_extra = self.resolved_phi_extra
        return {
            "H": self.model.hurst.H,
            "alpha": self.model.alpha,
            "basis": self.model.drift.names,
            "mu": list(self.model.drift.mu),
            "horizons": list(self.horizons),
            "replicates": self.replicates,
            "points_per_unit": self.points_per_unit,
            "estimator": self.estimator.value,
            "base_seed": self.base_seed,
            "burn_in": self.resolved_burn_in,
            "phi_extra": phi_extra.name if phi_extra else None,
            "noise_scale": self.noise_scale,
            "x0": self.x0,
            "phi": self.resolved_phi.name,
            "lags": list(self.lags),
        }


def replicate_seed(base_seed: int, k: int) -> int:
    """Seed of replicate ``k``: a pure function of (base_seed, k)."""
    state = np.random.SeedSequence(int(base_seed), spawn_key=(int(k),)).generate_state(1, np.uint64)
    return int(state[0])


def coordinate_names(p: int) -> list[str]:
    return [*(f"mu_{i + 1}" for i in range(p)), "alpha"]


# ─────────────────────────────────────────────
# replicate simulation
# ─────────────────────────────────────────────


def _map_replicates(fn: Callable[[int], Any], count: int, workers: int) -> list[Any]:
    if workers <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, range(count)))


def simulate_replicate(
    config: ExperimentConfig, consts: KernelConstants, k: int
) -> tuple[int, SamplePath]:
    """(seed, observed path on [0, max(horizons)]) for replicate ``k``."""
    seed = replicate_seed(config.base_seed, k)
    delta = config.delta
    b = burn_in_steps(config.resolved_burn_in, delta)
    steps = b + config.horizons[-1] * config.points_per_unit
    hurst = config.model.hurst
    if config.noise_scale == 0.0:
        noise = RosenblattPath(np.arange(steps + 1) * delta, np.zeros(steps + 1), hurst, consts)
    else:
        lattice = generate_brownian(steps + 1, delta, seed)
        noise = rosenblatt_path_fast(lattice, hurst, consts)
    X = simulate_rou(
        config.model, noise, x0=config.x0, burn_in=b * delta, noise_scale=config.noise_scale
    )
    return seed, X


def _resolve_constants(config: ExperimentConfig, consts: KernelConstants | None) -> KernelConstants:
    if consts is None:
        return calibrate_constants(config.model.hurst, config.points_per_unit)
    consts.check_hurst(config.model.hurst)
    consts.check_resolution(config.delta)
    return consts


@dataclass
class ReplicateOutcome:
    replicate: int
    seed: int
    results: list[EstimateResult]


def _estimate_replicate(config: ExperimentConfig, consts: KernelConstants, k: int) -> ReplicateOutcome:
    seed, X = simulate_replicate(config, consts, k)
    kind = config.estimator
    phi_extra = config.resolved_phi_extra
    basis = config.model.drift.basis
    results = []
    for n in config.horizons:
        try:
            result = estimate(kind, X.prefix(n), basis, config.model.hurst, phi_extra)
            if not np.all(np.isfinite(result.theta_hat)):
                raise EstimationError("non-finite estimate")
        except EstimationError as exc:
            logger.warning(f"Replicate {k} (seed {seed}) excluded at n={n}: {type(exc).__name__}: {exc}")
            result = EstimateResult.failed(kind, len(basis), n, exc)
        results.append(result)
    return ReplicateOutcome(k, seed, results)


# ─────────────────────────────────────────────
# aggregation
# ─────────────────────────────────────────────


@dataclass
class CoordinateSummary:
    bias: float
    bias_se: float
    rmse: float
    rmse_se: float
    count: int


@dataclass
class HorizonSummary:
    horizon: int
    total: int
    ok: int
    excluded: dict[str, int]
    coordinates: dict[str, CoordinateSummary]


@dataclass
class SlopeFit:
    slope: float
    half_width: float
    expected: float
    points: int

    @property
    def low(self) -> float:
        return self.slope - self.half_width

    @property
    def high(self) -> float:
        return self.slope + self.half_width


@dataclass
class MomentSummary:
    count: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    skewness: float
    skewness_se: float


@dataclass
class ExperimentReport:
    kind: ExperimentKind
    config: dict[str, Any]
    header: list[str]
    rows: list[list[Any]]
    per_horizon: dict[int, HorizonSummary] = field(default_factory=dict)
    rate_slope: dict[str, SlopeFit | None] = field(default_factory=dict)
    moment_table: dict[str, MomentSummary] = field(default_factory=dict)
    reference_moments: dict[str, MomentSummary] = field(default_factory=dict)
    standardized_differences: dict[str, dict[str, float]] = field(default_factory=dict)
    reference_flags: dict[str, str] = field(default_factory=dict)
    ergodicity: dict[str, Any] = field(default_factory=dict)

    @property
    def excluded_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for summary in self.per_horizon.values():
            for name, count in summary.excluded.items():
                counts[name] = counts.get(name, 0) + count
        return counts

    def to_summary(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "config": self.config,
            "per_horizon": {str(n): asdict(s) for n, s in self.per_horizon.items()},
            "rate_slope": {c: (asdict(f) if f else None) for c, f in self.rate_slope.items()},
            "moment_table": {c: asdict(m) for c, m in self.moment_table.items()},
            "reference_moments": {c: asdict(m) for c, m in self.reference_moments.items()},
            "standardized_differences": self.standardized_differences,
            "reference_flags": self.reference_flags,
            "ergodicity": self.ergodicity,
            "excluded_counts": self.excluded_counts,
        }


def _se(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size >= 2 else math.nan


def summarize_errors(errors: np.ndarray) -> CoordinateSummary:
    """Bias and RMSE of one coordinate's estimation errors, with MC standard errors."""
    m = errors.size
    if m == 0:
        return CoordinateSummary(math.nan, math.nan, math.nan, math.nan, 0)
    sq = errors**2
    rmse = math.sqrt(float(np.mean(sq)))
    mse_se = _se(sq)
    rmse_se = mse_se / (2.0 * rmse) if rmse > 0.0 else 0.0
    return CoordinateSummary(float(np.mean(errors)), _se(errors), rmse, rmse_se, m)


def _summarize_horizon(n: int, results: list[EstimateResult], theta: np.ndarray) -> HorizonSummary:
    good = [r.theta_hat for r in results if r.ok]
    excluded: dict[str, int] = {}
    for r in results:
        if not r.ok:
            excluded[r.flag] = excluded.get(r.flag, 0) + 1
    errors = np.array(good).reshape(len(good), theta.size) - theta
    names = coordinate_names(theta.size - 1)
    coords = {name: summarize_errors(errors[:, j]) for j, name in enumerate(names)}
    return HorizonSummary(n, len(results), len(good), excluded, coords)


def fit_rate(horizons: Sequence[int], rmse: Sequence[float], rmse_se: Sequence[float], expected: float) -> SlopeFit | None:
    """Slope of log RMSE against log n, weighted by the delta-method SE of log RMSE."""
    x = np.log(np.asarray(horizons, dtype=float))
    r = np.asarray(rmse, dtype=float)
    se = np.asarray(rmse_se, dtype=float)
    if x.size < 2 or not np.all(np.isfinite(r)) or np.any(r <= 0.0):
        return None
    y = np.log(r)
    sd = se / r
    if x.size >= 3 and np.all(np.isfinite(sd)) and np.all(sd > 0.0):
        coeffs, cov = np.polyfit(x, y, 1, w=1.0 / sd, cov="unscaled")
        return SlopeFit(float(coeffs[0]), Z_95 * math.sqrt(cov[0, 0]), expected, int(x.size))
    fit = stats.linregress(x, y)
    half = Z_95 * fit.stderr if x.size >= 3 else math.nan
    return SlopeFit(float(fit.slope), float(half), expected, int(x.size))


def _replicate_rows(outcomes: list[ReplicateOutcome]) -> list[list[Any]]:
    return [r.to_csv_row(o.replicate, o.seed) for o in outcomes for r in o.results]


def _estimator_report(
    kind: ExperimentKind, config: ExperimentConfig, consts: KernelConstants, workers: int
) -> tuple[ExperimentReport, list[ReplicateOutcome]]:
    p = config.model.drift.p
    logger.info(
        f"{kind.value}: {config.replicates} replicates, horizons {list(config.horizons)}, "
        f"estimator {config.estimator.value}"
    )
    outcomes = _map_replicates(
        lambda k: _estimate_replicate(config, consts, k), config.replicates, workers
    )
    theta = config.model.theta
    per_horizon = {}
    for j, n in enumerate(config.horizons):
        summary = _summarize_horizon(n, [o.results[j] for o in outcomes], theta)
        per_horizon[n] = summary
        alpha = summary.coordinates["alpha"]
        logger.info(
            f"n={n}: ok={summary.ok}/{summary.total}, alpha bias={alpha.bias:.4g} rmse={alpha.rmse:.4g}"
        )
    report = ExperimentReport(
        kind=kind,
        config=config.to_dict(),
        header=EstimateResult.csv_header(p),
        rows=_replicate_rows(outcomes),
        per_horizon=per_horizon,
    )
    return report, outcomes


# ─────────────────────────────────────────────
# experiments
# ─────────────────────────────────────────────


def run_consistency(
    config: ExperimentConfig, consts: KernelConstants | None = None, workers: int = 1
) -> ExperimentReport:
    consts = _resolve_constants(config, consts)
    report, _ = _estimator_report(ExperimentKind.CONSISTENCY, config, consts, workers)
    return report


def run_rate(
    config: ExperimentConfig, consts: KernelConstants | None = None, workers: int = 1
) -> ExperimentReport:
    if len(config.horizons) < 3 or config.horizons[-1] < 4 * config.horizons[0]:
        raise ValidationError(
            f"rate fits need >= 3 horizons spanning a factor >= 4, got {list(config.horizons)}"
        )
    consts = _resolve_constants(config, consts)
    report, _ = _estimator_report(ExperimentKind.RATE, config, consts, workers)
    expected = -(1.0 - config.model.hurst.H)
    for name in coordinate_names(config.model.drift.p):
        rows = [report.per_horizon[n].coordinates[name] for n in config.horizons]
        report.rate_slope[name] = fit_rate(
            config.horizons, [c.rmse for c in rows], [c.rmse_se for c in rows], expected
        )
    return report


def simulate_rosenblatt_variable(
    hurst: HurstParams, consts: KernelConstants, n_samples: int, seed: int, workers: int = 1
) -> np.ndarray:
    """Independent draws of Z_1, one lattice on [0, 1] per derived seed."""
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValidationError(f"n_samples must be a positive integer, got {n_samples!r}")
    consts.check_hurst(hurst)
    n_points = consts.points_per_unit + 1

    def draw(j: int) -> float:
        lattice = generate_brownian(n_points, consts.grid_delta, replicate_seed(seed, j))
        return float(rosenblatt_path_fast(lattice, hurst, consts).values[-1])

    return np.array(_map_replicates(draw, int(n_samples), workers))


def moment_summary(sample: np.ndarray) -> MomentSummary:
    """Mean, variance and skewness with large-sample standard errors."""
    x = np.asarray(sample, dtype=float)
    m = x.size
    if m < 4:
        raise ValidationError(f"moment summaries need at least 4 values, got {m}")
    var = float(np.var(x, ddof=1))
    m4 = float(stats.moment(x, moment=4))
    skew_se = math.sqrt(6.0 * m * (m - 1) / ((m - 2) * (m + 1) * (m + 3)))
    return MomentSummary(
        count=m,
        mean=float(np.mean(x)),
        mean_se=math.sqrt(var / m),
        variance=var,
        variance_se=math.sqrt(max(m4 - var * var, 0.0) / m),
        skewness=float(stats.skew(x, bias=False)),
        skewness_se=skew_se,
    )


def limit_reference_sample(
    config: ExperimentConfig, V: np.ndarray, R: np.ndarray
) -> tuple[np.ndarray, dict[str, str]]:
    """
    Reference draws of the limit of n^{1−H}(ϑ̂_n − ϑ), one row per (V, R) pair.

    lse:        Q·(∫φ_1, …, ∫φ_p, −∫h̃)ᵀ V
    alt_a1:     α ← −r V,  μ_i ← (∫φ_i − Λ_i r) V,  r = ∫φ_{p+1} / ⟨φ_{p+1}, h̃⟩
    alt_a1star: α ← −C_α B_H R,  μ_i ← Λ_i(−C_α B_H R) + (∫φ_i) V

    Λ, γ, Q and h̃ are those of the Euler recursion at the experiment grid.
    The joint law of (R, V) is not available, so coordinates mixing both are
    flagged ``joint_law_unverified``.
    """
    model = config.model
    delta = 1.0 / config.points_per_unit
    limits = compute_limits(model, delta)
    law = limits.limit_law
    names = coordinate_names(model.drift.p)
    kind = config.estimator

    if kind is EstimatorKind.LSE:
        c = limits.Q @ np.append(law.integrals_phi, -law.h_tilde_integral)
        return np.outer(V, c), {name: "pathwise_surrogate" for name in names}

    if kind is EstimatorKind.ALT_A1:
        phi_extra = config.resolved_phi_extra
        proj = h_tilde_projection(model, phi_extra, delta)
        if proj == 0.0:
            raise ValidationError(f"<{phi_extra.name}, h_tilde> = 0: no (A1) limit law")
        r = phi_extra.integral / proj
        c = np.append(law.integrals_phi - law.lam * r, -r)
        return np.outer(V, c), {name: "ok" for name in names}

    g = -law.C_alpha * law.B_H * R
    sample = np.column_stack([*(lam * g + f * V for lam, f in zip(law.lam, law.integrals_phi)), g])
    flags = {
        name: "joint_law_unverified" if (lam != 0.0 and f != 0.0) else "ok"
        for name, lam, f in zip(names, law.lam, law.integrals_phi)
    }
    flags["alpha"] = "ok"
    return sample, flags


def _standardized_difference(a: MomentSummary, b: MomentSummary) -> dict[str, float]:
    def z(x, sx, y, sy):
        s = math.hypot(sx, sy)
        return (x - y) / s if s > 0.0 else (0.0 if x == y else math.inf)

    return {
        "mean": z(a.mean, a.mean_se, b.mean, b.mean_se),
        "variance": z(a.variance, a.variance_se, b.variance, b.variance_se),
        "skewness": z(a.skewness, a.skewness_se, b.skewness, b.skewness_se),
        "skewness_sign_match": float(np.sign(a.skewness) == np.sign(b.skewness)),
    }


def run_limit_distribution(
    config: ExperimentConfig, consts: KernelConstants | None = None, workers: int = 1
) -> ExperimentReport:
    """Compare n^{1−H}(ϑ̂_n − ϑ) at the largest horizon with the limit-law reference sample."""
    consts = _resolve_constants(config, consts)
    if config.replicates < MIN_LIMIT_REPLICATES:
        logger.warning(
            f"limit-distribution run with {config.replicates} replicates; "
            f"moment comparisons are meant for >= {MIN_LIMIT_REPLICATES}"
        )
    single = replace(config, horizons=(config.horizons[-1],))
    report, outcomes = _estimator_report(ExperimentKind.LIMIT, single, consts, workers)
    report.config = config.to_dict()

    n = single.horizons[0]
    H = config.model.hurst.H
    theta = config.model.theta
    good = np.array([o.results[0].theta_hat for o in outcomes if o.results[0].ok])
    scaled = n ** (1.0 - H) * (good.reshape(-1, theta.size) - theta)

    V = simulate_rosenblatt_variable(
        config.model.hurst, consts, config.replicates, replicate_seed(config.base_seed, REFERENCE_STREAM_V), workers
    )
    R = simulate_rosenblatt_variable(
        config.model.hurst, consts, config.replicates, replicate_seed(config.base_seed, REFERENCE_STREAM_R), workers
    )
    reference, flags = limit_reference_sample(config, V, R)

    for j, name in enumerate(coordinate_names(config.model.drift.p)):
        sample_m = moment_summary(scaled[:, j])
        ref_m = moment_summary(reference[:, j])
        report.moment_table[name] = sample_m
        report.reference_moments[name] = ref_m
        report.standardized_differences[name] = _standardized_difference(sample_m, ref_m)
    report.reference_moments["V"] = moment_summary(V)
    report.reference_flags = flags
    return report


# ─────────────────────────────────────────────
# ergodicity
# ─────────────────────────────────────────────


def _ergodic_replicate(config: ExperimentConfig, consts: KernelConstants, k: int):
    seed, X = simulate_replicate(config, consts, k)
    y_tilde = X.values - eval_h_tilde(config.model, X.times, X.delta)
    phi_vals = config.resolved_phi(X.times)
    delta = X.delta
    stats_at_n = []
    for n in config.horizons:
        m = n * config.points_per_unit
        stats_at_n.append(float(integrate.trapezoid(phi_vals[: m + 1] * y_tilde[: m + 1], dx=delta)) / n)
    autocov = []
    for lag in config.lags:
        s = int(round(lag / delta))
        autocov.append(float(np.mean(y_tilde[:-s] * y_tilde[s:])) if 0 < s < y_tilde.size else math.nan)
    return seed, stats_at_n, autocov


def run_ergodicity_check(
    config: ExperimentConfig, consts: KernelConstants | None = None, workers: int = 1
) -> ExperimentReport:
    """
    MC law of (1/n)∫_0^n φ(t) Ỹ_t dt with Ỹ = X − h̃ on burnt-in paths: its mean
    should vanish and its variance decay no slower than n^{2H−2}. Also estimates
    the autocovariance of Ỹ at ``config.lags``.
    """
    if config.resolved_burn_in <= 0.0:
        raise ValidationError("the ergodicity check needs a stationary regime (burn_in > 0)")
    consts = _resolve_constants(config, consts)
    H = config.model.hurst.H
    logger.info(
        f"ergodicity: {config.replicates} replicates, horizons {list(config.horizons)}, "
        f"phi {config.resolved_phi.name}"
    )
    outcomes = _map_replicates(
        lambda k: _ergodic_replicate(config, consts, k), config.replicates, workers
    )
    values = np.array([o[1] for o in outcomes])
    autocov = np.nanmean(np.array([o[2] for o in outcomes]), axis=0)

    per_n = {}
    for j, n in enumerate(config.horizons):
        col = values[:, j]
        per_n[str(n)] = {
            "mean": float(np.mean(col)),
            "mean_se": _se(col),
            "variance": float(np.var(col, ddof=1)),
        }
    variances = np.array([per_n[str(n)]["variance"] for n in config.horizons])
    var_fit = None
    if len(config.horizons) >= 2 and np.all(variances > 0.0):
        fit = stats.linregress(np.log(config.horizons), np.log(variances))
        half = Z_95 * fit.stderr if len(config.horizons) >= 3 else math.nan
        var_fit = SlopeFit(float(fit.slope), float(half), 2.0 * H - 2.0, len(config.horizons))

    lags = np.asarray(config.lags)
    usable = np.isfinite(autocov) & (autocov > 0.0)
    acf_fit = None
    if np.count_nonzero(usable) >= 2:
        fit = stats.linregress(np.log(lags[usable]), np.log(autocov[usable]))
        acf_fit = SlopeFit(float(fit.slope), Z_95 * float(fit.stderr), 2.0 * H - 2.0, int(np.count_nonzero(usable)))

    rows = [
        [k, seed, n, value]
        for k, (seed, stats_at_n, _) in enumerate(outcomes)
        for n, value in zip(config.horizons, stats_at_n)
    ]
    return ExperimentReport(
        kind=ExperimentKind.ERGODICITY,
        config=config.to_dict(),
        header=["replicate", "seed", "n", "statistic"],
        rows=rows,
        ergodicity={
            "per_horizon": per_n,
            "variance_slope": asdict(var_fit) if var_fit else None,
            "autocovariance": {str(lag): float(c) for lag, c in zip(config.lags, autocov)},
            "autocovariance_slope": asdict(acf_fit) if acf_fit else None,
        },
    )


RUNNERS = {
    ExperimentKind.CONSISTENCY: run_consistency,
    ExperimentKind.RATE: run_rate,
    ExperimentKind.LIMIT: run_limit_distribution,
    ExperimentKind.ERGODICITY: run_ergodicity_check,
}


def run_experiment(
    kind: ExperimentKind,
    config: ExperimentConfig,
    consts: KernelConstants | None = None,
    workers: int = 1,
) -> ExperimentReport:
    return RUNNERS[kind](config, consts, workers)
