"""
Run configuration: an INI file with [model], [grid] and [experiment] sections,
resolved into a RunConfig dataclass. Omitted keys take desk-scale defaults.
"""

import configparser
import logging
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

from .errors import ValidationError
from .estimators import EstimatorKind
from .kernel import HurstParams
from .model import DriftSpec, ModelParams, TrigBasisFunction, parse_basis
from .montecarlo import ExperimentConfig, ExperimentKind

logger = logging.getLogger("rou_lab.config")


# ─── runtime configuration ────────────────────────────────────────────────
def _env_workers() -> int:
    raw = os.environ.get("ROU_LAB_WORKERS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring ROU_LAB_WORKERS={raw!r}: not an integer")
        return 1
    return max(value, 1)


DEFAULT_WORKERS = _env_workers()

SECTIONS: dict[str, tuple[str, ...]] = {
    "model": ("H", "alpha", "basis", "mu"),
    "grid": ("points_per_unit", "burn_in", "n_points", "horizon", "x0"),
    "experiment": (
        "kind", "horizons", "replicates", "estimator", "base_seed",
        "phi_extra", "noise_scale", "phi", "lags",
    ),
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _optional(text: str) -> str | None:
    text = text.strip()
    return None if text.lower() in ("", "none", "auto") else text


@dataclass
class RunConfig:
    """Every resolvable setting of a run; echoed verbatim into manifest.json."""

    # [model]
    H: float = 0.7
    alpha: float = 1.0
    basis: tuple[str, ...] = ("const",)
    mu: tuple[float, ...] = (1.0,)
    # [grid]
    points_per_unit: int = 64
    burn_in: float | None = None
    n_points: int = 1025
    horizon: int = 10
    x0: float = 0.0
    # [experiment]
    kind: str = "consistency"
    horizons: tuple[int, ...] = (50, 100, 200)
    replicates: int = 500
    estimator: str = "auto"
    base_seed: int = 0
    phi_extra: str | None = None
    noise_scale: float = 1.0
    phi: str | None = None
    lags: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)

    def __post_init__(self):
        if isinstance(self.basis, str):
            self.basis = tuple(part.strip() for part in self.basis.split(",") if part.strip())
        self.basis = tuple(self.basis)
        self.mu = tuple(float(m) for m in self.mu)
        self.horizons = tuple(int(h) for h in self.horizons)
        self.lags = tuple(float(s) for s in self.lags)

    # ── resolved domain objects ──

    def hurst(self) -> HurstParams:
        return HurstParams(self.H)

    def model_params(self) -> ModelParams:
        drift = DriftSpec(parse_basis(self.basis), self.mu)
        return ModelParams(drift=drift, alpha=self.alpha, hurst=self.hurst())

    def estimator_kind(self) -> EstimatorKind | None:
        if self.estimator == "auto":
            return None
        try:
            return EstimatorKind(self.estimator)
        except ValueError as exc:
            choices = ", ".join(["auto", *(k.value for k in EstimatorKind)])
            raise ValidationError(f"unknown estimator {self.estimator!r}; choose {choices}") from exc

    def experiment_kind(self) -> ExperimentKind:
        try:
            return ExperimentKind(self.kind)
        except ValueError as exc:
            choices = ", ".join(k.value for k in ExperimentKind)
            raise ValidationError(f"unknown experiment kind {self.kind!r}; choose {choices}") from exc

    def resolved_burn_in(self) -> float:
        return self.model_params().default_burn_in if self.burn_in is None else self.burn_in

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            model=self.model_params(),
            horizons=self.horizons,
            replicates=self.replicates,
            points_per_unit=self.points_per_unit,
            estimator_kind=self.estimator_kind(),
            base_seed=self.base_seed,
            burn_in=self.burn_in,
            phi_extra=TrigBasisFunction.parse(self.phi_extra) if self.phi_extra else None,
            noise_scale=self.noise_scale,
            x0=self.x0,
            phi=TrigBasisFunction.parse(self.phi) if self.phi else None,
            lags=self.lags,
        )

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["burn_in"] = self.resolved_burn_in()
        for key in ("basis", "mu", "horizons", "lags"):
            data[key] = list(data[key])
        return data


_CONVERTERS = {
    "H": float,
    "alpha": float,
    "basis": lambda s: tuple(part.strip() for part in s.split(",") if part.strip()),
    "mu": _floats,
    "points_per_unit": int,
    "burn_in": float,
    "n_points": int,
    "horizon": int,
    "x0": float,
    "kind": str.strip,
    "horizons": _ints,
    "replicates": int,
    "estimator": str.strip,
    "base_seed": int,
    "phi_extra": _optional,
    "noise_scale": float,
    "phi": _optional,
    "lags": _floats,
}


def load_config(path: Path | str | None = None) -> RunConfig:
    """Read ``path`` (INI) into a RunConfig; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except FileNotFoundError as exc:
        raise ValidationError(f"config file not found: {path}") from exc
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from exc

    values: dict[str, Any] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ValidationError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                raise ValidationError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[key] = _CONVERTERS[key](raw)
            except ValueError as exc:
                raise ValidationError(f"{path}: bad value for {key!r}: {raw!r}") from exc
    return RunConfig(**values)
