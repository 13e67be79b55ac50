"""
Rosenblatt Ornstein-Uhlenbeck model with periodic mean

    dX_t = (L(t) − α X_t) dt + dZ^H_t,    L(t) = Σ_i μ_i φ_i(t),

with φ_i drawn from the orthonormal trigonometric system on [0, 1]
(1, √2 sin(2πk·), √2 cos(2πk·)). Everything stationary (h̃, Λ, γ, Q) is
evaluated in closed form through the coordinates of h̃ in that system.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy import signal, special

from .errors import UnsupportedBasisError, ValidationError
from .kernel import HurstParams
from .rosenblatt import RosenblattPath

logger = logging.getLogger("rou_lab.model")

SQRT2 = math.sqrt(2.0)
DEFAULT_BURN_IN_FACTOR = 40.0
STATIONARY_SERIES_TOL = 1e-17


# ─────────────────────────────────────────────
# basis
# ─────────────────────────────────────────────


class BasisKind(Enum):
    CONSTANT = "const"
    SINE = "sin"
    COSINE = "cos"


@dataclass(frozen=True)
class TrigBasisFunction:
    """One member of the orthonormal trigonometric system, named `const`, `sin:k` or `cos:k`."""

    kind: BasisKind
    frequency: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, BasisKind):
            raise UnsupportedBasisError(f"unsupported basis kind {self.kind!r}")
        if self.kind is BasisKind.CONSTANT:
            if self.frequency != 0:
                raise UnsupportedBasisError("the constant basis function has no frequency")
        elif int(self.frequency) != self.frequency or self.frequency < 1:
            raise UnsupportedBasisError(
                f"{self.kind.value} needs a positive integer frequency, got {self.frequency!r}"
            )

    @classmethod
    def parse(cls, name: str) -> "TrigBasisFunction":
        text = name.strip().lower()
        if text in ("const", "1"):
            return cls(BasisKind.CONSTANT)
        kind, sep, freq = text.partition(":")
        if not sep or kind not in ("sin", "cos"):
            raise UnsupportedBasisError(f"unsupported basis element {name!r}; use const, sin:k or cos:k")
        try:
            k = int(freq)
        except ValueError as exc:
            raise UnsupportedBasisError(f"bad frequency in basis element {name!r}") from exc
        return cls(BasisKind(kind), k)

    @property
    def name(self) -> str:
        if self.kind is BasisKind.CONSTANT:
            return "const"
        return f"{self.kind.value}:{self.frequency}"

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency

    @property
    def integral(self) -> float:
        """∫_0^1 φ dt."""
        return 1.0 if self.kind is BasisKind.CONSTANT else 0.0

    def counterpart(self) -> "TrigBasisFunction | None":
        if self.kind is BasisKind.SINE:
            return TrigBasisFunction(BasisKind.COSINE, self.frequency)
        if self.kind is BasisKind.COSINE:
            return TrigBasisFunction(BasisKind.SINE, self.frequency)
        return None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is BasisKind.CONSTANT:
            return np.ones_like(t)
        if self.kind is BasisKind.SINE:
            return SQRT2 * np.sin(self.omega * t)
        return SQRT2 * np.cos(self.omega * t)

    def __str__(self) -> str:
        return self.name


def parse_basis(names: str | Iterable[str]) -> tuple[TrigBasisFunction, ...]:
    """Parse ``"const, sin:1"`` or a list of names."""
    if isinstance(names, str):
        names = [part for part in names.split(",") if part.strip()]
    return tuple(TrigBasisFunction.parse(name) for name in names)


def require_trig_basis(basis: Iterable) -> tuple[TrigBasisFunction, ...]:
    basis = tuple(basis)
    for phi in basis:
        if not isinstance(phi, TrigBasisFunction):
            raise UnsupportedBasisError(f"basis element {phi!r} is not trigonometric")
    return basis


def basis_gram(basis: Sequence[TrigBasisFunction], points: int = 10_000) -> np.ndarray:
    """Gram matrix ⟨φ_i, φ_j⟩ on [0, 1] by the midpoint rule (exact for low frequencies)."""
    basis = require_trig_basis(basis)
    t = (np.arange(points) + 0.5) / points
    Phi = np.array([phi(t) for phi in basis])
    return Phi @ Phi.T / points


# ─────────────────────────────────────────────
# parameters
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class DriftSpec:
    basis: tuple[TrigBasisFunction, ...]
    mu: tuple[float, ...]

    def __post_init__(self):
        basis = require_trig_basis(self.basis)
        mu = tuple(float(m) for m in self.mu)
        if not basis:
            raise ValidationError("the drift basis needs at least one element")
        if len(mu) != len(basis):
            raise ValidationError(f"basis has {len(basis)} elements but mu has {len(mu)}")
        if len(set(basis)) != len(basis):
            raise ValidationError(f"basis elements must be distinct: {[b.name for b in basis]}")
        if not all(math.isfinite(m) for m in mu):
            raise ValidationError("mu coefficients must be finite")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "mu", mu)

    @property
    def p(self) -> int:
        return len(self.basis)

    @property
    def names(self) -> list[str]:
        return [phi.name for phi in self.basis]


@dataclass(frozen=True)
class ModelParams:
    drift: DriftSpec
    alpha: float
    hurst: HurstParams

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValidationError(f"alpha must be positive and finite, got {self.alpha!r}")

    @property
    def theta(self) -> np.ndarray:
        """True parameter (μ_1, …, μ_p, α)."""
        return np.array([*self.drift.mu, self.alpha])

    @property
    def default_burn_in(self) -> float:
        return DEFAULT_BURN_IN_FACTOR / self.alpha


def eval_L(spec: DriftSpec, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for phi, mu in zip(spec.basis, spec.mu):
        out = out + mu * phi(t)
    return out if out.ndim else float(out)


# ─────────────────────────────────────────────
# stationary mean h̃
# ─────────────────────────────────────────────


def _response(alpha: float, omega: float, delta: float | None) -> tuple[float, float]:
    """(a, b) with a − ib the gain of the drift filter at frequency ω."""
    if delta is None:
        denom = omega * omega + alpha * alpha
        return alpha / denom, omega / denom
    # Euler recursion X_{k+1} = ρX_k + δ e^{iωkδ} has the periodic solution c e^{iωkδ}
    rho = 1.0 - alpha * delta
    gain = delta / (complex(math.cos(omega * delta), math.sin(omega * delta)) - rho)
    return gain.real, -gain.imag


def h_tilde_coefficients(
    params: ModelParams, delta: float | None = None
) -> dict[TrigBasisFunction, float]:
    """
    Coordinates of h̃(t) = e^{−αt} ∫_{−∞}^t e^{αs} L(s) ds in the trigonometric system.

    With ω = 2πk, μ_0 the const coefficient and μ_s, μ_c those of sin:k, cos:k:
      const → μ_0/α,  sin:k → aμ_s + bμ_c,  cos:k → aμ_c − bμ_s,
    where a = α/(ω²+α²), b = ω/(ω²+α²). Given ``delta``, (a, b) come from the
    Euler scheme's own transfer function instead, so h̃ is the periodic mean of
    the simulated recursion on that grid.
    """
    alpha = params.alpha
    if delta is not None:
        _check_euler_step(alpha, delta)
    coords: dict[TrigBasisFunction, float] = {}

    def add(phi: TrigBasisFunction, value: float) -> None:
        coords[phi] = coords.get(phi, 0.0) + value

    for phi, mu in zip(params.drift.basis, params.drift.mu):
        if phi.kind is BasisKind.CONSTANT:
            add(phi, mu / alpha)
            continue
        a, b = _response(alpha, phi.omega, delta)
        partner = phi.counterpart()
        if phi.kind is BasisKind.SINE:
            add(phi, a * mu)
            add(partner, -b * mu)
        else:
            add(phi, a * mu)
            add(partner, b * mu)
    return coords


def eval_h_tilde(params: ModelParams, t, delta: float | None = None):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for phi, coeff in h_tilde_coefficients(params, delta).items():
        out = out + coeff * phi(t)
    return out if out.ndim else float(out)


def h_tilde_projection(
    params: ModelParams, phi: TrigBasisFunction, delta: float | None = None
) -> float:
    """⟨φ, h̃⟩ in L²([0, 1]) for any member of the trigonometric system."""
    (phi,) = require_trig_basis([phi])
    return h_tilde_coefficients(params, delta).get(phi, 0.0)


def _check_euler_step(alpha: float, delta: float) -> None:
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValidationError(f"delta must be a positive finite number, got {delta!r}")
    if not abs(1.0 - alpha * delta) < 1.0:
        raise ValidationError(f"Euler recursion has no stationary regime at alpha*delta = {alpha * delta!r}")


def stationary_variance(alpha: float, hurst: HurstParams, delta: float | None = None) -> float:
    """
    Variance of the stationary Rosenblatt OU noise part: α^{−2H} H Γ(2H) in
    continuous time, or, given ``delta``, that of Y_{k+1} = ρY_k + ΔZ_k with
    ρ = 1 − αδ, i.e. [r(0) + 2 Σ_{h≥1} r(h) ρ^h] / (1 − ρ²) with r the
    increment autocovariance.
    """
    H = hurst.H
    if delta is None:
        return alpha ** (-2.0 * H) * H * special.gamma(2.0 * H)
    _check_euler_step(alpha, delta)
    rho = 1.0 - alpha * delta
    two_h = 2.0 * H
    if rho == 0.0:
        lags = np.zeros(1)
    else:
        lags = np.arange(max(1, math.ceil(math.log(STATIONARY_SERIES_TOL) / math.log(abs(rho)))) + 1.0)
    r = 0.5 * delta**two_h * (np.abs(lags + 1) ** two_h - 2.0 * lags**two_h + np.abs(lags - 1) ** two_h)
    weights = np.where(lags == 0, 1.0, 2.0 * rho**lags)
    return float(np.sum(weights * r) / (1.0 - rho * rho))


# ─────────────────────────────────────────────
# (A1) / (A1*) classification
# ─────────────────────────────────────────────


class Assumption(Enum):
    A1 = "A1"
    A1_STAR = "A1*"


@dataclass(frozen=True)
class Classification:
    assumption: Assumption
    suggested_phi: TrigBasisFunction | None = None

    def describe(self) -> str:
        if self.assumption is Assumption.A1_STAR:
            return "A1*"
        return f"A1, suggested phi: {self.suggested_phi.name}"


def missing_counterparts(basis: Sequence[TrigBasisFunction]) -> list[TrigBasisFunction]:
    present = set(require_trig_basis(basis))
    missing = {phi.counterpart() for phi in present if phi.counterpart() not in present}
    missing.discard(None)
    return sorted(missing, key=lambda phi: (phi.frequency, phi.kind.value))


def classify_assumption(spec: DriftSpec) -> Classification:
    """
    A1* iff every sin:k in the basis comes with cos:k and vice versa; h̃ then
    stays in the span of the basis. Otherwise A1, suggesting a missing
    counterpart, preferring one whose partner carries a non-zero μ so that
    ⟨φ_{p+1}, h̃⟩ ≠ 0; ties go to the lowest frequency.
    """
    missing = missing_counterparts(spec.basis)
    if not missing:
        return Classification(Assumption.A1_STAR)
    mu_of = dict(zip(spec.basis, spec.mu))
    active = [phi for phi in missing if mu_of.get(phi.counterpart(), 0.0) != 0.0]
    return Classification(Assumption.A1, (active or missing)[0])


# ─────────────────────────────────────────────
# simulation
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class SamplePath:
    """Observed path on the uniform grid t_k = kδ, k = 0..N."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape or self.times.size < 2:
            raise ValidationError("a sample path needs matching times/values with at least two points")

    @property
    def delta(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def prefix(self, horizon: float) -> "SamplePath":
        """The observation restricted to [0, horizon]."""
        steps = int(round(horizon / self.delta))
        if steps < 1 or steps > self.times.size - 1:
            raise ValidationError(f"horizon {horizon!r} outside the simulated range [0, {self.horizon!r}]")
        return SamplePath(self.times[: steps + 1], self.values[: steps + 1])


def burn_in_steps(burn_in: float, delta: float) -> int:
    if burn_in < 0.0:
        raise ValidationError(f"burn_in must be non-negative, got {burn_in!r}")
    return int(math.ceil(burn_in / delta - 1e-9))


def simulate_rou(
    params: ModelParams,
    noise: RosenblattPath,
    x0: float = 0.0,
    burn_in: float = 0.0,
    noise_scale: float = 1.0,
) -> SamplePath:
    """
    Euler scheme X_{k+1} = X_k + (L(t_k) − αX_k)δ + (Z_{t_{k+1}} − Z_{t_k}).

    The first ceil(burn_in/δ) steps run at negative times and are discarded, so the
    returned path approximates the stationary version when burn_in ≫ 1/α.
    """
    delta = noise.delta
    alpha = params.alpha
    if alpha * delta >= 1.0:
        logger.warning(f"Euler step unstable: alpha*delta = {alpha * delta:.4g} >= 1")
    b = burn_in_steps(burn_in, delta)
    dZ = np.diff(noise.values)
    total = dZ.size
    if total <= b:
        raise ValidationError(f"noise covers {total} steps, burn-in alone needs {b}")

    t = (np.arange(total) - b) * delta
    forcing = eval_L(params.drift, t) * delta + noise_scale * dZ
    rho = 1.0 - alpha * delta
    # X_{k+1} = ρ X_k + forcing_k
    tail, _ = signal.lfilter([1.0], [1.0, -rho], forcing, zi=[rho * x0])
    X = np.concatenate(([float(x0)], tail))[b:]
    return SamplePath(times=np.arange(X.size) * delta, values=X)


# ─────────────────────────────────────────────
# deterministic limits
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class LimitLawSpec:
    C_alpha: float
    B_H: float
    integrals_phi: np.ndarray
    h_tilde_integral: float
    lam: np.ndarray
    gamma: float


@dataclass(frozen=True)
class ModelLimits:
    Lambda: np.ndarray
    gamma: float
    Q: np.ndarray
    limit_law: LimitLawSpec
    h_tilde_norm_sq: float


def limit_constants(params: ModelParams) -> tuple[float, float]:
    """(C_α, B_H) of the (A1*) limit law."""
    H = params.hurst.H
    C_alpha = params.alpha**H / (2.0 * H * H * special.gamma(2.0 * H))
    B_H = (2.0 * H - 1.0) * special.gamma(H + 1.0) / math.sqrt(H * (2.0 * H - 1.0) / 2.0)
    return C_alpha, B_H


def compute_limits(params: ModelParams, delta: float | None = None) -> ModelLimits:
    """
    Λ_i = ⟨φ_i, h̃⟩, γ^{-1} = ‖h̃‖² + Var(Y) − Σ Λ_i², and
    Q = [[I + γΛΛᵀ, γΛ], [γΛᵀ, γ]], the almost-sure limit of n·Q_n⁻¹.

    Without ``delta`` these are the continuous-time limits (Var(Y) = α^{−2H}HΓ(2H)).
    With it, h̃ and Var(Y) are those of the Euler recursion on that grid, which is
    the limit of estimators fed by simulate_rou.
    """
    basis = require_trig_basis(params.drift.basis)
    coords = h_tilde_coefficients(params, delta)
    lam = np.array([coords.get(phi, 0.0) for phi in basis])
    norm_sq = float(sum(c * c for c in coords.values()))
    gamma_inv = norm_sq + stationary_variance(params.alpha, params.hurst, delta) - float(lam @ lam)
    if not gamma_inv > 0.0:
        raise ValidationError(f"gamma^-1 = {gamma_inv!r} is not positive")
    gamma = 1.0 / gamma_inv

    p = lam.size
    Q = np.empty((p + 1, p + 1))
    Q[:p, :p] = np.eye(p) + gamma * np.outer(lam, lam)
    Q[:p, p] = gamma * lam
    Q[p, :p] = gamma * lam
    Q[p, p] = gamma

    C_alpha, B_H = limit_constants(params)
    const = TrigBasisFunction(BasisKind.CONSTANT)
    law = LimitLawSpec(
        C_alpha=C_alpha,
        B_H=B_H,
        integrals_phi=np.array([phi.integral for phi in basis]),
        h_tilde_integral=coords.get(const, 0.0),
        lam=lam,
        gamma=gamma,
    )
    return ModelLimits(Lambda=lam, gamma=gamma, Q=Q, limit_law=law, h_tilde_norm_sq=norm_sq)
