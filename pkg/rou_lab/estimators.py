"""
Drift estimators for the periodic-mean Rosenblatt OU model.

Lebesgue integrals ∫ g X dt use the trapezoid rule; integrals against dX (and
dZ) use forward sums Σ g(t_k)(X_{k+1} − X_k), which keeps telescoping identities
exact on the grid.

The least-squares estimator needs the Skorohod integral ∫ X dZ, which cannot be
computed from one path. lse_estimate uses the forward sum in its place and every
result it returns carries the ``pathwise_surrogate`` flag. The two alternative
estimators only integrate deterministic functions against the noise.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np
from scipy import integrate, special

from .errors import (
    DegeneratePathError,
    LengthMismatchError,
    NearZeroDenominatorError,
    SingularMatrixError,
    ValidationError,
)
from .kernel import HurstParams
from .model import (
    ModelParams,
    SamplePath,
    TrigBasisFunction,
    require_trig_basis,
    basis_gram,
    eval_L,
    missing_counterparts,
)
from .rosenblatt import RosenblattPath

logger = logging.getLogger("rou_lab.estimators")

DENOMINATOR_GUARD = 1e-6
DEGENERACY_RTOL = 1e-12
ORTHOGONALITY_TOL = 1e-8


class EstimatorKind(Enum):
    LSE = "lse"
    ALT_A1 = "alt_a1"
    ALT_A1STAR = "alt_a1star"


# ─────────────────────────────────────────────
# path integrals
# ─────────────────────────────────────────────


def _grid_values(g, X: SamplePath) -> np.ndarray:
    values = np.asarray(g(X.times) if callable(g) else g, dtype=float)
    if values.ndim == 0:
        values = np.full(X.times.shape, float(values))
    if values.shape != X.values.shape:
        raise LengthMismatchError(
            f"grid function has {values.size} values, path has {X.values.size} points"
        )
    return values


def integral_against_path(g, X: SamplePath) -> float:
    """Forward sum Σ_k g(t_k)(X_{t_{k+1}} − X_{t_k})."""
    return float(np.dot(_grid_values(g, X)[:-1], np.diff(X.values)))


def lebesgue_integral(g, X: SamplePath) -> float:
    """Trapezoid ∫ g(t) X_t dt over the path's grid."""
    return float(integrate.trapezoid(_grid_values(g, X) * X.values, dx=X.delta))


def _integer_horizon(X: SamplePath) -> int:
    n = X.horizon
    if not math.isclose(n, round(n), rel_tol=0.0, abs_tol=1e-9 * max(1.0, n)) or round(n) < 1:
        raise ValidationError(f"the horizon must be a whole number of periods, got {n!r}")
    return int(round(n))


# ─────────────────────────────────────────────
# LSE building blocks
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class LseComponents:
    """
    Q_n = [[n·I_p, −a_n], [−a_nᵀ, b_n]] and P_n = (∫φ_i dX, −∫X dX), with
    a_n = ∫φ X dt, b_n = ∫X² dt, Λ_n = a_n/n and γ_n^{-1} = b_n/n − |Λ_n|².
    """

    n: int
    a_n: np.ndarray
    b_n: float
    Lambda_n: np.ndarray
    gamma_n_inv: float
    Q_n: np.ndarray
    P_n: np.ndarray

    @property
    def p(self) -> int:
        return self.a_n.size

    @property
    def is_degenerate(self) -> bool:
        return self.gamma_n_inv <= DEGENERACY_RTOL * max(1.0, self.b_n / self.n)


def compute_lse_components(
    X: SamplePath, basis: Sequence[TrigBasisFunction], require_nondegenerate: bool = True
) -> LseComponents:
    basis = require_trig_basis(basis)
    n = _integer_horizon(X)
    p = len(basis)
    Phi = np.array([phi(X.times) for phi in basis])
    dX = np.diff(X.values)

    a_n = integrate.trapezoid(Phi * X.values, dx=X.delta, axis=1)
    b_n = float(integrate.trapezoid(X.values**2, dx=X.delta))
    Lambda_n = a_n / n
    gamma_n_inv = b_n / n - float(Lambda_n @ Lambda_n)

    Q_n = np.zeros((p + 1, p + 1))
    Q_n[:p, :p] = n * np.eye(p)
    Q_n[:p, p] = -a_n
    Q_n[p, :p] = -a_n
    Q_n[p, p] = b_n
    P_n = np.append(Phi[:, :-1] @ dX, -float(X.values[:-1] @ dX))

    comps = LseComponents(
        n=n, a_n=a_n, b_n=b_n, Lambda_n=Lambda_n, gamma_n_inv=gamma_n_inv, Q_n=Q_n, P_n=P_n
    )
    if require_nondegenerate and comps.is_degenerate:
        raise DegeneratePathError(
            f"gamma_n^-1 = {gamma_n_inv!r} at n = {n}: the path carries no information on alpha"
        )
    return comps


def invert_Qn(components: LseComponents) -> np.ndarray:
    """(1/n)·[[I + γΛΛᵀ, γΛ], [γΛᵀ, γ]] with γ = γ_n and Λ = Λ_n."""
    if components.is_degenerate:
        raise SingularMatrixError(f"Q_n is singular: gamma_n^-1 = {components.gamma_n_inv!r}")
    lam = components.Lambda_n
    gamma = 1.0 / components.gamma_n_inv
    p = components.p
    inv = np.empty((p + 1, p + 1))
    inv[:p, :p] = np.eye(p) + gamma * np.outer(lam, lam)
    inv[:p, p] = gamma * lam
    inv[p, :p] = gamma * lam
    inv[p, p] = gamma
    return inv / components.n


# ─────────────────────────────────────────────
# results
# ─────────────────────────────────────────────


@dataclass
class EstimateResult:
    estimator_kind: EstimatorKind
    theta_hat: np.ndarray
    horizon_n: int
    diagnostics: dict[str, float] = field(default_factory=dict)
    flag: str = "ok"

    @property
    def ok(self) -> bool:
        return self.flag in ("ok", "pathwise_surrogate")

    @property
    def alpha_hat(self) -> float:
        return float(self.theta_hat[-1])

    @property
    def mu_hat(self) -> np.ndarray:
        return self.theta_hat[:-1]

    @staticmethod
    def csv_header(p: int) -> list[str]:
        return [
            "replicate", "seed", "n", "estimator",
            *[f"mu_hat_{i + 1}" for i in range(p)],
            "alpha_hat", "gamma_n_inv", "flag",
        ]

    def to_csv_row(self, replicate: int, seed: int) -> list[Any]:
        return [
            replicate, seed, self.horizon_n, self.estimator_kind.value,
            *self.theta_hat.tolist(),
            self.diagnostics.get("gamma_n_inv", math.nan), self.flag,
        ]

    @classmethod
    def failed(cls, kind: EstimatorKind, p: int, n: int, exc: Exception) -> "EstimateResult":
        return cls(kind, np.full(p + 1, math.nan), n, {}, type(exc).__name__)


# ─────────────────────────────────────────────
# estimators
# ─────────────────────────────────────────────


def lse_estimate(X: SamplePath, basis: Sequence[TrigBasisFunction]) -> EstimateResult:
    comps = compute_lse_components(X, basis)
    theta_hat = invert_Qn(comps) @ comps.P_n
    return EstimateResult(
        EstimatorKind.LSE,
        theta_hat,
        comps.n,
        {"gamma_n_inv": comps.gamma_n_inv, "cond_Q_n": float(np.linalg.cond(comps.Q_n))},
        flag="pathwise_surrogate",
    )


def lse_error_decomposition(
    X: SamplePath,
    basis: Sequence[TrigBasisFunction],
    params: ModelParams,
    noise: RosenblattPath | np.ndarray,
    offset: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Split P_n − Q_nϑ into (R_forward, residual) so that ϑ̂_n − ϑ = Q_n⁻¹(R_forward + residual).

    R_forward = (Σφ_i(t_k)ΔZ_k, −ΣX_kΔZ_k) is the grid analogue of R_n; residual holds the
    trapezoid-versus-left-sum boundary terms and the Riemann error of ∫φ_i L.

    ``noise`` holds the increments ΔZ (or the Rosenblatt path) that drove X, with X's first
    step taken on increment ``offset`` (the burn-in step count for stationary runs).
    """
    basis = require_trig_basis(basis)
    comps = compute_lse_components(X, basis)
    dZ = noise.increments if isinstance(noise, RosenblattPath) else np.asarray(noise, dtype=float)
    steps = X.values.size - 1
    if offset < 0 or dZ.size < offset + steps:
        raise LengthMismatchError(
            f"noise has {dZ.size} increments, path needs {steps} starting at {offset}"
        )
    dZ = dZ[offset : offset + steps]

    delta = X.delta
    x_left = X.values[:-1]
    t_left = X.times[:-1]
    Phi_left = np.array([phi(t_left) for phi in basis])
    L_full = eval_L(params.drift, X.times)
    L_left = L_full[:-1]
    alpha = params.alpha

    R = np.append(Phi_left @ dZ, -float(x_left @ dZ))

    riem_phi_x = Phi_left @ x_left * delta
    riem_phi_l = Phi_left @ L_left * delta
    mu = np.asarray(params.drift.mu)
    resid_mu = alpha * (comps.a_n - riem_phi_x) + (riem_phi_l - comps.n * mu)

    trap_lx = float(integrate.trapezoid(L_full * X.values, dx=delta))
    riem_lx = float(L_left @ x_left * delta)
    riem_xx = float(x_left @ x_left * delta)
    resid_alpha = (trap_lx - riem_lx) + alpha * (riem_xx - comps.b_n)

    return R, np.append(resid_mu, resid_alpha)


def _check_orthogonal(basis: tuple[TrigBasisFunction, ...], phi_extra: TrigBasisFunction) -> None:
    if phi_extra in basis:
        raise ValidationError(f"phi_extra {phi_extra.name} is already in the basis")
    gram = basis_gram((*basis, phi_extra))
    leak = float(np.max(np.abs(gram[-1, :-1]))) if basis else 0.0
    if leak > ORTHOGONALITY_TOL:
        raise ValidationError(f"phi_extra {phi_extra.name} is not orthogonal to the basis ({leak:.3g})")


def alt_estimate_A1(
    X: SamplePath, basis: Sequence[TrigBasisFunction], phi_extra: TrigBasisFunction
) -> EstimateResult:
    """
    ᾱ_n = −∫φ_{p+1} dX / ∫φ_{p+1} X dt and μ̄_{i,n} = (1/n)(∫φ_i dX + ᾱ_n ∫φ_i X dt).
    """
    basis = require_trig_basis(basis)
    (phi_extra,) = require_trig_basis([phi_extra])
    _check_orthogonal(basis, phi_extra)
    n = _integer_horizon(X)

    denom = lebesgue_integral(phi_extra, X)
    if abs(denom / n) < DENOMINATOR_GUARD:
        raise NearZeroDenominatorError(
            f"(1/n)∫{phi_extra.name}·X dt = {denom / n:.3g} is numerically zero; "
            "the basis may satisfy (A1*) or n is too small"
        )
    alpha_bar = -integral_against_path(phi_extra, X) / denom
    mu_bar = np.array(
        [(integral_against_path(phi, X) + alpha_bar * lebesgue_integral(phi, X)) / n for phi in basis]
    )
    return EstimateResult(
        EstimatorKind.ALT_A1,
        np.append(mu_bar, alpha_bar),
        n,
        {"denominator": denom / n},
    )


def alpha_from_gamma_inv(gamma_n_inv: float, hurst: HurstParams) -> float:
    """Invert γ^{-1} = α^{−2H} H Γ(2H) for α."""
    H = hurst.H
    return (gamma_n_inv / (H * special.gamma(2.0 * H))) ** (-1.0 / (2.0 * H))


def alt_estimate_A1star(
    X: SamplePath, basis: Sequence[TrigBasisFunction], hurst: HurstParams
) -> EstimateResult:
    """
    ᾱ_n^{(1)} = (γ_n^{-1} / (HΓ(2H)))^{−1/(2H)} and μ̄_{n,i}^{(1)} = (1/n)(∫φ_i dX + ᾱ^{(1)} ∫φ_i X dt).
    """
    basis = require_trig_basis(basis)
    if missing_counterparts(basis):
        raise ValidationError(
            f"alt_a1star needs a symmetric basis; missing {[phi.name for phi in missing_counterparts(basis)]}"
        )
    comps = compute_lse_components(X, basis)
    alpha_bar = alpha_from_gamma_inv(comps.gamma_n_inv, hurst)
    mu_bar = (comps.P_n[:-1] + alpha_bar * comps.a_n) / comps.n
    return EstimateResult(
        EstimatorKind.ALT_A1STAR,
        np.append(mu_bar, alpha_bar),
        comps.n,
        {"gamma_n_inv": comps.gamma_n_inv},
    )


def estimate(
    kind: EstimatorKind,
    X: SamplePath,
    basis: Sequence[TrigBasisFunction],
    hurst: HurstParams,
    phi_extra: TrigBasisFunction | None = None,
) -> EstimateResult:
    """Dispatch to the estimator named by ``kind``."""
    if kind is EstimatorKind.LSE:
        return lse_estimate(X, basis)
    if kind is EstimatorKind.ALT_A1:
        if phi_extra is None:
            raise ValidationError("alt_a1 needs phi_extra")
        return alt_estimate_A1(X, basis, phi_extra)
    return alt_estimate_A1star(X, basis, hurst)
