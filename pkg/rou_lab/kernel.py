"""
fBm-type kernel K^{H'} and its derivative, plus lattice calibration of the
normalising constants c_{H'} and d(H).

Lattice conventions (shared by every module):
  - Brownian cell i covers [iδ, (i+1)δ]; its node is the midpoint y_i = (i+½)δ.
  - Outer cell m covers [mδ, (m+1)δ]. Pairs (m, i) with i ≤ m are used, and each
    factor of ∂K is averaged over its cell in closed form, so the singular line
    u = s is integrated, never evaluated.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy import integrate

from .errors import CalibrationError, DomainError, ResolutionMismatchError, ValidationError

logger = logging.getLogger("rou_lab.kernel")

QUAD_TOL = 1e-10
MIN_POINTS_PER_UNIT = 16


# ─────────────────────────────────────────────
# parameter types
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class HurstParams:
    """Self-similarity index H of the Rosenblatt noise and H' = (H+1)/2."""

    H: float
    Hprime: float = field(init=False)

    def __post_init__(self):
        if not (0.5 < self.H < 1.0):
            raise ValidationError(f"H must lie in (1/2, 1), got {self.H!r}")
        object.__setattr__(self, "Hprime", (self.H + 1.0) / 2.0)


@dataclass(frozen=True)
class KernelConstants:
    """Calibrated constants, tagged with the lattice they were calibrated on."""

    H: float
    c_Hprime: float
    d_H: float
    points_per_unit: int
    neighbor_weight: float = 1.0

    @property
    def grid_delta(self) -> float:
        return 1.0 / self.points_per_unit

    def check_resolution(self, delta: float) -> None:
        """Raise unless ``delta`` is the lattice step these constants belong to."""
        if not math.isclose(delta * self.points_per_unit, 1.0, rel_tol=1e-9):
            raise ResolutionMismatchError(
                f"constants calibrated at {self.points_per_unit} points/unit "
                f"(delta={self.grid_delta!r}) but lattice has delta={delta!r}"
            )

    def check_hurst(self, hurst: HurstParams) -> None:
        if not math.isclose(self.H, hurst.H, rel_tol=0.0, abs_tol=1e-12):
            raise ValidationError(
                f"constants calibrated for H={self.H!r}, requested H={hurst.H!r}"
            )

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["Hprime"] = (self.H + 1.0) / 2.0
        data["grid_delta"] = self.grid_delta
        return data

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "KernelConstants":
        try:
            return KernelConstants(
                H=float(data["H"]),
                c_Hprime=float(data["c_Hprime"]),
                d_H=float(data["d_H"]),
                points_per_unit=int(data["points_per_unit"]),
                neighbor_weight=float(data["neighbor_weight"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed calibration document: {exc}") from exc


# ─────────────────────────────────────────────
# kernel evaluation
# ─────────────────────────────────────────────


def _kernel_integral(Hprime: float, t: float, s: float) -> float:
    # ∫_s^t (u-s)^{H'-3/2} u^{H'-1/2} du; QAWS handles the algebraic endpoint
    value, _ = integrate.quad(
        lambda u: u ** (Hprime - 0.5),
        s,
        t,
        weight="alg",
        wvar=(Hprime - 1.5, 0.0),
        epsabs=QUAD_TOL,
        epsrel=QUAD_TOL,
        limit=200,
    )
    return value


def kernel_K(params: HurstParams, consts: KernelConstants, t: float, s: float) -> float:
    """
    K^{H'}(t, s) = c_{H'} s^{1/2-H'} ∫_s^t (u-s)^{H'-3/2} u^{H'-1/2} du.

    K(t, t) = 0 (empty range); s > t or s <= 0 is a domain error.
    """
    if s <= 0.0 or s > t:
        raise DomainError(f"kernel_K requires 0 < s <= t, got t={t!r}, s={s!r}")
    if s == t:
        return 0.0
    Hp = params.Hprime
    return consts.c_Hprime * s ** (0.5 - Hp) * _kernel_integral(Hp, t, s)


def kernel_dK(params: HurstParams, consts: KernelConstants, u: float, s: float) -> float:
    """∂K^{H'}/∂u (u, s) = c_{H'} s^{1/2-H'} (u-s)^{H'-3/2} u^{H'-1/2}; needs 0 < s < u."""
    if s <= 0.0 or s >= u:
        raise DomainError(f"kernel_dK requires 0 < s < u, got u={u!r}, s={s!r}")
    Hp = params.Hprime
    return consts.c_Hprime * s ** (0.5 - Hp) * (u - s) ** (Hp - 1.5) * u ** (Hp - 0.5)


# ─────────────────────────────────────────────
# lattice helpers
# ─────────────────────────────────────────────


def lattice_factors(
    params: HurstParams, delta: float, n_cells: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Cell averages (U, G, Y) of the three factors of ∂K(u, y), so that
    F[m, i] = c_{H'} U_m G_{m-i} Y_i for i <= m.

      U_m = mean of u^{H'-1/2} over the outer cell [mδ, (m+1)δ]
      Y_i = mean of y^{1/2-H'} over the Brownian cell [iδ, (i+1)δ]
      G_l = mean of (u - y_i)^{H'-3/2} over the outer cell m = i + l, restricted to
            u > y_i; y_i = (i+½)δ, so the range is [(l-½)δ, (l+½)δ] clipped at 0

    All three are closed forms; G_0 integrates the singular end exactly.
    """
    Hp = params.Hprime
    idx = np.arange(n_cells + 1, dtype=float)

    b = Hp + 0.5
    U = delta ** (Hp - 0.5) * np.diff(idx**b) / b

    e = 1.5 - Hp
    Y = delta ** (0.5 - Hp) * np.diff(idx**e) / e

    a = Hp - 0.5
    lag = np.arange(n_cells, dtype=float)
    G = delta ** (Hp - 1.5) * ((lag + 0.5) ** a - np.maximum(lag - 0.5, 0.0) ** a) / a
    return U, G, Y


def lattice_kernel_matrix(
    params: HurstParams, c_Hprime: float, delta: float, n_cells: int
) -> np.ndarray:
    """F[m, i] = c_{H'} U_m G_{m-i} Y_i for i <= m, zero above the diagonal."""
    U, G, Y = lattice_factors(params, delta, n_cells)
    lag = np.subtract.outer(np.arange(n_cells), np.arange(n_cells))
    F = c_Hprime * np.outer(U, Y) * G[np.clip(lag, 0, None)]
    F[lag < 0] = 0.0
    return F


def lattice_pair_sums(F: np.ndarray, delta: float, n_cells: int) -> tuple[float, float]:
    """
    (far, near) = (Σ_{|i-j|>=2} A_ij², Σ_{|i-j|=1} A_ij²) for the first ``n_cells``
    cells, A = δ FᵀF restricted to outer cells m < n_cells.
    """
    Fk = F[:n_cells, :n_cells]
    A = delta * (Fk.T @ Fk)
    total = float(np.sum(A * A))
    diag = float(np.sum(np.diag(A) ** 2))
    near = 2.0 * float(np.sum(np.diag(A, 1) ** 2))
    return total - diag - near, near


def lattice_rosenblatt_variance(
    params: HurstParams,
    c_Hprime: float,
    d_H: float,
    delta: float,
    n_cells: int,
    neighbor_weight: float = 1.0,
) -> float:
    """
    Exact variance of the lattice Rosenblatt value after ``n_cells`` steps.

    Z = d Σ_{i≠j} w_ij A_ij ΔB_i ΔB_j with A = δ FᵀF and w_ij = neighbor_weight
    for |i-j| = 1, 1 otherwise; Var Z = 2 δ² d² Σ_{i≠j} w_ij² A_ij².
    """
    F = lattice_kernel_matrix(params, c_Hprime, delta, n_cells)
    far, near = lattice_pair_sums(F, delta, n_cells)
    return 2.0 * delta * delta * d_H * d_H * (far + neighbor_weight**2 * near)


def fbm_kernel_norm(params: HurstParams) -> float:
    """∫_0^1 (s^{1/2-H'} ∫_s^1 (u-s)^{H'-3/2} u^{H'-1/2} du)² ds, i.e. E(B^{H'}_1)² at c_{H'} = 1."""
    Hp = params.Hprime

    def inner(s: float) -> float:
        if s >= 1.0:
            return 0.0
        return _kernel_integral(Hp, 1.0, s) ** 2

    # s^{1-2H'} is the algebraic weight at the left end
    value, _ = integrate.quad(
        inner, 0.0, 1.0, weight="alg", wvar=(1.0 - 2.0 * Hp, 0.0),
        epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
    )
    return value


def calibrate_constants(params: HurstParams, points_per_unit: int) -> KernelConstants:
    """
    Calibrate c_{H'}, the nearest-neighbour weight and d(H) on a lattice with
    ``points_per_unit`` cells per unit time.

    c_{H'}:          E(B^{H'}_1)² = 1 for the continuum kernel, by quadrature.
    neighbor_weight: the lattice sum drops every within-cell pair; the nearest
                     off-diagonal pairs carry that mass, weighted so that
                     Var(Z_2) / Var(Z_{1/2}) = 4^{2H} exactly on the lattice.
    d(H):            lattice Var(Z_1) = 1.
    Every step is a closed-form scale solve; the result is checked before returning.
    """
    if int(points_per_unit) != points_per_unit or points_per_unit < MIN_POINTS_PER_UNIT:
        raise ValidationError(
            f"points_per_unit must be an integer >= {MIN_POINTS_PER_UNIT}, got {points_per_unit!r}"
        )
    points_per_unit = int(points_per_unit)
    delta = 1.0 / points_per_unit

    fbm_var = fbm_kernel_norm(params)
    if not np.isfinite(fbm_var) or fbm_var <= 0.0:
        raise CalibrationError(f"fBm kernel norm is {fbm_var!r}; cannot calibrate c_H'")
    c_Hprime = 1.0 / math.sqrt(fbm_var)

    k_lo, k_hi = points_per_unit // 2, 2 * points_per_unit
    F = lattice_kernel_matrix(params, c_Hprime, delta, k_hi)
    far_lo, near_lo = lattice_pair_sums(F, delta, k_lo)
    far_hi, near_hi = lattice_pair_sums(F, delta, k_hi)
    ratio = (k_hi / k_lo) ** (2.0 * params.H)
    w2 = (ratio * far_lo - far_hi) / (near_hi - ratio * near_lo)
    if not np.isfinite(w2) or w2 <= 0.0:
        raise CalibrationError(f"neighbour weight² solves to {w2!r}; lattice too coarse")
    neighbor_weight = math.sqrt(w2)

    far, near = lattice_pair_sums(F, delta, points_per_unit)
    raw_var = 2.0 * delta * delta * (far + w2 * near)
    if not np.isfinite(raw_var) or raw_var <= 0.0:
        raise CalibrationError(f"lattice Rosenblatt variance is {raw_var!r}; cannot calibrate d(H)")
    d_H = 1.0 / math.sqrt(raw_var)

    check = lattice_rosenblatt_variance(params, c_Hprime, d_H, delta, points_per_unit, neighbor_weight)
    if abs(check - 1.0) > 1e-10:
        raise CalibrationError(f"calibrated lattice Var(Z_1) = {check!r}, expected 1")

    logger.info(
        f"Calibrated H={params.H} at {points_per_unit} points/unit: "
        f"c_H'={c_Hprime:.12g}, d_H={d_H:.12g}, neighbor_weight={neighbor_weight:.12g}"
    )
    return KernelConstants(
        H=params.H,
        c_Hprime=c_Hprime,
        d_H=d_H,
        points_per_unit=points_per_unit,
        neighbor_weight=neighbor_weight,
    )


# ─────────────────────────────────────────────
# persistence
# ─────────────────────────────────────────────


def save_constants(consts: KernelConstants, path, force: bool = False):
    """Persist {H, Hprime, c_Hprime, d_H, neighbor_weight, points_per_unit, grid_delta} as JSON."""
    from .artifacts import write_json_atomic

    return write_json_atomic(path, consts.to_dict(), force=force)


def load_constants(path) -> KernelConstants:
    from .artifacts import load_json

    return KernelConstants.from_dict(load_json(path))
