"""
Rosenblatt sample paths on a uniform lattice, built from the second-chaos
(double Wiener-Itô) representation.

Two generators share one lattice and one noise stream:
  - rosenblatt_path_fast: square-of-first-chaos form with the realized diagonal
    removed and the nearest-neighbour pairs reweighted; the cell-averaged kernel is
    Toeplitz in (m - i) up to row/column scalings, so every sum is a discrete
    convolution (O(N log N)).
  - rosenblatt_path_bruteforce: the weighted off-diagonal double sum itself,
    O(N^3), kept as an oracle for small lattices.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, signal, special

from .artifacts import write_csv_atomic
from .errors import DomainError, LengthMismatchError, SizeLimitError, ValidationError
from .kernel import HurstParams, KernelConstants, lattice_factors, lattice_kernel_matrix

logger = logging.getLogger("rou_lab.rosenblatt")

BRUTEFORCE_MAX_CELLS = 512
MAX_SEED = 2**64 - 1

GridFunction = np.ndarray | Callable[[np.ndarray], np.ndarray]


# ─────────────────────────────────────────────
# driving Brownian noise
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class BrownianLattice:
    """Brownian increments ΔB_i on cells [iδ, (i+1)δ], i = 0..N-1."""

    delta: float
    increments: np.ndarray
    seed: int

    @property
    def n_cells(self) -> int:
        return int(self.increments.size)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.delta


def _check_seed(seed: int) -> int:
    if int(seed) != seed or not (0 <= seed <= MAX_SEED):
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def brownian_increments(seed: int, start: int, count: int, delta: float) -> np.ndarray:
    """
    Increments ``start .. start+count-1`` of the stream keyed by ``seed``.

    Each increment owns one Philox counter block (increment i uses counter i+1),
    so any slice is reproducible regardless of which slices were drawn before.
    The first 64-bit word of the block becomes a uniform in (0, 1) and is mapped
    through the inverse normal CDF.
    """
    seed = _check_seed(seed)
    if start < 0 or count < 0:
        raise ValidationError(f"start and count must be non-negative, got {start}, {count}")
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValidationError(f"delta must be a positive finite number, got {delta!r}")
    if count == 0:
        return np.empty(0)
    bit_gen = np.random.Philox(counter=int(start), key=seed)
    words = bit_gen.random_raw(4 * count).reshape(count, 4)[:, 0]
    uniforms = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return special.ndtri(uniforms) * math.sqrt(delta)


def generate_brownian(n_points: int, delta: float, seed: int) -> BrownianLattice:
    """Lattice with ``n_points`` grid times (``n_points - 1`` increments) from ``seed``."""
    if int(n_points) != n_points or n_points < 2:
        raise ValidationError(f"n_points must be an integer >= 2, got {n_points!r}")
    increments = brownian_increments(seed, 0, int(n_points) - 1, delta)
    return BrownianLattice(delta=float(delta), increments=increments, seed=int(seed))


# ─────────────────────────────────────────────
# Rosenblatt paths
# ─────────────────────────────────────────────


@dataclass(frozen=True)
class RosenblattPath:
    times: np.ndarray
    values: np.ndarray
    hurst: HurstParams
    consts: KernelConstants

    @property
    def delta(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def _check_lattice(lattice: BrownianLattice, hurst: HurstParams, consts: KernelConstants) -> None:
    consts.check_hurst(hurst)
    consts.check_resolution(lattice.delta)
    if lattice.n_cells < 1:
        raise ValidationError("lattice needs at least one increment")
    if not np.all(np.isfinite(lattice.increments)):
        raise ValidationError("lattice increments must be finite")


def _causal_convolve(kernel: np.ndarray, x: np.ndarray) -> np.ndarray:
    # out[m] = Σ_{i<=m} kernel[m-i] x[i]
    return signal.convolve(kernel, x, mode="full", method="auto")[: x.size]


def rosenblatt_path_fast(
    lattice: BrownianLattice, hurst: HurstParams, consts: KernelConstants
) -> RosenblattPath:
    """
    Z_{t_k} = d_H Σ_{m<k} δ (W_m² − D_m + 2(ν − 1) N_m), with F = c U_m G_{m-i} Y_i and
    W_m = Σ_i F_mi ΔB_i, D_m = Σ_i F_mi² ΔB_i², N_m = Σ_i F_mi F_m,i+1 ΔB_i ΔB_{i+1}.
    """
    _check_lattice(lattice, hurst, consts)
    delta = lattice.delta
    n = lattice.n_cells
    U, G, Y = lattice_factors(hurst, delta, n)
    yxi = Y * lattice.increments
    row_scale = consts.c_Hprime * U

    pair = np.zeros(n)
    pair[:-1] = yxi[:-1] * yxi[1:]
    GG = np.zeros(n)
    GG[1:] = G[1:] * G[:-1]

    W = row_scale * _causal_convolve(G, yxi)
    D = row_scale**2 * _causal_convolve(G * G, yxi * yxi)
    N = row_scale**2 * _causal_convolve(GG, pair)

    values = np.empty(n + 1)
    values[0] = 0.0
    values[1:] = consts.d_H * delta * np.cumsum(W * W - D + 2.0 * (consts.neighbor_weight - 1.0) * N)
    return RosenblattPath(times=lattice.times, values=values, hurst=hurst, consts=consts)


def pair_weights(n_cells: int, neighbor_weight: float) -> np.ndarray:
    """w_ij: 0 on the diagonal, ``neighbor_weight`` for |i-j| = 1, 1 elsewhere."""
    lag = np.abs(np.subtract.outer(np.arange(n_cells), np.arange(n_cells)))
    w = np.ones((n_cells, n_cells))
    w[lag == 1] = neighbor_weight
    w[lag == 0] = 0.0
    return w


def rosenblatt_path_bruteforce(
    lattice: BrownianLattice, hurst: HurstParams, consts: KernelConstants
) -> RosenblattPath:
    """Weighted off-diagonal double sum Z_k = d_H Σ_{i≠j} w_ij A_k[i, j] ΔB_i ΔB_j."""
    if lattice.n_cells > BRUTEFORCE_MAX_CELLS:
        raise SizeLimitError(
            f"brute-force generator is O(N^3); N={lattice.n_cells} exceeds {BRUTEFORCE_MAX_CELLS}"
        )
    _check_lattice(lattice, hurst, consts)
    delta = lattice.delta
    n = lattice.n_cells
    xi = lattice.increments
    F = lattice_kernel_matrix(hurst, consts.c_Hprime, delta, n)
    w = pair_weights(n, consts.neighbor_weight)

    A = np.zeros((n, n))
    values = np.zeros(n + 1)
    for k in range(1, n + 1):
        row = F[k - 1]
        A += delta * np.outer(row, row)
        values[k] = consts.d_H * (xi @ (A * w) @ xi)
    return RosenblattPath(times=lattice.times, values=values, hurst=hurst, consts=consts)


# ─────────────────────────────────────────────
# covariance and Wiener-Rosenblatt integrals
# ─────────────────────────────────────────────


def covariance_oracle(hurst: HurstParams, s: float, t: float) -> float:
    """E[Z_s Z_t] = ½(t^{2H} + s^{2H} − |t−s|^{2H})."""
    if s < 0.0 or t < 0.0:
        raise DomainError(f"covariance_oracle requires s, t >= 0, got s={s!r}, t={t!r}")
    two_h = 2.0 * hurst.H
    return 0.5 * (t**two_h + s**two_h - abs(t - s) ** two_h)


def _on_grid(g: GridFunction, times: np.ndarray) -> np.ndarray:
    values = np.asarray(g(times) if callable(g) else g, dtype=float)
    if values.ndim == 0:
        values = np.full(times.shape, float(values))
    if values.shape != times.shape:
        raise LengthMismatchError(
            f"grid function has {values.size} values, path has {times.size} grid times"
        )
    return values


def wiener_rosenblatt_integral(g: GridFunction, path: RosenblattPath) -> float:
    """Forward sum Σ_k g(t_k) (Z_{t_{k+1}} − Z_{t_k}) for deterministic g."""
    g_vals = _on_grid(g, path.times)
    return float(np.dot(g_vals[:-1], np.diff(path.values)))


def isometry_inner_product(
    hurst: HurstParams,
    g: Callable[[float], float],
    h: Callable[[float], float],
    t: float = 1.0,
) -> float:
    """
    H(2H−1) ∫_0^t ∫_0^t g(u) h(v) |u−v|^{2H−2} dv du.

    The inner integral is split at v = u and handed to QUADPACK's algebraic
    weight so the |u−v|^{2H−2} singularity is integrated exactly.
    """
    if t <= 0.0:
        raise DomainError(f"isometry_inner_product requires t > 0, got {t!r}")
    H = hurst.H
    expo = 2.0 * H - 2.0

    def inner(u: float) -> float:
        left = right = 0.0
        if u > 0.0:
            left, _ = integrate.quad(h, 0.0, u, weight="alg", wvar=(0.0, expo), epsabs=1e-12, epsrel=1e-10)
        if u < t:
            right, _ = integrate.quad(h, u, t, weight="alg", wvar=(expo, 0.0), epsabs=1e-12, epsrel=1e-10)
        return g(u) * (left + right)

    outer, _ = integrate.quad(inner, 0.0, t, epsabs=1e-11, epsrel=1e-9, limit=200)
    return H * (2.0 * H - 1.0) * outer


# ─────────────────────────────────────────────
# export
# ─────────────────────────────────────────────


def write_path_csv(path: RosenblattPath, file: Path, force: bool = False) -> Path:
    return write_csv_atomic(file, ["t", "z"], zip(path.times, path.values), force=force)
