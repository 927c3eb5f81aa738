"""Observables evaluated on statevectors, plus the DFT of time series."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import spin_ops
from .engine import apply_single_site, num_sites
from .spin_ops import MAGNETIC_NUMBERS

ENTROPY_BASE = "e"


@dataclass
class TimeSeries:
    steps: np.ndarray
    values: np.ndarray
    label: str = ""

    @property
    def stride(self) -> int:
        return int(self.steps[1] - self.steps[0]) if len(self.steps) > 1 else 1


@dataclass
class Spectrum:
    omega: np.ndarray
    magnitudes: np.ndarray

    @property
    def omega_over_2pi(self) -> np.ndarray:
        return self.omega / (2 * np.pi)


@dataclass
class QfiResult:
    """Per-axis F_Q^l = 4 Var(J_l), their sum, and f_Q = F_Q / 8L."""

    per_axis: dict[str, float]
    L: int

    @property
    def total(self) -> float:
        return float(sum(self.per_axis.values()))

    @property
    def scaled(self) -> float:
        return self.total / (8 * self.L)


def site_probabilities(psi: np.ndarray) -> np.ndarray:
    L = num_sites(psi)
    return (np.abs(psi) ** 2).reshape((3,) * L)


def site_magnetizations(psi: np.ndarray) -> np.ndarray:
    """⟨S^z_j⟩ for every site."""
    probs = site_probabilities(psi)
    L = probs.ndim
    out = np.empty(L)
    for j in range(L):
        marginal = probs.sum(axis=tuple(k for k in range(L) if k != j))
        out[j] = marginal @ MAGNETIC_NUMBERS
    return out


@lru_cache(maxsize=16)
def _total_magnetization_diagonal(L: int) -> np.ndarray:
    total = np.zeros(1)
    for _ in range(L):
        total = (total[:, None] + MAGNETIC_NUMBERS[None, :]).reshape(-1)
    return total


def mean_magnetization(psi: np.ndarray) -> float:
    """Site average of ⟨S^z_j⟩."""
    L = num_sites(psi)
    return float(np.abs(psi) ** 2 @ _total_magnetization_diagonal(L)) / L


def zz_correlation(psi: np.ndarray, i: int, j: int) -> float:
    """Bare correlator ⟨S^z_i S^z_j⟩ (0-based sites, i < j)."""
    probs = site_probabilities(psi)
    L = probs.ndim
    if not 0 <= i < j < L:
        raise IndexError(f"need 0 <= i < j < L, got i={i}, j={j}, L={L}")
    pair = probs.sum(axis=tuple(k for k in range(L) if k not in (i, j)))
    return float(MAGNETIC_NUMBERS @ pair @ MAGNETIC_NUMBERS)


def overlap(psi: np.ndarray, phi: np.ndarray) -> float:
    """Fidelity |⟨φ|ψ⟩|²."""
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    return float(abs(np.vdot(phi, psi)) ** 2)


def schmidt_values(psi: np.ndarray, cut: int | None = None) -> np.ndarray:
    L = num_sites(psi)
    cut = L // 2 if cut is None else cut
    return np.linalg.svd(psi.reshape(3**cut, -1), compute_uv=False)


def entropy_from_schmidt(s: np.ndarray, cutoff: float = 1e-12) -> float:
    p = s[s > cutoff] ** 2
    p = p / p.sum()
    # clamp rounding below zero (a product state gives -0.0 otherwise)
    return max(float(-np.sum(p * np.log(p))), 0.0)


def half_chain_entropy(psi: np.ndarray, cut: int | None = None) -> float:
    """Von Neumann entropy (natural log) of sites [0, cut); default cut is L // 2."""
    return entropy_from_schmidt(schmidt_values(psi, cut))


def collective_apply(psi: np.ndarray, axis: str) -> np.ndarray:
    """J_axis |ψ⟩ with J = Σ_i S^axis_i."""
    op = spin_ops.spin_matrix(axis)
    out = np.zeros_like(psi)
    for site in range(num_sites(psi)):
        out += apply_single_site(psi, op, site)
    return out


def qfi(psi: np.ndarray) -> QfiResult:
    L = num_sites(psi)
    per_axis = {}
    for axis in ("x", "y"):
        j_psi = collective_apply(psi, axis)
        mean = np.vdot(psi, j_psi).real
        per_axis[axis] = 4.0 * (np.vdot(j_psi, j_psi).real - mean**2)
    # J_z is diagonal: its variance follows from basis probabilities
    jz = np.zeros((3,) * L)
    for grid in np.meshgrid(*([MAGNETIC_NUMBERS] * L), indexing="ij"):
        jz += grid
    probs = np.abs(psi) ** 2
    jz = jz.reshape(-1)
    mean = probs @ jz
    per_axis["z"] = 4.0 * (probs @ jz**2 - mean**2)
    per_axis = {k: max(float(v), 0.0) for k, v in per_axis.items()}
    return QfiResult(per_axis=per_axis, L=L)


def scaled_qfi(psi: np.ndarray) -> float:
    return qfi(psi).scaled


def multipartite_bound(k: int, L: int | None = None) -> float:
    """Ceiling of f_Q for k-producible spin-1 states, (k + 1) / 2.

    Per block of k sites Σ_l Var(J_l) ≤ ⟨J²⟩ ≤ k(k + 1), which gives
    F_Q ≤ 4L(k + 1).
    """
    if k < 1 or (L is not None and k > L):
        raise ValueError(f"block size must satisfy 1 <= k <= L, got k={k}, L={L}")
    return (k + 1) / 2.0


def dft(series) -> Spectrum:
    """|1/N Σ_n x_n e^{-i ω_k n}| on ω_k = 2πk/N; accepts a TimeSeries or array."""
    values = np.asarray(series.values if isinstance(series, TimeSeries) else series)
    n = values.size
    if n < 2:
        raise ValueError("series needs at least two samples")
    mags = np.abs(np.fft.fft(values)) / n
    return Spectrum(omega=2 * np.pi * np.arange(n) / n, magnitudes=mags)
