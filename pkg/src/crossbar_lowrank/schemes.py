"""The two competing noisy computation schemes.

Baseline: program A on one m x n array and compute c' = b (A + E) in a
single shot, E being the additive write noise of that array.

Two-step: program L on t_L replicated m x k arrays and R on t_R
replicated k x n arrays. Stage 1 averages b (L + E_L_i) over the t_L
replicas; stage 2 multiplies the averaged intermediate by (R + E_R_j)
and averages over the t_R replicas. Replication divides each stage's
noise variance by its repetition count at the cost of devices, subject
to the budget t_L*m*k + t_R*n*k <= m*n.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import SUPPORTED_DISTS, as_vector, iid_entries, vmm_exact
from .lowrank import LrFactors


@dataclass(frozen=True)
class NoiseSpec:
    """Write-noise variances for the baseline array and the two stages."""

    sigma_e_sq: float = 0.0
    sigma_L_sq: float = 0.0
    sigma_R_sq: float = 0.0
    dist: str = "gaussian"

    def __post_init__(self):
        for name in ("sigma_e_sq", "sigma_L_sq", "sigma_R_sq"):
            v = getattr(self, name)
            if v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")
        if self.dist not in SUPPORTED_DISTS:
            raise ValueError(
                f"unsupported distribution {self.dist!r}; expected one of {SUPPORTED_DISTS}"
            )


@dataclass(frozen=True)
class SchemeConfig:
    """Dimensions, rank, repetitions and variances of one two-step setup."""

    m: int
    n: int
    k: int
    t_L: int
    t_R: int
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    sigma_b_sq: float = 1.0

    def __post_init__(self):
        for name in ("m", "n", "k", "t_L", "t_R"):
            v = getattr(self, name)
            if v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.k > min(self.m, self.n):
            raise ValueError(f"k={self.k} exceeds min(m, n)={min(self.m, self.n)}")
        used = self.t_L * self.m * self.k + self.t_R * self.n * self.k
        if used > self.m * self.n:
            raise ValueError(
                f"memristor budget violated: t_L*m*k + t_R*n*k = {used} "
                f"> m*n = {self.m * self.n}"
            )
        if not self.sigma_b_sq > 0:
            raise ValueError(f"sigma_b_sq must be positive, got {self.sigma_b_sq}")


def sample_noise(rows: int, cols: int, sigma_sq: float, dist: str,
                 rng: np.random.Generator) -> np.ndarray:
    """One additive write-noise realization for a rows x cols array."""
    if rows < 1 or cols < 1:
        raise ValueError(f"noise dimensions must be positive, got {rows}x{cols}")
    return iid_entries((rows, cols), sigma_sq, dist, rng)


def baseline_noisy_vmm(b, A, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """One-shot noisy product c' = b (A + E), E freshly sampled per call."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={A.ndim}")
    E = sample_noise(A.shape[0], A.shape[1], noise.sigma_e_sq, noise.dist, rng)
    return vmm_exact(b, A + E)


def two_step_vmm(b, f: LrFactors, t_L: int, t_R: int, noise: NoiseSpec,
                 rng: np.random.Generator) -> np.ndarray:
    """Two-step averaged product through the L and R replica arrays.

    Samples all t_L + t_R noise matrices fresh and mutually independent.
    A zero-variance stage takes the exact deterministic path and leaves
    the stream untouched.
    """
    b = as_vector(b)
    m, k = f.L.shape
    k2, n = f.R.shape
    if b.shape[0] != m:
        raise ValueError(f"dimension mismatch: b has length {b.shape[0]}, L is {m}x{k}")
    if k2 != k:
        raise ValueError(f"factor mismatch: L is {m}x{k}, R is {k2}x{n}")
    if t_L < 1 or t_R < 1:
        raise ValueError(f"repetition counts must be >= 1, got t_L={t_L}, t_R={t_R}")
    if noise.sigma_L_sq == 0:
        c_mid = b @ f.L
    else:
        E_L = iid_entries((t_L, m, k), noise.sigma_L_sq, noise.dist, rng)
        c_mid = np.matmul(b, f.L + E_L).mean(axis=0)
    if noise.sigma_R_sq == 0:
        return c_mid @ f.R
    E_R = iid_entries((t_R, k, n), noise.sigma_R_sq, noise.dist, rng)
    return np.matmul(c_mid, f.R + E_R).mean(axis=0)
