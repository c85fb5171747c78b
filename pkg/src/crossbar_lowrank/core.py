"""Crossbar computation model: ideal VMM, conductance map, magnitude budget.

A target matrix A is realized on the crossbar as conductances
g[j, k] = r_T * a[j, k]; the array computes the row-vector product
c = b A in one analog step. Device technology caps the total programmed
magnitude: sum(g**2) <= m * n * rho for an m x n array.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SUPPORTED_DISTS = ("gaussian", "uniform")


@dataclass(frozen=True)
class DeviceParams:
    """Crossbar device parameters.

    r_T: feedback resistance of the readout stage (ohms).
    rho: per-cell mean-square conductance budget (siemens squared).
    """

    r_T: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if not self.r_T > 0:
            raise ValueError(f"r_T must be positive, got {self.r_T}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


class MagnitudeCheck(NamedTuple):
    satisfied: bool
    total: float
    budget: float


def as_matrix(A) -> np.ndarray:
    """Validate and return A as a finite 2-D float64 array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"matrix dimensions must be positive, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def as_vector(b) -> np.ndarray:
    """Validate and return b as a finite 1-D float64 array."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise ValueError(f"expected a 1-D row vector, got ndim={b.ndim}")
    if b.shape[0] < 1:
        raise ValueError("row vector must have positive length")
    if not np.all(np.isfinite(b)):
        raise ValueError("vector entries must be finite")
    return b


def vmm_exact(b, A) -> np.ndarray:
    """Ideal vector-matrix product c = b A (the noiseless crossbar output)."""
    b = as_vector(b)
    A = as_matrix(A)
    if b.shape[0] != A.shape[0]:
        raise ValueError(
            f"dimension mismatch: b has length {b.shape[0]}, A is "
            f"{A.shape[0]}x{A.shape[1]}"
        )
    return b @ A


def conductance_map(A, dev: DeviceParams) -> np.ndarray:
    """Conductances that realize A on the array: g = r_T * a."""
    return dev.r_T * as_matrix(A)


def magnitude_check(A, dev: DeviceParams) -> MagnitudeCheck:
    """Total programmed magnitude sum(g**2) against the budget m*n*rho.

    Boundary equality counts as satisfied.
    """
    G = conductance_map(A, dev)
    total = float(np.sum(G * G))
    budget = float(G.shape[0] * G.shape[1] * dev.rho)
    return MagnitudeCheck(total <= budget, total, budget)


def iid_entries(shape, sigma_sq: float, dist: str, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. zero-mean entries with variance sigma_sq.

    sigma_sq = 0 returns zeros without consuming any randomness, so a
    noiseless stage leaves the stream untouched.
    """
    if sigma_sq < 0:
        raise ValueError(f"variance must be nonnegative, got {sigma_sq}")
    if dist not in SUPPORTED_DISTS:
        raise ValueError(f"unsupported distribution {dist!r}; expected one of {SUPPORTED_DISTS}")
    if sigma_sq == 0:
        return np.zeros(shape)
    if dist == "gaussian":
        return np.sqrt(sigma_sq) * rng.standard_normal(shape)
    # uniform on [-w, w] has variance w^2/3
    w = np.sqrt(3.0 * sigma_sq)
    return rng.uniform(-w, w, size=shape)


def sample_input(m: int, sigma_b_sq: float, dist: str, rng: np.random.Generator) -> np.ndarray:
    """Random input row vector with i.i.d. zero-mean entries of variance sigma_b_sq."""
    if m < 1:
        raise ValueError(f"input length must be positive, got {m}")
    if not sigma_b_sq > 0:
        raise ValueError(f"input variance must be positive, got {sigma_b_sq}")
    return iid_entries(m, sigma_b_sq, dist, rng)
