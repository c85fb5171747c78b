"""Reproducible generation of matrices with prescribed singular values."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DeviceParams
from .analysis import lambda_max


@dataclass(frozen=True)
class SingularProfile:
    """Prescribed singular spectrum: harmonic lam/i or an explicit list."""

    kind: str
    r: int
    lam: float | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("harmonic", "explicit"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.r < 1:
            raise ValueError(f"rank must be positive, got {self.r}")
        if self.kind == "harmonic":
            if self.lam is None or not self.lam > 0:
                raise ValueError(f"harmonic profile needs lam > 0, got {self.lam}")
        else:
            if not self.values:
                raise ValueError("explicit profile needs a nonempty value list")
            if len(self.values) != self.r:
                raise ValueError(
                    f"explicit profile length {len(self.values)} != r = {self.r}"
                )
            vals = self.values
            if any(v <= 0 for v in vals):
                raise ValueError("explicit singular values must be positive")
            if any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
                raise ValueError("explicit singular values must be nonincreasing")

    @classmethod
    def harmonic(cls, lam: float, r: int) -> "SingularProfile":
        return cls(kind="harmonic", r=r, lam=lam)

    @classmethod
    def explicit(cls, values) -> "SingularProfile":
        vals = tuple(float(v) for v in values)
        return cls(kind="explicit", r=len(vals), values=vals)

    def resolve(self) -> np.ndarray:
        if self.kind == "harmonic":
            return self.lam / np.arange(1, self.r + 1)
        return np.asarray(self.values, dtype=float)


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random orthogonal matrix from QR of an i.i.d. Gaussian square.

    Each column's sign is fixed so the orthogonal factor's diagonal is
    nonnegative, making the output deterministic per stream (dim=1
    always yields [[1]]).
    """
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.where(np.diag(Q) < 0, -1.0, 1.0)
    return Q * signs


def prescribed_matrix(m: int, n: int, profile: SingularProfile,
                      rng: np.random.Generator) -> np.ndarray:
    """m x n matrix with exactly the profile's singular values.

    Built as U_r diag(s) V_r' from independent random orthogonal factors,
    so the spectrum is exact up to orthogonalization round-off.
    """
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got {m}x{n}")
    if profile.r > min(m, n):
        raise ValueError(f"rank {profile.r} exceeds min(m, n) = {min(m, n)}")
    sigma = profile.resolve()
    U = random_orthogonal(m, rng)[:, :profile.r]
    V = random_orthogonal(n, rng)[:, :profile.r]
    return (U * sigma) @ V.T


def harmonic_matrix(m: int, n: int, r: int, lam: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Member of the harmonic class: rank r, singular values lam/i."""
    return prescribed_matrix(m, n, SingularProfile.harmonic(lam, r), rng)


def harmonic_matrix_at_max(m: int, n: int, r: int, dev: DeviceParams,
                           rng: np.random.Generator) -> np.ndarray:
    """Harmonic matrix saturating the magnitude budget's lam ceiling."""
    return harmonic_matrix(m, n, r, lambda_max(m, n, dev), rng)
