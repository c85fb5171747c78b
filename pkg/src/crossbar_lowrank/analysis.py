"""Closed-form expected errors, budget optimization, and asymptotic bounds.

All expectations are over the random input b (zero mean, covariance
sigma_b_sq * I) and the write-noise realizations. The baseline one-shot
scheme has expected squared error m*n*sigma_e_sq*sigma_b_sq regardless
of A. The two-step scheme's error splits into four additive parts:

  truncation   sigma_b_sq * sum_{i>k} s_i^2
  stage1_noise sigma_b_sq * (m * sigma_L_sq / t_L) * trace_k
  stage2_noise sigma_b_sq * (n * sigma_R_sq / t_R) * trace_k
  accumulated  sigma_b_sq * m*k*n * sigma_L_sq*sigma_R_sq / (t_L*t_R)

with trace_k = sum_{i<=k} s_i. The harmonic singular-value class
(s_i = lam/i) admits closed-form bounds on the trace and truncation
tail, and an asymptotic error expression in the array size n when the
rank and truncation level grow as r = c2*n^alpha, k = c1*r^beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DeviceParams
from .schemes import NoiseSpec

EULER_MASCHERONI = 0.5772156649015329


class InfeasibleBudgetError(ValueError):
    """No repetition assignment fits the memristor budget."""


@dataclass(frozen=True)
class ErrorBreakdown:
    """The four additive components of the two-step expected error."""

    truncation: float
    stage1_noise: float
    stage2_noise: float
    accumulated: float
    total: float


@dataclass(frozen=True)
class AsymptoticParams:
    """Growth-law parameters: rank r = c2*n^alpha, truncation k = c1*r^beta."""

    alpha: float
    beta: float
    c1: float
    c2: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "beta", "c1", "c2"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")


def baseline_error_analytic(m: int, n: int, sigma_e_sq: float, sigma_b_sq: float) -> float:
    """Expected squared error of the one-shot scheme: m*n*sigma_e_sq*sigma_b_sq."""
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got {m}x{n}")
    return m * n * sigma_e_sq * sigma_b_sq


def _breakdown(tail_sq: float, trace_k: float, m: int, n: int, k: int,
               t_L: int, t_R: int, sigma_L_sq: float, sigma_R_sq: float,
               sigma_b_sq: float) -> ErrorBreakdown:
    truncation = sigma_b_sq * tail_sq
    stage1 = sigma_b_sq * (m * sigma_L_sq / t_L) * trace_k
    stage2 = sigma_b_sq * (n * sigma_R_sq / t_R) * trace_k
    accumulated = sigma_b_sq * m * k * n * sigma_L_sq * sigma_R_sq / (t_L * t_R)
    return ErrorBreakdown(
        truncation=truncation,
        stage1_noise=stage1,
        stage2_noise=stage2,
        accumulated=accumulated,
        total=truncation + stage1 + stage2 + accumulated,
    )


def _tail_and_trace(singulars, k: int) -> tuple[float, float]:
    s = np.asarray(singulars, dtype=float)
    kk = min(k, s.shape[0])
    return float(np.sum(s[kk:] ** 2)), float(np.sum(s[:kk]))


def two_step_error_analytic(singulars, m: int, n: int, k: int, t_L: int, t_R: int,
                            sigma_L_sq: float, sigma_R_sq: float,
                            sigma_b_sq: float) -> ErrorBreakdown:
    """Expected squared error of the two-step scheme, split into components.

    singulars are the target's singular values in nonincreasing order;
    the truncation tail sums whatever values are available past k.
    """
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must be in [1, min(m, n)]=[1, {min(m, n)}], got {k}")
    if t_L < 1 or t_R < 1:
        raise ValueError(f"repetition counts must be >= 1, got t_L={t_L}, t_R={t_R}")
    if sigma_L_sq < 0 or sigma_R_sq < 0 or sigma_b_sq < 0:
        raise ValueError("variances must be nonnegative")
    tail_sq, trace_k = _tail_and_trace(singulars, k)
    return _breakdown(tail_sq, trace_k, m, n, k, t_L, t_R,
                      sigma_L_sq, sigma_R_sq, sigma_b_sq)


def budget_feasible(m: int, n: int, k: int, t_L: int, t_R: int) -> bool:
    """True iff t_L*m*k + t_R*n*k <= m*n."""
    return t_L * m * k + t_R * n * k <= m * n


def optimize_repetitions(singulars, m: int, n: int, k: int, noise: NoiseSpec,
                         sigma_b_sq: float) -> tuple[int, int, ErrorBreakdown]:
    """Best integer (t_L, t_R) for a fixed rank k under the memristor budget.

    Enumerates t_L over its full feasible range and fills t_R greedily
    with the remaining budget; the error is nonincreasing in t_R, so the
    greedy fill dominates any smaller t_R at the same t_L and the scan
    is exact. Ties prefer smaller t_L, then smaller t_R.
    """
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must be in [1, min(m, n)]=[1, {min(m, n)}], got {k}")
    if m * k + n * k > m * n:
        raise InfeasibleBudgetError(
            f"rank {k} does not fit the budget even at t_L=t_R=1: "
            f"mk+nk = {m * k + n * k} > mn = {m * n}"
        )
    tail_sq, trace_k = _tail_and_trace(singulars, k)
    best: tuple[int, int, ErrorBreakdown] | None = None
    t_L_hi = (m * n - n * k) // (m * k)
    for t_L in range(1, t_L_hi + 1):
        t_R = (m * n - t_L * m * k) // (n * k)
        bd = _breakdown(tail_sq, trace_k, m, n, k, t_L, t_R,
                        noise.sigma_L_sq, noise.sigma_R_sq, sigma_b_sq)
        if best is None or bd.total < best[2].total:
            best = (t_L, t_R, bd)
    assert best is not None
    return best


def optimize_rank(singulars, m: int, n: int, noise: NoiseSpec, sigma_b_sq: float,
                  k_max: int) -> tuple[int, int, int, ErrorBreakdown]:
    """Joint best (k, t_L, t_R) over k in [1, k_max]; ties prefer smaller k."""
    if not 1 <= k_max <= min(m, n):
        raise ValueError(f"k_max must be in [1, min(m, n)]=[1, {min(m, n)}], got {k_max}")
    best: tuple[int, int, int, ErrorBreakdown] | None = None
    for k in range(1, k_max + 1):
        if m * k + n * k > m * n:
            break  # larger k only gets worse
        t_L, t_R, bd = optimize_repetitions(singulars, m, n, k, noise, sigma_b_sq)
        if best is None or bd.total < best[3].total:
            best = (k, t_L, t_R, bd)
    if best is None:
        raise InfeasibleBudgetError(
            f"no rank fits the budget: m+n = {m + n} devices per unit rank "
            f"exceed mn = {m * n}"
        )
    return best


def harmonic_trace(lam: float, k: int) -> tuple[float, float]:
    """Exact trace sum_{i<=k} lam/i and its log-form upper bound.

    bound = lam * (ln k + gamma + 1/(2k)) with gamma the
    Euler-Mascheroni constant; bound >= exact for every k >= 1.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    exact = lam * math.fsum(1.0 / i for i in range(1, k + 1))
    bound = lam * (math.log(k) + EULER_MASCHERONI + 1.0 / (2.0 * k))
    return exact, bound


def tail_bound(lam: float, k: int, r: int) -> tuple[float, float | None]:
    """Exact truncation tail sum_{i=k+1..r} (lam/i)^2 and its bound.

    bound = lam^2 * (1/k - 1/r), valid for k >= 1; at k = 0 the bound is
    undefined and None is returned in its place.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k > r:
        raise ValueError(f"k must not exceed r, got k={k}, r={r}")
    exact = lam * lam * math.fsum(1.0 / (i * i) for i in range(k + 1, r + 1))
    if k == 0:
        return exact, None
    bound = lam * lam * (1.0 / k - 1.0 / r)
    return exact, bound


def asymptotic_bound(n: int, p: AsymptoticParams, sigma_L_sq: float,
                     sigma_R_sq: float, sigma_b_sq: float) -> float:
    """Closed-form error bound at array size n under the growth laws.

    Evaluated with real-valued k = c1*r^beta and r = c2*n^alpha (no
    flooring): truncation tail bound plus the stage-noise trace bounds
    plus the accumulated term, with repetition counts absorbed into the
    constants.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    ab = p.alpha * p.beta
    k_real = p.c1 * p.c2 ** p.beta * n ** ab
    r_real = p.c2 * n ** p.alpha
    term_trunc = p.lam ** 2 * (1.0 / k_real - 1.0 / r_real)
    term_stage = (4.0 * p.c1 * p.c2 ** p.beta * p.lam * (sigma_L_sq + sigma_R_sq)
                  * n ** ab * (ab * math.log(n) + 1.0 / (2.0 * k_real) + EULER_MASCHERONI))
    term_acc = (4.0 * p.c1 ** 3 * p.c2 ** (3.0 * p.beta) * n ** (3.0 * ab)
                * sigma_L_sq * sigma_R_sq)
    return sigma_b_sq * (term_trunc + term_stage + term_acc)


def optimal_beta(alpha: float) -> tuple[float, float]:
    """Best truncation exponent beta* = min(1, 1/(2 alpha)) and the
    resulting error growth exponent: 2 - alpha below alpha = 1/2, else 3/2."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    beta_star = min(1.0, 1.0 / (2.0 * alpha))
    exponent = 2.0 - alpha if alpha < 0.5 else 1.5
    return beta_star, exponent


def lambda_max(m: int, n: int, dev: DeviceParams) -> float:
    """Largest harmonic-class lam that always fits the magnitude budget.

    sum(g^2) = r_T^2 * lam^2 * sum 1/i^2 <= r_T^2 * lam^2 * pi^2/6, so
    lam up to sqrt(6*m*n*rho) / (pi*r_T) is safe for every rank.
    """
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got {m}x{n}")
    return math.sqrt(6.0 * m * n * dev.rho) / (math.pi * dev.r_T)
