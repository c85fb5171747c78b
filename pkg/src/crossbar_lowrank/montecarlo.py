"""Reproducible Monte Carlo estimation of expected computation errors.

Each trial owns two private child streams derived from (master_seed,
trial_index, role): one for the input vector, one for the write noise.
Per-trial squared errors land in a trial-indexed buffer and the final
reduction is a fixed-order compensated sum, so the result is bit-identical
for any number of execution lanes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import as_matrix, sample_input
from .lowrank import LrFactors
from .rng import child_stream
from .schemes import NoiseSpec, SchemeConfig, baseline_noisy_vmm, two_step_vmm

ROLE_INPUT = 0
ROLE_NOISE = 1

Z_PASS_LIMIT = 4.0


@dataclass(frozen=True)
class TrialBatchResult:
    trials: int
    mean_sq_error: float
    std_error: float
    master_seed: int
    scheme_label: str


def _run_striped(trials: int, lanes: int, trial_fn: Callable[[int], float]) -> np.ndarray:
    buf = np.empty(trials)

    def fill(lo: int, hi: int) -> None:
        for t in range(lo, hi):
            buf[t] = trial_fn(t)

    if lanes <= 1:
        fill(0, trials)
    else:
        # disjoint contiguous stripes; placement never affects values
        bounds = [trials * i // lanes for i in range(lanes + 1)]
        with ThreadPoolExecutor(max_workers=lanes) as pool:
            futures = [pool.submit(fill, bounds[i], bounds[i + 1]) for i in range(lanes)]
            for fut in futures:
                fut.result()
    return buf


def _reduce(errors: np.ndarray, master_seed: int, label: str) -> TrialBatchResult:
    trials = errors.shape[0]
    mean = math.fsum(errors) / trials
    var = math.fsum((e - mean) ** 2 for e in errors) / (trials - 1)
    se = math.sqrt(var / trials)
    return TrialBatchResult(
        trials=trials,
        mean_sq_error=mean,
        std_error=se,
        master_seed=master_seed,
        scheme_label=label,
    )


def run_baseline_trials(A, noise: NoiseSpec, sigma_b_sq: float, trials: int,
                        master_seed: int, lanes: int = 1) -> TrialBatchResult:
    """Empirical mean of ||b(A+E) - bA||^2 over per-trial fresh (b, E)."""
    if trials < 2:
        raise ValueError(f"need at least 2 trials for a standard error, got {trials}")
    A = as_matrix(A)
    m = A.shape[0]

    def trial(t: int) -> float:
        b = sample_input(m, sigma_b_sq, noise.dist, child_stream(master_seed, t, ROLE_INPUT))
        out = baseline_noisy_vmm(b, A, noise, child_stream(master_seed, t, ROLE_NOISE))
        d = out - b @ A
        return float(d @ d)

    errors = _run_striped(trials, lanes, trial)
    return _reduce(errors, master_seed, "baseline")


def run_two_step_trials(f: LrFactors, A, cfg: SchemeConfig, trials: int,
                        master_seed: int, lanes: int = 1) -> TrialBatchResult:
    """Empirical mean of ||c'' - bA||^2; the error is against the exact
    product with the full matrix, so truncation cost is included."""
    if trials < 2:
        raise ValueError(f"need at least 2 trials for a standard error, got {trials}")
    A = as_matrix(A)
    if f.L.shape != (cfg.m, cfg.k) or f.R.shape != (cfg.k, cfg.n):
        raise ValueError(
            f"factor shapes {f.L.shape}/{f.R.shape} do not match config "
            f"m={cfg.m}, n={cfg.n}, k={cfg.k}"
        )
    if A.shape != (cfg.m, cfg.n):
        raise ValueError(f"matrix shape {A.shape} does not match config {(cfg.m, cfg.n)}")

    def trial(t: int) -> float:
        b = sample_input(cfg.m, cfg.sigma_b_sq, cfg.noise.dist,
                         child_stream(master_seed, t, ROLE_INPUT))
        out = two_step_vmm(b, f, cfg.t_L, cfg.t_R, cfg.noise,
                           child_stream(master_seed, t, ROLE_NOISE))
        d = out - b @ A
        return float(d @ d)

    errors = _run_striped(trials, lanes, trial)
    return _reduce(errors, master_seed, "two_step")


def compare(result: TrialBatchResult, analytic: float) -> tuple[float, bool]:
    """z-score of the empirical mean against the analytic value.

    Passes at |z| <= 4. A zero standard error passes only on exact
    agreement; any discrepancy then yields an infinite z and a fail.
    """
    if result.std_error == 0:
        if result.mean_sq_error == analytic:
            return 0.0, True
        return math.copysign(math.inf, result.mean_sq_error - analytic), False
    z = (result.mean_sq_error - analytic) / result.std_error
    return z, abs(z) <= Z_PASS_LIMIT
