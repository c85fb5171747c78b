"""Experiment orchestration: rank sweeps, scaling studies, MC validation.

Configs are flat key=value text files ('#' starts a comment); every key
has a default matching the standard demonstration setup (100x100 array,
rank-16 harmonic spectrum, lam=10, all write variances 0.05, input
variance 3). Emission is deterministic: same config and seed give
byte-identical CSV or JSON.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .analysis import (
    baseline_error_analytic,
    budget_feasible,
    lambda_max,
    optimal_beta,
    optimize_rank,
    optimize_repetitions,
)
from .core import SUPPORTED_DISTS, DeviceParams
from .lowrank import factor_lr, svd
from .matrixgen import harmonic_matrix
from .montecarlo import compare, run_baseline_trials, run_two_step_trials
from .rng import MASK64, child_seed, child_stream
from .schemes import NoiseSpec, SchemeConfig

# sub-seed roles so every stage of an experiment owns a distinct stream
STREAM_MATRIX = 0
STREAM_SWEEP_MC = 1
STREAM_MC_BASELINE = 2
STREAM_MC_TWOSTEP = 3

SWEEP_SCHEMA = "# crossbar-lowrank sweep v1"
SCALING_SCHEMA = "# crossbar-lowrank scaling v1"
MC_SCHEMA = "# crossbar-lowrank mc v1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 100
    n: int = 100
    r: int = 16
    lam: float | str = 10.0           # "max" saturates the magnitude budget
    sigma_e_sq: float = 0.05
    sigma_L_sq: float = 0.05
    sigma_R_sq: float = 0.05
    sigma_b_sq: float = 3.0
    trials: int = 10000
    master_seed: int = 12345
    dist: str = "gaussian"
    rho: float = 1.0
    r_T: float = 1.0
    k_range: str | tuple[int, ...] = "all"
    # scaling-study knobs
    alpha: float = 1.0
    beta: float | str = "optimal"
    c1: float = 0.5
    c2: float = 1.0
    n_grid: tuple[int, ...] = (256, 512, 1024, 2048, 4096, 8192)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ConfigError(f"m and n must be positive, got {self.m}x{self.n}")
        if not 1 <= self.r <= min(self.m, self.n):
            raise ConfigError(f"r must be in [1, min(m, n)], got {self.r}")
        if self.lam != "max" and not float(self.lam) > 0:
            raise ConfigError(f"lambda must be positive or 'max', got {self.lam}")
        for name in ("sigma_e_sq", "sigma_L_sq", "sigma_R_sq"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if not self.sigma_b_sq > 0:
            raise ConfigError(f"sigma_b_sq must be positive, got {self.sigma_b_sq}")
        if self.trials < 0 or self.trials == 1:
            raise ConfigError(f"trials must be 0 (analytic only) or >= 2, got {self.trials}")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.dist not in SUPPORTED_DISTS:
            raise ConfigError(f"dist must be one of {SUPPORTED_DISTS}, got {self.dist!r}")
        if not self.rho > 0 or not self.r_T > 0:
            raise ConfigError("rho and r_T must be positive")
        if self.k_range != "all":
            ks = self.k_range
            if not ks or any(not 1 <= k <= self.r for k in ks):
                raise ConfigError(f"k_range entries must lie in [1, r]=[1, {self.r}]")
            if list(ks) != sorted(set(ks)):
                raise ConfigError("k_range must be strictly increasing")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.beta != "optimal" and not 0 < float(self.beta) <= 1:
            raise ConfigError(f"beta must lie in (0, 1] or be 'optimal', got {self.beta}")
        if not 0 < self.c1 <= 1 or not 0 < self.c2 <= 1:
            raise ConfigError("c1 and c2 must lie in (0, 1]")
        if len(self.n_grid) < 2 or any(v < 2 for v in self.n_grid):
            raise ConfigError("n_grid needs at least two sizes >= 2")

    def device(self) -> DeviceParams:
        return DeviceParams(r_T=self.r_T, rho=self.rho)

    def noise(self) -> NoiseSpec:
        return NoiseSpec(sigma_e_sq=self.sigma_e_sq, sigma_L_sq=self.sigma_L_sq,
                         sigma_R_sq=self.sigma_R_sq, dist=self.dist)

    def resolved_lambda(self) -> float:
        if self.lam == "max":
            return lambda_max(self.m, self.n, self.device())
        return float(self.lam)

    def resolved_beta(self) -> float:
        if self.beta == "optimal":
            return optimal_beta(self.alpha)[0]
        return float(self.beta)

    def resolved_k_range(self) -> tuple[int, ...]:
        if self.k_range == "all":
            return tuple(range(1, self.r + 1))
        return tuple(self.k_range)


_INT_KEYS = {"m", "n", "r", "trials", "master_seed"}
_FLOAT_KEYS = {"sigma_e_sq", "sigma_L_sq", "sigma_R_sq", "sigma_b_sq",
               "rho", "r_T", "alpha", "c1", "c2"}


def parse_config_text(text: str) -> dict[str, str]:
    """key=value lines to a raw string mapping; '#' starts a comment."""
    raw: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected key=value, got {line.strip()!r}")
        key, value = body.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {line_no}: empty key or value")
        if key in raw:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _int_list(value: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in value.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated integer list, got {value!r}") from None


def config_from_mapping(raw: dict[str, str]) -> ExperimentConfig:
    kwargs: dict = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}") from None
        elif key == "lambda":
            kwargs["lam"] = "max" if value == "max" else _parse_float(value, "lambda")
        elif key == "beta":
            kwargs["beta"] = "optimal" if value == "optimal" else _parse_float(value, "beta")
        elif key == "dist":
            kwargs["dist"] = value
        elif key == "k_range":
            kwargs["k_range"] = "all" if value == "all" else _int_list(value, "k_range")
        elif key == "n_grid":
            kwargs["n_grid"] = _int_list(value, "n_grid")
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return ExperimentConfig(**kwargs)


def _parse_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}") from None


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_mapping(parse_config_text(text))


def fit_loglog_slope(points) -> tuple[float, float, float]:
    """Ordinary least squares on (ln n, ln value): (slope, intercept, r_squared)."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points, got {len(pts)}")
    xs, ys = [], []
    for n, v in pts:
        if n <= 0 or v <= 0:
            raise ValueError(f"log-log fit needs positive values, got ({n}, {v})")
        xs.append(math.log(n))
        ys.append(math.log(v))
    xbar = math.fsum(xs) / len(xs)
    ybar = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - xbar) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("all n values coincide; slope undefined")
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    ss_res = math.fsum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = math.fsum((y - ybar) ** 2 for y in ys)
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r_squared


@dataclass(frozen=True)
class SweepRow:
    k: int
    t_L: int
    t_R: int
    feasible: bool
    analytic_total: float | None
    analytic_truncation: float | None
    analytic_stage1: float | None
    analytic_stage2: float | None
    analytic_accumulated: float | None
    mc_mean: float | None
    mc_stderr: float | None
    baseline_analytic: float
    normalized: float | None


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    argmin_k: int | None
    lam_resolved: float
    config: ExperimentConfig


def run_sweep(config: ExperimentConfig, lanes: int = 1) -> SweepResult:
    """Per-k comparison of the two-step scheme against the baseline.

    One harmonic target matrix is generated for the whole sweep; each k
    gets budget-optimal repetitions, the closed-form breakdown, and
    (when trials > 0) a Monte Carlo estimate from its own seed lineage.
    Infeasible k values are emitted flagged instead of aborting.
    """
    lam = config.resolved_lambda()
    A = harmonic_matrix(config.m, config.n, config.r, lam,
                        child_stream(config.master_seed, STREAM_MATRIX))
    s = svd(A)
    noise = config.noise()
    baseline = baseline_error_analytic(config.m, config.n,
                                       config.sigma_e_sq, config.sigma_b_sq)
    rows: list[SweepRow] = []
    best: SweepRow | None = None
    for k in config.resolved_k_range():
        if not budget_feasible(config.m, config.n, k, 1, 1):
            rows.append(SweepRow(
                k=k, t_L=0, t_R=0, feasible=False,
                analytic_total=None, analytic_truncation=None,
                analytic_stage1=None, analytic_stage2=None,
                analytic_accumulated=None, mc_mean=None, mc_stderr=None,
                baseline_analytic=baseline, normalized=None,
            ))
            continue
        t_L, t_R, bd = optimize_repetitions(s.singulars, config.m, config.n,
                                            k, noise, config.sigma_b_sq)
        mc_mean = mc_stderr = None
        if config.trials > 0:
            f = factor_lr(s, k)
            cfg = SchemeConfig(m=config.m, n=config.n, k=k, t_L=t_L, t_R=t_R,
                               noise=noise, sigma_b_sq=config.sigma_b_sq)
            res = run_two_step_trials(
                f, A, cfg, config.trials,
                child_seed(config.master_seed, STREAM_SWEEP_MC, k), lanes)
            mc_mean, mc_stderr = res.mean_sq_error, res.std_error
        row = SweepRow(
            k=k, t_L=t_L, t_R=t_R, feasible=True,
            analytic_total=bd.total, analytic_truncation=bd.truncation,
            analytic_stage1=bd.stage1_noise, analytic_stage2=bd.stage2_noise,
            analytic_accumulated=bd.accumulated,
            mc_mean=mc_mean, mc_stderr=mc_stderr,
            baseline_analytic=baseline, normalized=bd.total / baseline,
        )
        rows.append(row)
        if best is None or row.analytic_total < best.analytic_total:
            best = row
    return SweepResult(rows=rows, argmin_k=None if best is None else best.k,
                       lam_resolved=lam, config=config)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    r: int
    k: int
    t_L: int
    t_R: int
    analytic_total: float
    analytic_truncation: float
    analytic_stage1: float
    analytic_stage2: float
    analytic_accumulated: float
    baseline_analytic: float
    normalized: float


@dataclass(frozen=True)
class ScalingResult:
    rows: list[ScalingRow]
    slope_total: float
    intercept_total: float
    r_squared_total: float
    slope_baseline: float
    intercept_baseline: float
    r_squared_baseline: float
    beta_resolved: float
    config: ExperimentConfig


def _check_geometric(grid: tuple[int, ...]) -> None:
    if len(grid) < 4:
        raise ConfigError(f"scaling grid needs at least 4 sizes, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("scaling grid must be strictly increasing")
    ratio = grid[1] / grid[0]
    if ratio <= 1:
        raise ConfigError("scaling grid must grow geometrically")
    for a, b in zip(grid, grid[1:]):
        if abs(b / a - ratio) > 0.01 * ratio:
            raise ConfigError(
                f"scaling grid must be geometrically spaced; step {a}->{b} "
                f"breaks the ratio {ratio:g}"
            )


def run_scaling(config: ExperimentConfig) -> ScalingResult:
    """Analytic error growth along n with r = floor(c2*n^alpha) and
    k = max(1, floor(c1*r^beta)); lam saturates the magnitude budget at
    every size. Emits per-n rows plus fitted log-log slopes."""
    _check_geometric(config.n_grid)
    beta = config.resolved_beta()
    dev = config.device()
    noise = config.noise()
    rows: list[ScalingRow] = []
    for n in config.n_grid:
        r = min(n, max(1, math.floor(config.c2 * n ** config.alpha)))
        k = min(r, max(1, math.floor(config.c1 * r ** beta)))
        lam = lambda_max(n, n, dev)
        singulars = lam / np.arange(1, r + 1)
        t_L, t_R, bd = optimize_repetitions(singulars, n, n, k, noise,
                                            config.sigma_b_sq)
        baseline = baseline_error_analytic(n, n, config.sigma_e_sq, config.sigma_b_sq)
        rows.append(ScalingRow(
            n=n, r=r, k=k, t_L=t_L, t_R=t_R,
            analytic_total=bd.total, analytic_truncation=bd.truncation,
            analytic_stage1=bd.stage1_noise, analytic_stage2=bd.stage2_noise,
            analytic_accumulated=bd.accumulated,
            baseline_analytic=baseline, normalized=bd.total / baseline,
        ))
    slope_t, icept_t, r2_t = fit_loglog_slope([(row.n, row.analytic_total) for row in rows])
    slope_b, icept_b, r2_b = fit_loglog_slope([(row.n, row.baseline_analytic) for row in rows])
    return ScalingResult(rows=rows, slope_total=slope_t, intercept_total=icept_t,
                         r_squared_total=r2_t, slope_baseline=slope_b,
                         intercept_baseline=icept_b, r_squared_baseline=r2_b,
                         beta_resolved=beta, config=config)


@dataclass(frozen=True)
class McRow:
    scheme: str
    k: int | None
    t_L: int | None
    t_R: int | None
    trials: int
    mean_sq_error: float
    std_error: float
    analytic: float
    z: float
    passed: bool


@dataclass(frozen=True)
class McResult:
    rows: list[McRow]
    all_passed: bool
    lam_resolved: float
    config: ExperimentConfig


def run_mc(config: ExperimentConfig, lanes: int = 1) -> McResult:
    """Monte Carlo vs analytic for one config: the baseline scheme plus
    the two-step scheme at each k in k_range (or at the overall optimal
    k when k_range is 'all')."""
    if config.trials < 2:
        raise ConfigError(f"mc needs trials >= 2, got {config.trials}")
    lam = config.resolved_lambda()
    A = harmonic_matrix(config.m, config.n, config.r, lam,
                        child_stream(config.master_seed, STREAM_MATRIX))
    s = svd(A)
    noise = config.noise()
    rows: list[McRow] = []

    base_analytic = baseline_error_analytic(config.m, config.n,
                                            config.sigma_e_sq, config.sigma_b_sq)
    base_res = run_baseline_trials(A, noise, config.sigma_b_sq, config.trials,
                                   child_seed(config.master_seed, STREAM_MC_BASELINE),
                                   lanes)
    z, ok = compare(base_res, base_analytic)
    rows.append(McRow(scheme="baseline", k=None, t_L=None, t_R=None,
                      trials=base_res.trials, mean_sq_error=base_res.mean_sq_error,
                      std_error=base_res.std_error, analytic=base_analytic,
                      z=z, passed=ok))

    if config.k_range == "all":
        ks = [optimize_rank(s.singulars, config.m, config.n, noise,
                            config.sigma_b_sq, config.r)[0]]
    else:
        ks = list(config.resolved_k_range())
    for k in ks:
        t_L, t_R, bd = optimize_repetitions(s.singulars, config.m, config.n,
                                            k, noise, config.sigma_b_sq)
        f = factor_lr(s, k)
        cfg = SchemeConfig(m=config.m, n=config.n, k=k, t_L=t_L, t_R=t_R,
                           noise=noise, sigma_b_sq=config.sigma_b_sq)
        res = run_two_step_trials(f, A, cfg, config.trials,
                                  child_seed(config.master_seed, STREAM_MC_TWOSTEP, k),
                                  lanes)
        z, ok = compare(res, bd.total)
        rows.append(McRow(scheme="two_step", k=k, t_L=t_L, t_R=t_R,
                          trials=res.trials, mean_sq_error=res.mean_sq_error,
                          std_error=res.std_error, analytic=bd.total, z=z, passed=ok))
    return McResult(rows=rows, all_passed=all(r.passed for r in rows),
                    lam_resolved=lam, config=config)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _config_comment(config: ExperimentConfig, lam: float) -> str:
    c = config
    return ("# config "
            f"m={c.m} n={c.n} r={c.r} lambda={_fmt(lam)} "
            f"sigma_e_sq={_fmt(c.sigma_e_sq)} sigma_L_sq={_fmt(c.sigma_L_sq)} "
            f"sigma_R_sq={_fmt(c.sigma_R_sq)} sigma_b_sq={_fmt(c.sigma_b_sq)} "
            f"dist={c.dist} rho={_fmt(c.rho)} r_T={_fmt(c.r_T)} "
            f"trials={c.trials} seed={c.master_seed}")


_SWEEP_FIELDS = ("k", "t_L", "t_R", "feasible", "analytic_total",
                 "analytic_truncation", "analytic_stage1", "analytic_stage2",
                 "analytic_accumulated", "mc_mean", "mc_stderr",
                 "baseline_analytic", "normalized")
_SCALING_FIELDS = ("n", "r", "k", "t_L", "t_R", "analytic_total",
                   "analytic_truncation", "analytic_stage1", "analytic_stage2",
                   "analytic_accumulated", "baseline_analytic", "normalized")
_MC_FIELDS = ("scheme", "k", "t_L", "t_R", "trials", "mean_sq_error",
              "std_error", "analytic", "z", "passed")


def _csv_rows(rows, fields) -> list[str]:
    out = [",".join("pass" if f == "passed" else f for f in fields)]
    for row in rows:
        cells = []
        for f in fields:
            v = getattr(row, f)
            cells.append(v if isinstance(v, str) else _fmt(v))
        out.append(",".join(cells))
    return out


def sweep_csv(result: SweepResult) -> str:
    lines = [SWEEP_SCHEMA, _config_comment(result.config, result.lam_resolved)]
    lines.extend(_csv_rows(result.rows, _SWEEP_FIELDS))
    lines.append(sweep_summary(result))
    return "\n".join(lines) + "\n"


def sweep_summary(result: SweepResult) -> str:
    if result.argmin_k is None:
        return "# argmin none (no feasible k)"
    row = next(r for r in result.rows if r.k == result.argmin_k)
    return (f"# argmin k={row.k} t_L={row.t_L} t_R={row.t_R} "
            f"normalized={_fmt(row.normalized)}")


def scaling_csv(result: ScalingResult) -> str:
    c = result.config
    head = ("# config "
            f"alpha={_fmt(c.alpha)} beta={_fmt(result.beta_resolved)} "
            f"c1={_fmt(c.c1)} c2={_fmt(c.c2)} "
            f"sigma_L_sq={_fmt(c.sigma_L_sq)} sigma_R_sq={_fmt(c.sigma_R_sq)} "
            f"sigma_e_sq={_fmt(c.sigma_e_sq)} sigma_b_sq={_fmt(c.sigma_b_sq)} "
            f"rho={_fmt(c.rho)} r_T={_fmt(c.r_T)}")
    lines = [SCALING_SCHEMA, head]
    lines.extend(_csv_rows(result.rows, _SCALING_FIELDS))
    lines.append(f"# fit_total slope={_fmt(result.slope_total)} "
                 f"intercept={_fmt(result.intercept_total)} "
                 f"r_squared={_fmt(result.r_squared_total)}")
    lines.append(f"# fit_baseline slope={_fmt(result.slope_baseline)} "
                 f"intercept={_fmt(result.intercept_baseline)} "
                 f"r_squared={_fmt(result.r_squared_baseline)}")
    return "\n".join(lines) + "\n"


def mc_csv(result: McResult) -> str:
    lines = [MC_SCHEMA, _config_comment(result.config, result.lam_resolved)]
    lines.extend(_csv_rows(result.rows, _MC_FIELDS))
    lines.append(f"# all_passed={_fmt(result.all_passed)}")
    return "\n".join(lines) + "\n"


def _row_dicts(rows, fields) -> list[dict]:
    return [{f: getattr(row, f) for f in fields} for row in rows]


def _config_dict(config: ExperimentConfig) -> dict:
    d = dataclasses.asdict(config)
    d["k_range"] = list(config.resolved_k_range())
    d["n_grid"] = list(config.n_grid)
    return d


def sweep_json(result: SweepResult) -> str:
    doc = {
        "schema": SWEEP_SCHEMA.lstrip("# "),
        "config": _config_dict(result.config),
        "lambda_resolved": result.lam_resolved,
        "rows": _row_dicts(result.rows, _SWEEP_FIELDS),
        "argmin_k": result.argmin_k,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def scaling_json(result: ScalingResult) -> str:
    doc = {
        "schema": SCALING_SCHEMA.lstrip("# "),
        "config": _config_dict(result.config),
        "beta_resolved": result.beta_resolved,
        "rows": _row_dicts(result.rows, _SCALING_FIELDS),
        "fit_total": {"slope": result.slope_total,
                      "intercept": result.intercept_total,
                      "r_squared": result.r_squared_total},
        "fit_baseline": {"slope": result.slope_baseline,
                         "intercept": result.intercept_baseline,
                         "r_squared": result.r_squared_baseline},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def mc_json(result: McResult) -> str:
    doc = {
        "schema": MC_SCHEMA.lstrip("# "),
        "config": _config_dict(result.config),
        "lambda_resolved": result.lam_resolved,
        "rows": _row_dicts(result.rows, _MC_FIELDS),
        "all_passed": result.all_passed,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
