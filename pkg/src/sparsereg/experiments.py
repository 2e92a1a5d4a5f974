"""Phase-diagram sweeps over sample size, method, and seed.

Each trial draws a fresh truth vector and instance from a per-trial seed
``derive_key(master_seed, "trial", n_index, seed_index)``, so results do
not depend on which methods run, in what order, or on how the work is
scheduled across processes.  Rows are gathered and sorted by
``(n, seed, method)`` before writing, which makes the CSV byte-stable: a
rerun with the same grid reproduces it exactly.

Wall-clock timings are measured per trial but written as an empty field by
default, precisely because they are the one column a rerun cannot
reproduce; pass ``include_runtime=True`` to :func:`records_to_csv` to keep
them at the cost of byte stability.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lasso import LassoConfig, lambda_threshold, solve_lasso
from .lsa import default_init, run_lsa
from .model import Dimensions, gen_instance, recovery_report, sample_beta_star, thresholds
from .rng import derive_key

CSV_HEADER = (
    "seed,n,p,k,sigma2,method,lambda,l2_error,support_exact,overlap,"
    "stable,iterations,runtime_ms,error"
)

_METHODS = ("lasso", "lasso_box", "lsa")
_LAMBDA_RULES = ("fixed", "lambda_star", "lambda_threshold")


@dataclass(frozen=True)
class GridSpec:
    p: int
    k: int
    sigma2: float
    n_values: tuple[int, ...]
    methods: tuple[str, ...]
    lambda_rule: str = "lambda_star"
    lambda_value: float | None = None
    lambda_A: float = 3.0
    seeds: int = 1
    master_seed: int = 0
    stability_C: float = 1.0
    lasso_tol: float = 1e-6
    lasso_max_sweeps: int = 100_000
    lsa_init: str = "random_support"
    lsa_max_iters: int = 1_000_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.n_values:
            raise ValueError("n_values must be nonempty")
        if any(n <= self.k for n in self.n_values):
            raise ValueError("every n must exceed k")
        if not self.methods or any(m not in _METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {_METHODS}")
        if self.lambda_rule not in _LAMBDA_RULES:
            raise ValueError(f"lambda_rule must be one of {_LAMBDA_RULES}")
        if self.lambda_rule == "fixed" and self.lambda_value is None:
            raise ValueError("lambda_rule 'fixed' needs lambda_value")
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    n: int
    p: int
    k: int
    sigma2: float
    method: str
    lam: float | None
    l2_error: float | None
    support_exact: bool | None
    overlap: int | None
    stable: bool | None
    iterations: int | None
    runtime_ms: float | None
    error: str = ""


def trial_seed(master_seed: int, n_index: int, seed_index: int) -> int:
    """Per-trial 64-bit seed; shared by all methods of the trial."""
    return derive_key(master_seed, "trial", n_index, seed_index)


def _lambda_for(grid: GridSpec, dims: Dimensions) -> float:
    if grid.lambda_rule == "fixed":
        return float(grid.lambda_value)
    if grid.lambda_rule == "lambda_star":
        return thresholds(dims).lambda_star(grid.lambda_A, dims.sigma)
    return lambda_threshold(dims)


def run_trial(grid: GridSpec, n_index: int, seed_index: int) -> list[TrialRecord]:
    """All method rows for one (n, seed) cell; failures become error rows."""
    n = grid.n_values[n_index]
    tseed = trial_seed(grid.master_seed, n_index, seed_index)
    dims = Dimensions(n=n, p=grid.p, k=grid.k, sigma2=grid.sigma2)
    beta_star = sample_beta_star(grid.p, grid.k, "binary", seed=derive_key(tseed, "beta"))
    instance = gen_instance(dims, beta_star, seed=derive_key(tseed, "instance"))
    records = []
    for method in grid.methods:
        lam: float | None = None
        started = time.perf_counter()
        try:
            if method in ("lasso", "lasso_box"):
                lam = _lambda_for(grid, dims)
                config = LassoConfig(
                    lam=lam,
                    box=(method == "lasso_box"),
                    tol=grid.lasso_tol,
                    max_sweeps=grid.lasso_max_sweeps,
                )
                res = solve_lasso(instance.X, instance.Y, config)
                beta_hat = res.beta_hat
                iterations = res.sweeps
            else:
                beta0 = default_init(
                    instance.X,
                    instance.Y,
                    grid.k,
                    mode=grid.lsa_init,
                    seed=derive_key(tseed, "init"),
                )
                res = run_lsa(
                    instance.X,
                    instance.Y,
                    beta0,
                    sigma2=grid.sigma2,
                    k=grid.k,
                    max_iters=grid.lsa_max_iters,
                )
                beta_hat = res.beta_hat
                iterations = res.iterations
            elapsed_ms = (time.perf_counter() - started) * 1e3
            report = recovery_report(beta_hat, beta_star, dims.sigma, grid.stability_C)
            records.append(
                TrialRecord(
                    seed=tseed,
                    n=n,
                    p=grid.p,
                    k=grid.k,
                    sigma2=grid.sigma2,
                    method=method,
                    lam=lam,
                    l2_error=report.l2_error,
                    support_exact=report.support_exact,
                    overlap=report.overlap,
                    stable=report.stable,
                    iterations=iterations,
                    runtime_ms=elapsed_ms,
                )
            )
        except Exception as exc:  # noqa: BLE001 - grid runs never abort on one trial
            elapsed_ms = (time.perf_counter() - started) * 1e3
            records.append(
                TrialRecord(
                    seed=tseed,
                    n=n,
                    p=grid.p,
                    k=grid.k,
                    sigma2=grid.sigma2,
                    method=method,
                    lam=lam,
                    l2_error=None,
                    support_exact=None,
                    overlap=None,
                    stable=None,
                    iterations=None,
                    runtime_ms=elapsed_ms,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return records


def _run_trial_task(args: tuple[GridSpec, int, int]) -> list[TrialRecord]:
    return run_trial(*args)


def run_phase_grid(grid: GridSpec, threads: int = 1) -> list[TrialRecord]:
    """All trials of the grid, serial or on a share-nothing process pool.

    The output ordering (by n, then per-trial seed, then method) is fixed
    regardless of execution schedule.
    """
    tasks = [
        (grid, ni, si)
        for ni in range(len(grid.n_values))
        for si in range(grid.seeds)
    ]
    if threads <= 1:
        chunks = [_run_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_trial_task, tasks))
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.n, r.seed, r.method))
    return records


def _fmt(value, kind: str) -> str:
    if value is None:
        return ""
    if kind == "float":
        return repr(float(value))
    if kind == "bool":
        return "true" if value else "false"
    return str(value)


def record_to_row(record: TrialRecord, include_runtime: bool = False) -> str:
    error = record.error.replace(",", ";").replace("\n", " ")
    cells = [
        _fmt(record.seed, "int"),
        _fmt(record.n, "int"),
        _fmt(record.p, "int"),
        _fmt(record.k, "int"),
        _fmt(record.sigma2, "float"),
        record.method,
        _fmt(record.lam, "float"),
        _fmt(record.l2_error, "float"),
        _fmt(record.support_exact, "bool"),
        _fmt(record.overlap, "int"),
        _fmt(record.stable, "bool"),
        _fmt(record.iterations, "int"),
        _fmt(record.runtime_ms, "float") if include_runtime else "",
        error,
    ]
    return ",".join(cells)


def records_to_csv(records: Sequence[TrialRecord], path, include_runtime: bool = False) -> None:
    lines = [CSV_HEADER]
    lines.extend(record_to_row(r, include_runtime) for r in records)
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class SummaryRow:
    n: int
    method: str
    trials: int
    failures: int
    support_rate: float
    stable_rate: float
    median_l2: float
    failure_lower_bound: float


def summarize(
    records: Sequence[TrialRecord], stability_C: float | None = None
) -> list[SummaryRow]:
    """Per-(n, method) success rates and medians, with the failure envelope.

    The last column is ``exp(k log p / (5n)) * sigma``, the lower bound that
    the l2 error of the penalized solvers is expected to exceed in the
    undersampled regime; it is reported for overlay, never asserted.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[int, str], list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.n, rec.method), []).append(rec)
    rows = []
    for (n, method), recs in sorted(groups.items()):
        ok = [r for r in recs if not r.error]
        k, p, sigma2 = recs[0].k, recs[0].p, recs[0].sigma2
        sigma = math.sqrt(sigma2)
        if ok:
            errors = np.array([r.l2_error for r in ok])
            support_rate = float(np.mean([r.support_exact for r in ok]))
            if stability_C is None:
                stable_rate = float(np.mean([r.stable for r in ok]))
            else:
                stable_rate = float(np.mean(errors <= stability_C * sigma))
            median_l2 = float(np.median(errors))
        else:
            support_rate = stable_rate = median_l2 = math.nan
        rows.append(
            SummaryRow(
                n=n,
                method=method,
                trials=len(recs),
                failures=len(recs) - len(ok),
                support_rate=support_rate,
                stable_rate=stable_rate,
                median_l2=median_l2,
                failure_lower_bound=math.exp(k * math.log(p) / (5.0 * n)) * sigma,
            )
        )
    return rows


def render_summary(rows: Sequence[SummaryRow]) -> str:
    header = f"{'n':>7} {'method':<10} {'trials':>6} {'support':>8} {'stable':>7} {'med_l2':>10} {'fail_lb':>9}"
    out = [header]
    for r in rows:
        out.append(
            f"{r.n:>7} {r.method:<10} {r.trials:>6} {r.support_rate:>8.3f} "
            f"{r.stable_rate:>7.3f} {r.median_l2:>10.4g} {r.failure_lower_bound:>9.4g}"
        )
    return "\n".join(out)


# --- key=value grid configs -------------------------------------------------

_CONFIG_KEYS = [f.name for f in fields(GridSpec)]


def parse_config(text: str, overrides: dict | None = None) -> GridSpec:
    """Parse a line-based ``key = value`` grid config.

    Blank lines and ``#`` comments are ignored; unknown keys are rejected.
    ``overrides`` (e.g. from CLI flags) take precedence over file values.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        raw[key] = value
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            raw[key] = value if isinstance(value, str) else _dump_value(key, value)
    kwargs: dict = {}
    for key, value in raw.items():
        kwargs[key] = _parse_value(key, value)
    missing = {"p", "k", "sigma2", "n_values", "methods"} - kwargs.keys()
    if missing:
        raise ValueError(f"config is missing required keys: {sorted(missing)}")
    return GridSpec(**kwargs)


def _parse_value(key: str, value: str):
    if key in ("p", "k", "seeds", "master_seed", "lasso_max_sweeps", "lsa_max_iters"):
        return int(value)
    if key in ("sigma2", "lambda_A", "stability_C", "lasso_tol"):
        return float(value)
    if key == "lambda_value":
        return None if value in ("", "none") else float(value)
    if key == "n_values":
        return tuple(int(tok) for tok in value.replace(",", " ").split())
    if key == "methods":
        return tuple(tok for tok in value.replace(",", " ").split())
    return value


def _dump_value(key: str, value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(grid: GridSpec) -> str:
    lines = [f"{key} = {_dump_value(key, getattr(grid, key))}" for key in _CONFIG_KEYS]
    return "\n".join(lines) + "\n"
