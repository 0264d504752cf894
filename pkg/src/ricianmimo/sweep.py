"""
Parameter sweeps over the antenna count or the log-normal spread.

Each sweep point rebuilds the statistics from the scenario with one field
changed and reuses the same per-trial seeds, so neighbouring points share
random numbers. Points are independent work items; results are sorted
before writing, so the CSV does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import asymptotic_rate, asymptotic_report
from .detection import DETECTORS
from .metrics import SimulationContext, rate_summary, simulate_sinr
from .scenario import ConfigError, ScenarioConfig

CSV_FIELDS = ("axis", "detector", "cell", "user", "rate_mean", "rate_ci95",
              "rate_asymptotic", "trials", "seed", "assumption2_margin", "warning")
AXES = ("n", "sigma")
DEFAULT_N = (32, 64, 128, 256, 512)
DEFAULT_SIGMA = (0.0, 1.0, 2.0, 4.0, 6.0, 8.0)
MARGIN_TOL = 1e-12


@dataclass(frozen=True)
class SweepRow:
    axis: float
    detector: str
    cell: int
    user: int
    rate_mean: float
    rate_ci95: float
    rate_asymptotic: float
    trials: int
    seed: int
    assumption2_margin: float
    warning: str = ""

    def sort_key(self):
        return (self.axis, self.detector, self.cell, self.user)


def point_config(config: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    if axis == "n":
        return config.replace(N=int(value))
    if axis == "sigma":
        if config.corr_model.kind != "lognormal_diag":
            raise ConfigError("a sigma sweep needs the lognormal_diag correlation model")
        return config.replace(sigma_c=float(value))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def evaluate_point(config: ScenarioConfig, axis: str, value: float,
                   detectors=DETECTORS, trials: int = 1000) -> list[SweepRow]:
    """Asymptotic (and, for ``trials > 0``, empirical) rates of every user at one point."""
    cfg = point_config(config, axis, value)
    ctx = SimulationContext.build(cfg, detectors)
    report = asymptotic_report(ctx.est, detectors)
    gamma = simulate_sinr(ctx, trials, detectors) if trials > 0 else None
    rows = []
    for det in detectors:
        asy = asymptotic_rate(report.gamma_bar[det], cfg.prelog)
        if gamma is not None:
            mean, ci = rate_summary(gamma[det], cfg.prelog)
        for j, k in np.ndindex(cfg.L, cfg.K):
            margin = float(report.assumption2_margin[j, k])
            warn = []
            if margin <= MARGIN_TOL:
                warn.append("assumption2_margin=0")
            if det == "mmmse" and (j, k) in report.errors:
                warn.append("asymptotic_refused")
            if np.isinf(report.gamma_bar[det][j, k]):
                warn.append("infinite_sinr_capped")
            rows.append(SweepRow(
                axis=float(value), detector=det, cell=j, user=k,
                rate_mean=float(mean[j, k]) if gamma is not None else math.nan,
                rate_ci95=float(ci[j, k]) if gamma is not None else math.nan,
                rate_asymptotic=float(asy[j, k]), trials=trials, seed=cfg.base_seed,
                assumption2_margin=margin, warning=";".join(warn)))
    return rows


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(config: ScenarioConfig, axis: str, values, detectors=DETECTORS,
              trials: int = 1000, workers: int = 1) -> list[SweepRow]:
    """Evaluate every sweep point, optionally in a process pool; rows come back sorted."""
    values = list(values)
    if not values:
        raise ConfigError("sweep axis list is empty")
    if trials < 0:
        raise ConfigError("trials must be >= 0")
    unknown = set(detectors) - set(DETECTORS)
    if unknown:
        raise ConfigError(f"unknown detectors {sorted(unknown)}")
    for v in values:
        point_config(config, axis, v)
    jobs = [(config, axis, v, tuple(detectors), trials) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate, jobs))
    else:
        chunks = [_evaluate(job) for job in jobs]
    rows = [row for chunk in chunks for row in chunk]
    return sorted(rows, key=SweepRow.sort_key)


def run_scenario1(config: ScenarioConfig, antennas=DEFAULT_N, detectors=DETECTORS,
                  trials: int = 1000, workers: int = 1) -> list[SweepRow]:
    """Rates versus the antenna count under exponential correlation."""
    if config.corr_model.kind != "exponential":
        raise ConfigError("scenario I needs the exponential correlation model")
    return run_sweep(config, "n", antennas, detectors, trials, workers)


def run_scenario2(config: ScenarioConfig, sigmas=DEFAULT_SIGMA, detectors=DETECTORS,
                  trials: int = 1000, workers: int = 1) -> list[SweepRow]:
    """Rates versus the log-normal spread at fixed ``N`` (200 by default)."""
    if config.corr_model.kind != "lognormal_diag":
        raise ConfigError("scenario II needs the lognormal_diag correlation model")
    return run_sweep(config, "sigma", sigmas, detectors, trials, workers)


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(x, ".10g")


def write_csv(rows, path, unit: str = "nats") -> None:
    """Write rows with rates in ``unit`` ("nats" or "bits")."""
    if unit not in ("nats", "bits"):
        raise ConfigError("unit must be 'nats' or 'bits'")
    scale = 1.0 / math.log(2.0) if unit == "bits" else 1.0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in sorted(rows, key=SweepRow.sort_key):
            writer.writerow([
                _fmt(r.axis), r.detector, r.cell, r.user,
                _fmt(r.rate_mean * scale), _fmt(r.rate_ci95 * scale),
                _fmt(r.rate_asymptotic * scale), r.trials, r.seed,
                _fmt(r.assumption2_margin), r.warning,
            ])


def read_csv(path) -> list[dict]:
    """Read a sweep CSV back as dicts with numeric fields parsed (empty -> nan)."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            for key in ("axis", "rate_mean", "rate_ci95", "rate_asymptotic", "assumption2_margin"):
                rec[key] = float(rec[key]) if rec[key] != "" else math.nan
            for key in ("cell", "user", "trials", "seed"):
                rec[key] = int(rec[key])
            out.append(rec)
    return out
