"""
Per-realization SINR, ergodic rates and the Monte Carlo engine.

The SINR of every detector is evaluated with the conditional expectation
given the multi-cell estimates done in closed form: with
``Zm^-1 = I/rho_d + sum (R - Rtilde)`` the denominator is
``sum_{(l,i) != (j,k)} |g^H hhat_jli|^2 + g^H Zm^-1 g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel_stats import ChannelStatistics, build_statistics
from .detection import DETECTORS, build_zs, cell_combiners, zm_inverse
from .estimation import EstimateSet, EstimatorStats, estimate_all, prepare_estimator
from .linalg import hermitian_solve
from .sampling import (TAG_CHANNEL, TAG_TRAINING, ChannelRealization, sample_channel_batch,
                       sample_training_batch, trial_stream)
from .scenario import ScenarioConfig

Z95 = 1.959963984540054


class TrialError(RuntimeError):
    """A Monte Carlo trial failed; carries the trial index."""

    def __init__(self, trial: int, cause: Exception):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial
        self.cause = cause


def sinr_conditional(g: np.ndarray, estimates: EstimateSet, est: EstimatorStats,
                     rho_d: float | None, j: int, k: int) -> float:
    """SINR of combiner ``g`` for user ``k`` of cell ``j`` (zero for ``g = 0``)."""
    g = np.asarray(g)
    if not np.any(g):
        return 0.0
    Hj = estimates.all_cells(j)
    K = estimates.hhat.shape[-1]
    proj = np.abs(g.conj() @ Hj) ** 2
    own = j * K + k
    signal = proj[own]
    interference = proj.sum() - signal
    Zi = zm_inverse(est, j, rho_d)
    noise = (g.conj() @ Zi @ g).real
    return float(signal / (interference + noise))


def sinr_mmmse_direct(estimates: EstimateSet, est: EstimatorStats, rho_d: float | None,
                      j: int, k: int) -> float:
    """``hhat^H (sum_{(l,i) != (j,k)} hhat hhat^H + Zm^-1)^-1 hhat`` for ``hhat = hhat_jjk``."""
    Hj = estimates.all_cells(j)
    K = estimates.hhat.shape[-1]
    own = j * K + k
    h = Hj[:, own]
    others = np.delete(Hj, own, axis=1)
    B = others @ others.conj().T + zm_inverse(est, j, rho_d)
    return float((h.conj() @ hermitian_solve(B, h)).real)


def cell_sinrs(G: np.ndarray, estimates: EstimateSet, j: int) -> np.ndarray:
    """SINR of all ``K`` combiners (columns of ``G``) at BS ``j``."""
    Hj = estimates.all_cells(j)
    K = G.shape[1]
    P = np.abs(Hj.conj().T @ G) ** 2                     # (LK, K)
    signal = P[j * K + np.arange(K), np.arange(K)]
    interference = P.sum(axis=0) - signal
    Zi = estimates.est.Zm_inv[j]
    noise = np.einsum("nk,nm,mk->k", G.conj(), Zi, G).real
    denom = interference + noise
    out = np.zeros(K)
    nz = denom > 0
    out[nz] = signal[nz] / denom[nz]
    return out


@dataclass(frozen=True)
class SimulationContext:
    """Everything a trial needs, built once per sweep point."""

    config: ScenarioConfig
    stats: ChannelStatistics = field(repr=False)
    est: EstimatorStats = field(repr=False)
    zs_inv: tuple | None = field(default=None, repr=False)

    @classmethod
    def build(cls, config: ScenarioConfig, detectors=DETECTORS,
              stats: ChannelStatistics | None = None) -> "SimulationContext":
        stats = build_statistics(config) if stats is None else stats
        est = prepare_estimator(stats)
        zs_inv = None
        if "smmse" in detectors:
            zs_inv = tuple(build_zs(config.zs_mode, est, j, D_diag=config.D_diag,
                                    eps=config.zs_eps)[1] for j in range(config.L))
        return cls(config=config, stats=stats, est=est, zs_inv=zs_inv)


def draw_trial(ctx: SimulationContext, trial: int) -> tuple[ChannelRealization, np.ndarray]:
    """Channel realization and training observations ``(L, N, K)`` of one trial."""
    cfg = ctx.config
    H = sample_channel_batch(ctx.stats, trial_stream(cfg.base_seed, trial, TAG_CHANNEL), 1)[0]
    Y = sample_training_batch(H, cfg.tau, cfg.rho_tr,
                              trial_stream(cfg.base_seed, trial, TAG_TRAINING))
    return ChannelRealization(H=H, trial_index=trial), Y


def run_trial(ctx: SimulationContext, trial: int, detectors=DETECTORS) -> dict[str, np.ndarray]:
    """Sample, estimate, combine and return the ``(L, K)`` SINR table of each detector."""
    _, Y = draw_trial(ctx, trial)
    estimates = estimate_all(Y, ctx.est, scope="multi")
    L = ctx.config.L
    out = {}
    for det in detectors:
        gamma = np.empty((L, ctx.config.K))
        for j in range(L):
            G = cell_combiners(estimates, j, det, None if ctx.zs_inv is None else ctx.zs_inv[j])
            gamma[j] = cell_sinrs(G, estimates, j)
        out[det] = gamma
    return out


def simulate_sinr(ctx: SimulationContext, trials: int, detectors=DETECTORS,
                  first_trial: int = 0) -> dict[str, np.ndarray]:
    """Per-trial SINR arrays ``(trials, L, K)`` for each detector, in trial order."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    L, K = ctx.config.L, ctx.config.K
    out = {det: np.empty((trials, L, K)) for det in detectors}
    for t in range(trials):
        try:
            res = run_trial(ctx, first_trial + t, detectors)
        except Exception as exc:  # noqa: BLE001 - re-raised with the trial index
            raise TrialError(first_trial + t, exc) from exc
        for det in detectors:
            out[det][t] = res[det]
    return out


def rate_summary(gamma: np.ndarray, prelog: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean per-user rate ``prelog * E[log(1+gamma)]`` (nats) and its 95% half-width."""
    r = prelog * np.log1p(gamma)
    T = r.shape[0]
    mean = r.mean(axis=0)
    if T < 2:
        return mean, np.zeros_like(mean)
    return mean, Z95 * r.std(axis=0, ddof=1) / math.sqrt(T)


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-user empirical rates (nats) for one detector at one sweep point."""

    detector: str
    rate_mean: np.ndarray
    rate_ci95: np.ndarray
    gamma: np.ndarray = field(repr=False)
    trials: int = 0


def run_monte_carlo(config: ScenarioConfig, detector: str, trials: int = 1000,
                    ctx: SimulationContext | None = None) -> MonteCarloResult:
    """Empirical ergodic rate of one detector over ``trials`` seeded realizations."""
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    ctx = SimulationContext.build(config, (detector,)) if ctx is None else ctx
    gamma = simulate_sinr(ctx, trials, (detector,))[detector]
    mean, ci = rate_summary(gamma, config.prelog)
    return MonteCarloResult(detector=detector, rate_mean=mean, rate_ci95=ci,
                            gamma=gamma, trials=trials)
