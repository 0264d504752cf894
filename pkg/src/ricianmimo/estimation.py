"""MMSE channel estimation under pilot reuse across cells."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel_stats import ChannelStatistics
from .linalg import hermitian, hermitian_inv


def compute_phi(R_list, tau: int, rho_tr: float) -> np.ndarray:
    """``(sum_l R_l + I / (tau*rho_tr))^-1`` for the covariances of one pilot."""
    R_list = np.asarray(R_list)
    N = R_list.shape[-1]
    if not tau * rho_tr > 0:
        raise ValueError("tau*rho_tr must be > 0")
    return hermitian_inv(R_list.sum(axis=0) + np.eye(N) / (tau * rho_tr))


def estimate_covariance(R: np.ndarray, Phi: np.ndarray) -> np.ndarray:
    """Covariance ``R Phi R`` of the centered estimate."""
    return hermitian(R @ Phi @ R)


@dataclass(frozen=True)
class EstimatorStats:
    """
    Estimator quantities derived from the channel statistics.

    ``Phi`` is ``(L, K, N, N)``, ``Rtilde`` is ``(L, L, K, N, N)``.
    ``Zm_inv[j]`` is ``I/rho_d + sum_{l,i} (R_{jli} - Rtilde_{jli})``,
    the error-plus-noise covariance seen by every detector at BS ``j``.
    """

    stats: ChannelStatistics = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    Rtilde: np.ndarray = field(repr=False)
    Zm_inv: np.ndarray = field(repr=False)

    @property
    def error_cov(self) -> np.ndarray:
        return self.stats.R - self.Rtilde


def prepare_estimator(stats: ChannelStatistics) -> EstimatorStats:
    cfg = stats.config
    L, K, N = cfg.L, cfg.K, cfg.N
    Phi = np.empty((L, K, N, N), dtype=complex)
    Rtilde = np.empty_like(stats.R)
    for j, k in np.ndindex(L, K):
        Phi[j, k] = compute_phi(stats.R[j, :, k], cfg.tau, cfg.rho_tr)
        for l in range(L):
            Rtilde[j, l, k] = estimate_covariance(stats.R[j, l, k], Phi[j, k])
    err = (stats.R - Rtilde).sum(axis=(1, 2))
    Zm_inv = hermitian(err + np.eye(N) / cfg.rho_d)
    for arr in (Phi, Rtilde, Zm_inv):
        arr.setflags(write=False)
    return EstimatorStats(stats=stats, Phi=Phi, Rtilde=Rtilde, Zm_inv=Zm_inv)


@dataclass(frozen=True)
class EstimateSet:
    """
    Channel estimates for one realization.

    ``hhat`` has shape ``(L, L, N, K)``; ``hhat[j, l, :, k]`` estimates
    ``h_{jlk}``. With ``scope="single"`` only the ``l == j`` blocks are
    populated and asking for another block raises.
    """

    hhat: np.ndarray = field(repr=False)
    est: EstimatorStats = field(repr=False)
    scope: str = "multi"

    def get(self, j: int, l: int, k: int) -> np.ndarray:
        if self.scope == "single" and l != j:
            raise LookupError("single-cell estimates hold only local channels")
        return self.hhat[j, l, :, k]

    def local(self, j: int) -> np.ndarray:
        """``N x K`` matrix of the local estimates at BS ``j``."""
        return self.hhat[j, j]

    def all_cells(self, j: int) -> np.ndarray:
        """``N x LK`` matrix of every estimate at BS ``j``, column ``l*K + i``."""
        if self.scope == "single":
            raise LookupError("single-cell estimates hold only local channels")
        L, _, N, K = self.hhat.shape
        return self.hhat[j].transpose(1, 0, 2).reshape(N, L * K)

    @property
    def Phi(self) -> np.ndarray:
        return self.est.Phi

    @property
    def Rtilde(self) -> np.ndarray:
        return self.est.Rtilde


def mmse_estimate(observation: np.ndarray, j: int, l: int, k: int,
                  est: EstimatorStats) -> np.ndarray:
    """
    ``R_{jlk} Phi_{jk} (y_{jk} - hbar_{jk})``, plus the LoS mean when ``l == j``.

    The known LoS mean is removed from the observation first, so the
    estimate is unbiased and its error is uncorrelated with it.
    """
    stats = est.stats
    centered = np.asarray(observation) - stats.hbar[j, k]
    out = stats.R[j, l, k] @ (est.Phi[j, k] @ centered)
    if l == j:
        out = out + stats.hbar[j, k]
    return out


def estimate_all(observations: np.ndarray, est: EstimatorStats,
                 scope: str = "multi") -> EstimateSet:
    """
    Estimates of every channel from the observations of one realization.

    ``observations`` is ``(L, N, K)`` as produced by
    :func:`~ricianmimo.sampling.sample_training_batch`. One observation per
    (j, k) serves every ``l``.
    """
    if scope not in ("multi", "single"):
        raise ValueError("scope must be 'multi' or 'single'")
    stats = est.stats
    L, K, N = stats.L, stats.K, stats.N
    # Phi_{jk} y_{jk} for all (j, k): (L, K, N)
    centered = observations.transpose(0, 2, 1) - stats.hbar
    v = (est.Phi @ centered[..., None])[..., 0]
    hhat = np.zeros((L, L, N, K), dtype=complex)
    if scope == "multi":
        hhat[...] = (stats.R @ v[:, None, :, :, None])[..., 0].transpose(0, 1, 3, 2)
    else:
        idx = np.arange(L)
        hhat[idx, idx] = (stats.R[idx, idx] @ v[..., None])[..., 0].transpose(0, 2, 1)
    idx = np.arange(L)
    hhat[idx, idx] += stats.hbar.transpose(0, 2, 1)
    return EstimateSet(hhat=hhat, est=est, scope=scope)
