"""Second-order channel statistics, precomputed once per scenario."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import hermitian, psd_sqrt
from .scenario import ScenarioConfig, build_los_steering, correlation_matrices


def effective_covariance(beta: float, kappa: float, same_cell: bool,
                         Theta: np.ndarray) -> np.ndarray:
    """Covariance of the scattered part: ``beta / (1 + kappa*delta) * Theta``."""
    scale = beta / (1.0 + kappa) if same_cell else beta
    return scale * Theta


def los_component(beta: float, kappa: float, zbar: np.ndarray) -> np.ndarray:
    """Deterministic LoS mean ``sqrt(beta*kappa/(1+kappa)) * zbar``."""
    return np.sqrt(beta * kappa / (1.0 + kappa)) * np.asarray(zbar)


@dataclass(frozen=True)
class ChannelStatistics:
    """
    Frozen per-scenario statistics.

    ``Theta`` and ``R`` have shape ``(L, L, K, N, N)`` indexed
    ``[j, l, k]``; ``hbar`` has shape ``(L, K, N)`` (LoS means exist only
    for intra-cell links).
    """

    config: ScenarioConfig = field(repr=False)
    Theta: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    hbar: np.ndarray = field(repr=False)

    @cached_property
    def R_sqrt(self) -> np.ndarray:
        """Hermitian roots of every ``R``, built on first use (sampling only)."""
        cfg = self.config
        out = np.empty_like(self.Theta)
        roots = {}
        for j, l, k in np.ndindex(cfg.L, cfg.L, cfg.K):
            # exponential matrices repeat whenever angles repeat
            key = self.Theta[j, l, k].tobytes()
            if key not in roots:
                roots[key] = psd_sqrt(self.Theta[j, l, k])
            scale = cfg.beta[j, l, k] / (1.0 + cfg.kappa[j, k]) if l == j else cfg.beta[j, l, k]
            out[j, l, k] = np.sqrt(scale) * roots[key]
        out.setflags(write=False)
        return out

    @property
    def L(self) -> int:
        return self.config.L

    @property
    def K(self) -> int:
        return self.config.K

    @property
    def N(self) -> int:
        return self.config.N

    def Hbar(self, j: int) -> np.ndarray:
        """LoS matrix of cell ``j``, shape ``(N, K)``."""
        return self.hbar[j].T

    def dump(self, path) -> None:
        """
        Write all statistics to an ``.npz`` archive.

        Keys: ``Theta``, ``R`` (``L x L x K x N x N``), ``hbar``
        (``L x K x N``), ``beta``, ``kappa``, ``theta`` and the scalars
        ``L``, ``K``, ``N``, ``tau``, ``rho_tr``, ``rho_d``.
        """
        c = self.config
        np.savez_compressed(
            path, Theta=self.Theta, R=self.R, hbar=self.hbar,
            beta=c.beta, kappa=c.kappa, theta=c.theta,
            L=c.L, K=c.K, N=c.N, tau=c.tau, rho_tr=c.rho_tr, rho_d=c.rho_d)


def build_statistics(cfg: ScenarioConfig, Theta: np.ndarray | None = None) -> ChannelStatistics:
    """Assemble Theta, R, R^(1/2) and the LoS means for every link."""
    L, K, N = cfg.L, cfg.K, cfg.N
    if Theta is None:
        Theta = correlation_matrices(cfg)
    Theta = hermitian(np.asarray(Theta, dtype=complex))

    R = np.empty_like(Theta)
    for j, l, k in np.ndindex(L, L, K):
        R[j, l, k] = effective_covariance(cfg.beta[j, l, k], cfg.kappa[j, k], l == j, Theta[j, l, k])

    hbar = np.zeros((L, K, N), dtype=complex)
    for j, k in np.ndindex(L, K):
        zbar = build_los_steering(cfg.theta[j, j, k], N)
        hbar[j, k] = los_component(cfg.beta[j, j, k], cfg.kappa[j, k], zbar)

    for arr in (Theta, R, hbar):
        arr.setflags(write=False)
    return ChannelStatistics(config=cfg, Theta=Theta, R=R, hbar=hbar)
