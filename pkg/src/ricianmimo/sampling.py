"""
Reproducible channel and training-noise draws.

Every trial owns a counter-based stream keyed by ``(base_seed, trial)``;
inside a trial the channel and the training noise use separate child
streams. A trial's draws therefore do not depend on which worker runs it
or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel_stats import ChannelStatistics

TAG_TRIAL = 10
TAG_CHANNEL = 0
TAG_TRAINING = 1


def trial_stream(base_seed: int, trial: int, purpose: int) -> np.random.Generator:
    """Generator for one (trial, purpose) pair."""
    seq = np.random.SeedSequence([base_seed, TAG_TRIAL, trial, purpose])
    return np.random.Generator(np.random.Philox(seq))


def complex_normal(stream: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2)."""
    shape = (int(shape),) if np.ndim(shape) == 0 else tuple(shape)
    z = stream.standard_normal((*shape, 2))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


@dataclass(frozen=True)
class ChannelRealization:
    """``H[j, l]`` is the ``N x K`` matrix whose column ``k`` is ``h_{jlk}``."""

    H: np.ndarray = field(repr=False)
    trial_index: int = 0

    def h(self, j: int, l: int, k: int) -> np.ndarray:
        return self.H[j, l, :, k]


def sample_channels(stats: ChannelStatistics, stream: np.random.Generator,
                    trial_index: int = 0) -> ChannelRealization:
    """Draw every ``h_{jlk}``: scattered part ``R^(1/2) z`` plus the LoS mean on intra-cell links."""
    H = sample_channel_batch(stats, stream, 1)[0]
    return ChannelRealization(H=H, trial_index=trial_index)


def sample_channel_batch(stats: ChannelStatistics, stream: np.random.Generator,
                         n_trials: int) -> np.ndarray:
    """
    Draw ``n_trials`` independent realizations from one stream.

    Returns an array of shape ``(n_trials, L, L, N, K)``.
    """
    L, K, N = stats.L, stats.K, stats.N
    z = complex_normal(stream, (L, L, K, N, n_trials))
    h = stats.R_sqrt @ z                                   # (L, L, K, N, T)
    idx = np.arange(L)
    h[idx, idx] += stats.hbar[..., None]
    return np.moveaxis(h, -1, 0).swapaxes(-1, -2)


def sample_training_observation(realization: ChannelRealization | np.ndarray, k: int, j: int,
                                tau: int, rho_tr: float, stream: np.random.Generator) -> np.ndarray:
    """Despread pilot observation of user ``k`` at BS ``j``: ``sum_l h_{jlk} + n / sqrt(tau*rho_tr)``."""
    H = realization.H if isinstance(realization, ChannelRealization) else realization
    N = H.shape[-2]
    noise = complex_normal(stream, N)
    return H[j, :, :, k].sum(axis=0) + noise / np.sqrt(tau * rho_tr)


def sample_training_batch(H: np.ndarray, tau: int, rho_tr: float,
                          stream: np.random.Generator) -> np.ndarray:
    """
    Observations of every (j, k) at once.

    ``H`` is ``(..., L, L, N, K)``; the result is ``(..., L, N, K)`` with
    entry ``[j, :, k]`` the observation of user ``k`` at BS ``j``.
    """
    Y = H.sum(axis=-3)
    return Y + complex_normal(stream, Y.shape) / np.sqrt(tau * rho_tr)
