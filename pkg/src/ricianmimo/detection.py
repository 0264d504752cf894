"""Linear receive combiners: MRC, single-cell MMSE and multi-cell MMSE."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .estimation import EstimateSet, EstimatorStats
from .linalg import NumericalError, cho_factor, hermitian, hermitian_inv

DETECTORS = ("mrc", "smmse", "mmmse")


@dataclass(frozen=True)
class CombinerSet:
    """``g[j]`` is the ``N x K`` matrix of combiners used at BS ``j``."""

    g: np.ndarray = field(repr=False)
    detector: str
    zs_mode: str | None = None


def mrc_combiner(estimates: EstimateSet, j: int, k: int) -> np.ndarray:
    return estimates.get(j, j, k).copy()


def zm_inverse(est: EstimatorStats, j: int, rho_d: float | None = None) -> np.ndarray:
    """``I/rho_d + sum_{l,i}(R - Rtilde)`` at BS ``j``."""
    Zi = est.Zm_inv[j]
    cfg_rho = est.stats.config.rho_d
    if rho_d is None or rho_d == cfg_rho:
        return Zi
    N = Zi.shape[-1]
    return Zi + (1.0 / rho_d - 1.0 / cfg_rho) * np.eye(N)


def los_projector(Hbar: np.ndarray, D_diag=None) -> np.ndarray:
    """
    ``Hbar (Hbar^H Hbar)^-1 D (Hbar^H Hbar)^-1 Hbar^H`` (rank K).

    Raises :class:`NumericalError` naming the offending users when the LoS
    matrix is rank deficient (a user without LoS, or two users sharing a
    steering direction).
    """
    N, K = Hbar.shape
    D = np.ones(K) if D_diag is None else np.asarray(D_diag, dtype=float)
    norms = np.linalg.norm(Hbar, axis=0)
    for i in range(K):
        if norms[i] == 0:
            raise NumericalError(f"LoS projector undefined: user {i} has no LoS component (kappa=0)")
    unit = Hbar / norms
    overlap = np.abs(unit.conj().T @ unit)
    for a in range(K):
        for b in range(a + 1, K):
            if overlap[a, b] > 1 - 1e-9:
                raise NumericalError(
                    f"LoS projector undefined: users {a} and {b} have collinear steering vectors")
    G = hermitian(Hbar.conj().T @ Hbar)
    if np.linalg.cond(G) > 1e12:
        raise NumericalError("LoS projector undefined: LoS matrix is rank deficient")
    Gi = hermitian_inv(G)
    M = Hbar @ Gi
    return hermitian((M * D) @ M.conj().T)


def build_zs(mode: str, est: EstimatorStats, j: int, rho_d: float | None = None,
             D_diag=None, eps: float | None = None):
    """
    Design matrix of the single-cell MMSE combiner and its inverse.

    ``plain`` gives ``Z = rho_d I``. ``cov_design`` sets
    ``Z^-1 = I/rho_d + sum_i (R_jji - Rtilde_jji) + sum_{l != j} sum_i R_jli``.
    ``los_projector`` uses the rank-K LoS projector plus ``eps * I`` so the
    inverse exists; ``eps`` defaults to ``1e-6 * rho_d``.
    """
    stats = est.stats
    cfg = stats.config
    rho_d = cfg.rho_d if rho_d is None else rho_d
    N = cfg.N
    eye = np.eye(N)
    if mode == "plain":
        return rho_d * eye.astype(complex), eye.astype(complex) / rho_d
    if mode == "cov_design":
        A = (stats.R[j, j] - est.Rtilde[j, j]).sum(axis=0)
        others = [l for l in range(cfg.L) if l != j]
        if others:
            A = A + stats.R[j, others].sum(axis=(0, 1))
        Zs_inv = hermitian(eye / rho_d + A)
        return hermitian_inv(Zs_inv), Zs_inv
    if mode == "los_projector":
        eps = 1e-6 * rho_d if eps is None else eps
        D_diag = cfg.D_diag if D_diag is None else D_diag
        Zs = los_projector(stats.Hbar(j), D_diag) + eps * eye
        return Zs, hermitian_inv(Zs)
    raise ValueError(f"unknown zs_mode {mode!r}")


def _solve_gram(Hhat: np.ndarray, Z_inv: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    A = Hhat @ Hhat.conj().T + Z_inv
    return spla.cho_solve(cho_factor(A), rhs, check_finite=False)


def smmse_combiner(estimates: EstimateSet, Zs_inv: np.ndarray, j: int, k: int) -> np.ndarray:
    """``(sum_i hhat_jji hhat_jji^H + Zs^-1)^-1 hhat_jjk``."""
    Hjj = estimates.local(j)
    return _solve_gram(Hjj, Zs_inv, Hjj[:, k])


def mmmse_combiner(estimates: EstimateSet, est: EstimatorStats, rho_d: float | None,
                   j: int, k: int) -> np.ndarray:
    """``(sum_{l,i} hhat_jli hhat_jli^H + Zm^-1)^-1 hhat_jjk``."""
    return _solve_gram(estimates.all_cells(j), zm_inverse(est, j, rho_d), estimates.get(j, j, k))


def cell_combiners(estimates: EstimateSet, j: int, detector: str,
                   Zs_inv: np.ndarray | None = None) -> np.ndarray:
    """All ``K`` combiners of BS ``j`` as an ``N x K`` matrix; one factorization per cell."""
    Hjj = estimates.local(j)
    if detector == "mrc":
        return Hjj.copy()
    if detector == "smmse":
        if Zs_inv is None:
            raise ValueError("smmse needs Zs_inv")
        return _solve_gram(Hjj, Zs_inv, Hjj)
    if detector == "mmmse":
        return _solve_gram(estimates.all_cells(j), zm_inverse(estimates.est, j), Hjj)
    raise ValueError(f"unknown detector {detector!r}")


def build_combiners(estimates: EstimateSet, detector: str, zs_inverses=None,
                    zs_mode: str | None = None) -> CombinerSet:
    L = estimates.hhat.shape[0]
    g = np.stack([cell_combiners(estimates, j, detector,
                                 None if zs_inverses is None else zs_inverses[j])
                  for j in range(L)])
    return CombinerSet(g=g, detector=detector, zs_mode=zs_mode if detector == "smmse" else None)
