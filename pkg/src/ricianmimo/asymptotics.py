"""
Large-antenna deterministic equivalents of the uplink SINR.

All traces are normalized by ``N``. The MRC and S-MMSE equivalents stay
bounded as ``N`` grows (pilot contamination), while the M-MMSE
equivalent is returned both as ``gamma/N`` (which converges) and as
``gamma`` itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel_stats import ChannelStatistics
from .detection import build_zs, los_projector
from .estimation import EstimatorStats, prepare_estimator
from .linalg import NumericalError, hermitian, hermitian_inv

RATE_CAP = math.log1p(1e12)


class AssumptionError(NumericalError):
    """The covariances of a user are (asymptotically) linearly dependent across cells."""


class InfiniteSINRWarning(RuntimeWarning):
    """An interference-free user: the deterministic equivalent is unbounded."""


def _est(stats_or_est) -> EstimatorStats:
    if isinstance(stats_or_est, EstimatorStats):
        return stats_or_est
    if isinstance(stats_or_est, ChannelStatistics):
        return prepare_estimator(stats_or_est)
    raise TypeError("expected ChannelStatistics or EstimatorStats")


def _ntr(A: np.ndarray, B: np.ndarray) -> complex:
    """(1/N) tr(A B) without forming the product."""
    return np.einsum("ij,ji->", A, B) / A.shape[0]


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    warnings.warn("empty interference sum: SINR equivalent is infinite", InfiniteSINRWarning,
                  stacklevel=3)
    return math.inf


def gamma_mrc_asymptotic(stats, j: int, k: int) -> tuple[float, dict]:
    """
    MRC equivalent.

    Components: ``signal`` (numerator), ``los_intra`` (LoS-induced
    intra-cell interference) and ``pilot_contamination``.
    """
    est = _est(stats)
    s = est.stats
    N, K, L = s.N, s.K, s.L
    hb = s.hbar[j]
    signal = (np.trace(est.Rtilde[j, j, k]).real / N + np.vdot(hb[k], hb[k]).real / N) ** 2
    inner = hb.conj() @ hb[k]
    los_intra = float(sum(abs(inner[i]) ** 2 for i in range(K) if i != k)) / N**2
    RP = s.R[j, j, k] @ est.Phi[j, k]
    pc = float(sum(abs(_ntr(RP, s.R[j, l, k])) ** 2 for l in range(L) if l != j))
    comps = {"signal": signal, "los_intra": los_intra, "pilot_contamination": pc}
    return _ratio(signal, los_intra + pc), comps


def gamma_mrc_favorable(stats, j: int, k: int) -> float:
    """MRC equivalent with the LoS intra-cell term dropped (orthogonal LoS)."""
    _, comps = gamma_mrc_asymptotic(stats, j, k)
    return _ratio(comps["signal"], comps["pilot_contamination"])


def beta_s(est: EstimatorStats, Zs: np.ndarray, j: int) -> np.ndarray:
    """``B[i, l] = (1/N) tr(R_jli Phi_ji R_jji Zs)`` for all users ``i`` and cells ``l``."""
    s = est.stats
    out = np.empty((s.K, s.L), dtype=complex)
    for i in range(s.K):
        PRZ = est.Phi[j, i] @ s.R[j, j, i] @ Zs
        for l in range(s.L):
            out[i, l] = _ntr(s.R[j, l, i], PRZ)
    return out


def smmse_q(est: EstimatorStats, Zs: np.ndarray, j: int, B: np.ndarray | None = None) -> np.ndarray:
    """``Q_j = ((1/N) Hbar^H Zs Hbar + diag{B[i, j]})^-1``."""
    s = est.stats
    B = beta_s(est, Zs, j) if B is None else B
    Hb = s.Hbar(j)
    M = Hb.conj().T @ Zs @ Hb / s.N + np.diag(B[:, j])
    try:
        return np.linalg.inv(M)
    except np.linalg.LinAlgError:
        raise NumericalError(f"Q_{j} is singular") from None


def exact_zs(est: EstimatorStats, j: int, mode: str | None = None) -> np.ndarray:
    """Design matrix used by the S-MMSE equivalent; the LoS projector is taken without ``eps``."""
    cfg = est.stats.config
    mode = cfg.zs_mode if mode is None else mode
    if mode == "los_projector":
        return los_projector(est.stats.Hbar(j), cfg.D_diag)
    return build_zs(mode, est, j)[0]


def gamma_smmse_asymptotic(stats, Zs: np.ndarray | None, j: int, k: int):
    """
    S-MMSE equivalent for design matrix ``Zs``.

    Returns ``(value, Q_j, components)`` with components
    ``pilot_contamination`` and ``uncorrelated_intercell``. The signal
    term is the constant 1.
    """
    est = _est(stats)
    s = est.stats
    Zs = exact_zs(est, j) if Zs is None else Zs
    B = beta_s(est, Zs, j)
    Q = smmse_q(est, Zs, j, B)
    others = [l for l in range(s.L) if l != j]
    pc = float(sum(abs(Q[k, k] * B[k, l]) ** 2 for l in others))
    unc = float(sum(abs(Q[k, i] * B[i, l]) ** 2 for l in others for i in range(s.K) if i != k))
    comps = {"signal": 1.0, "pilot_contamination": pc, "uncorrelated_intercell": unc}
    return _ratio(1.0, pc + unc), Q, comps


def gamma_smmse_exact_signal(stats, Zs: np.ndarray | None, j: int, k: int) -> float:
    """Diagnostic variant with signal ``|1 - [Q_j]_kk / N|^2`` instead of 1."""
    est = _est(stats)
    Zs = exact_zs(est, j) if Zs is None else Zs
    value, Q, comps = gamma_smmse_asymptotic(est, Zs, j, k)
    den = comps["pilot_contamination"] + comps["uncorrelated_intercell"]
    return _ratio(abs(1 - Q[k, k] / est.stats.N) ** 2, den)


# ---------------------------------------------------------------------------
# multi-cell MMSE

def check_assumption2(stats, j: int, k: int) -> np.ndarray:
    """
    Linear-independence margins of ``{R_jlk}_l``.

    Entry ``l'`` is ``(1/N) * min ||R_jl'k + sum_{l != l'} c_l R_jlk||_F^2``
    over complex ``c``: the squared distance from ``R_jl'k`` to the span of
    the other cells' covariances. Zero means dependent.
    """
    s = stats.stats if isinstance(stats, EstimatorStats) else stats
    N, L = s.N, s.L
    V = s.R[j, :, k].reshape(L, N * N).T                   # columns are vec(R_l)
    margins = np.empty(L)
    for lp in range(L):
        target = V[:, lp]
        rest = np.delete(V, lp, axis=1)
        if rest.shape[1]:
            coef, *_ = np.linalg.lstsq(rest, target, rcond=None)
            resid = target - rest @ coef
        else:
            resid = target
        margins[lp] = np.vdot(resid, resid).real / N
    return margins


def assumption2_margin(stats, j: int, k: int) -> float:
    return float(check_assumption2(stats, j, k).min())


def _beta_m(est: EstimatorStats, Zm: np.ndarray, j: int, k: int) -> np.ndarray:
    """``B[n, m] = (1/N) tr(R_jnk Phi_jk R_jmk Zm)``."""
    s = est.stats
    RP = s.R[j, :, k] @ est.Phi[j, k]                      # (L, N, N)
    RZ = s.R[j, :, k] @ Zm
    return np.einsum("nab,mba->nm", RP, RZ) / s.N


def mmmse_T(est: EstimatorStats, Zm: np.ndarray, j: int, k: int) -> np.ndarray:
    """
    ``L x L`` Gram matrix of the pilot-sharing estimates, own cell first.

    Entry ``(a, b)`` is the limit of ``(1/N) hhat_a^H Zm hhat_b`` (centered),
    i.e. ``B[b, a]`` with ``B`` from :func:`_beta_m`; Hermitian.
    """
    L = est.stats.L
    order = [j] + [l for l in range(L) if l != j]
    B = _beta_m(est, Zm, j, k)
    return hermitian(B[np.ix_(order, order)].T)


def mmmse_D(est: EstimatorStats, Zm: np.ndarray, j: int, k: int) -> np.ndarray:
    """
    ``L(K-1) x L(K-1)`` covariance of the other-pilot estimates.

    Block ``(u, v)`` (cells in natural order) is diagonal over users
    ``m != k`` with entries ``(1/N) tr(R_jvm Phi_jm R_jum Zm)``.
    """
    s = est.stats
    L, K = s.L, s.K
    users = [m for m in range(K) if m != k]
    n = len(users)
    D = np.zeros((L * n, L * n), dtype=complex)
    for a, m in enumerate(users):
        B = _beta_m(est, Zm, j, m)
        for u in range(L):
            for v in range(L):
                D[u * n + a, v * n + a] = B[v, u]
    return hermitian(D)


def mmmse_hbar_except(stats: ChannelStatistics, j: int, k: int) -> np.ndarray:
    """LoS matrix ``N x L(K-1)``: cell ``j``'s other users, zero columns for other cells."""
    L, K, N = stats.L, stats.K, stats.N
    n = K - 1
    out = np.zeros((N, L * n), dtype=complex)
    users = [m for m in range(K) if m != k]
    for a, m in enumerate(users):
        out[:, j * n + a] = stats.hbar[j, m]
    return out


@dataclass(frozen=True)
class MMMSEEquivalent:
    gamma_over_N: float
    gamma: float
    pilot_term: float
    los_term: float
    T: np.ndarray = field(repr=False)
    Qbar: np.ndarray = field(repr=False)


def mmmse_equivalent(stats, rho_d: float | None, j: int, k: int,
                     tol: float = 1e-10, max_cond: float = 1e12) -> MMMSEEquivalent:
    """
    Full M-MMSE evaluation with intermediate matrices.

    Refuses with :class:`AssumptionError` when the covariances of user
    ``(j, k)`` are linearly dependent across cells (margin below ``tol``
    relative to ``(1/N)||R||_F^2``) or ``T`` is numerically singular.
    """
    est = _est(stats)
    s = est.stats
    N = s.N
    margins = check_assumption2(s, j, k)
    scale = np.array([np.vdot(R, R).real / N for R in s.R[j, :, k]])
    if s.L > 1 and np.any(margins <= tol * scale):
        raise AssumptionError(
            f"covariances of user {k} in cell {j} are not asymptotically linearly independent "
            f"(margin {margins.min():.3e})")
    cfg_rho = s.config.rho_d
    Zm_inv = est.Zm_inv[j]
    if rho_d is not None and rho_d != cfg_rho:
        Zm_inv = Zm_inv + (1.0 / rho_d - 1.0 / cfg_rho) * np.eye(N)
    Zm = hermitian_inv(Zm_inv)
    T = mmmse_T(est, Zm, j, k)
    if np.linalg.cond(T) > max_cond:
        raise AssumptionError(f"T matrix of user {k} in cell {j} is singular: "
                              "covariances are not asymptotically linearly independent")
    pilot = 1.0 / np.linalg.inv(T)[0, 0].real
    if s.K > 1:
        D = mmmse_D(est, Zm, j, k)
        if np.linalg.cond(D) > max_cond:
            raise AssumptionError(f"D matrix of user {k} in cell {j} is singular")
        Hb = mmmse_hbar_except(s, j, k)
        Qbar = hermitian_inv(Hb @ np.linalg.solve(D, Hb.conj().T) / N + Zm_inv)
    else:
        Qbar = Zm
    h = s.hbar[j, k]
    los = float((h.conj() @ Qbar @ h).real) / N
    g_over_n = pilot + los
    return MMMSEEquivalent(gamma_over_N=g_over_n, gamma=N * g_over_n, pilot_term=pilot,
                           los_term=los, T=T, Qbar=Qbar)


def gamma_mmmse_asymptotic(stats, rho_d: float | None, j: int, k: int) -> tuple[float, float]:
    """``(gamma/N, gamma)`` of the M-MMSE deterministic equivalent."""
    eq = mmmse_equivalent(stats, rho_d, j, k)
    return eq.gamma_over_N, eq.gamma


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class AsymptoticReport:
    """
    Equivalents for every user of every cell.

    ``gamma_bar[det]`` is ``(L, K)``; M-MMSE entries are ``nan`` where the
    equivalent is refused. ``components[det][(j, k)]`` holds the
    interference breakdown.
    """

    gamma_bar: dict
    gamma_bar_over_N: np.ndarray
    components: dict
    assumption2_margin: np.ndarray
    errors: dict = field(default_factory=dict)


def asymptotic_report(stats, detectors=("mrc", "smmse", "mmmse")) -> AsymptoticReport:
    est = _est(stats)
    s = est.stats
    L, K = s.L, s.K
    gamma = {d: np.full((L, K), np.nan) for d in detectors}
    comps = {d: {} for d in detectors}
    over_n = np.full((L, K), np.nan)
    margin = np.array([[assumption2_margin(s, j, k) for k in range(K)] for j in range(L)])
    errors = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InfiniteSINRWarning)
        for j in range(L):
            Zs = exact_zs(est, j) if "smmse" in detectors else None
            for k in range(K):
                if "mrc" in detectors:
                    gamma["mrc"][j, k], comps["mrc"][j, k] = gamma_mrc_asymptotic(est, j, k)
                if "smmse" in detectors:
                    v, _, c = gamma_smmse_asymptotic(est, Zs, j, k)
                    gamma["smmse"][j, k], comps["smmse"][j, k] = v, c
                if "mmmse" in detectors:
                    try:
                        eq = mmmse_equivalent(est, None, j, k)
                    except AssumptionError as exc:
                        errors[j, k] = str(exc)
                        continue
                    gamma["mmmse"][j, k] = eq.gamma
                    over_n[j, k] = eq.gamma_over_N
                    comps["mmmse"][j, k] = {"pilot": eq.pilot_term, "los": eq.los_term}
    return AsymptoticReport(gamma_bar=gamma, gamma_bar_over_N=over_n, components=comps,
                            assumption2_margin=margin, errors=errors)


def asymptotic_rate(gamma_bar, prelog: float, cap: float = RATE_CAP):
    """``prelog * log(1 + gamma_bar)`` in nats, with unbounded values capped."""
    g = np.asarray(gamma_bar, dtype=float)
    rate = np.log1p(g)
    rate = np.where(np.isinf(g), cap, rate)
    return prelog * rate
