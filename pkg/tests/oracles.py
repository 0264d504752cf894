"""
Independent reference computations for the test-suite.

Everything here uses a hand-written Gaussian elimination instead of the
package's Cholesky-based solvers, so a match between the two is evidence
rather than a tautology. Only matrix products are shared with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ricianmimo.channel_stats import build_statistics
from ricianmimo.estimation import estimate_all, prepare_estimator
from ricianmimo.metrics import SimulationContext, draw_trial, sinr_mmmse_direct
from ricianmimo.scenario import CorrelationModel, ScenarioConfig


# ---------------------------------------------------------------------------
# dense linear algebra

def gauss_solve(A, B):
    """Solve ``A X = B`` by Gaussian elimination with partial pivoting."""
    A = np.array(A, dtype=complex)
    B = np.array(B, dtype=complex)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    n = A.shape[0]
    M = np.hstack([A, B])
    for c in range(n):
        p = c + int(np.argmax(np.abs(M[c:, c])))
        if M[p, c] == 0:
            raise ZeroDivisionError("singular matrix")
        if p != c:
            M[[c, p]] = M[[p, c]]
        M[c] = M[c] / M[c, c]
        for r in range(n):
            if r != c and M[r, c] != 0:
                M[r] = M[r] - M[r, c] * M[c]
    X = M[:, n:]
    return X[:, 0] if vec else X


def gauss_inv(A):
    return gauss_solve(A, np.eye(np.asarray(A).shape[0]))


def psd_matrix(rng, N, rank=None):
    """Random Hermitian PSD matrix with unit average diagonal."""
    rank = N if rank is None else rank
    X = (rng.standard_normal((N, rank)) + 1j * rng.standard_normal((N, rank))) / np.sqrt(2)
    A = X @ X.conj().T
    return A * N / np.trace(A).real


# ---------------------------------------------------------------------------
# instances

@dataclass
class OracleInstance:
    """Small explicit system plus one sampled realization of the estimates."""

    config: ScenarioConfig
    stats: object
    est: object
    estimates: object


def random_config(seed, L=2, K=2, N=6, kappa_max=2.0, tau=None, rho_d=1.0, rho_tr=1.0):
    rng = np.random.default_rng(seed)
    Theta = np.stack([[[psd_matrix(rng, N) for _ in range(K)] for _ in range(L)]
                      for _ in range(L)])
    beta = rng.uniform(0.05, 1.0, (L, L, K))
    for j in range(L):
        beta[j, j] = rng.uniform(0.5, 1.5, K)
    return ScenarioConfig(
        L=L, K=K, N=N, T_c=200, tau=K if tau is None else tau, rho_tr=rho_tr, rho_d=rho_d,
        beta=beta, kappa=rng.uniform(0.0, kappa_max, (L, K)),
        theta=rng.uniform(-np.pi / 3, np.pi / 3, (L, L, K)),
        corr_model=CorrelationModel(kind="explicit", matrices=Theta), base_seed=int(seed))


def random_instance(seed, L=2, K=2, N=6, trial=0, **kw) -> OracleInstance:
    cfg = random_config(seed, L=L, K=K, N=N, **kw)
    stats = build_statistics(cfg)
    est = prepare_estimator(stats)
    ctx = SimulationContext(config=cfg, stats=stats, est=est)
    _, Y = draw_trial(ctx, trial)
    return OracleInstance(cfg, stats, est, estimate_all(Y, est))


def oracle_zm_inv(stats, j):
    """``I/rho_d + sum (R - R Phi R)`` with Phi from Gaussian elimination."""
    cfg = stats.config
    N = cfg.N
    out = np.eye(N, dtype=complex) / cfg.rho_d
    for k in range(cfg.K):
        Phi = gauss_inv(stats.R[j, :, k].sum(axis=0) + np.eye(N) / (cfg.tau * cfg.rho_tr))
        for l in range(cfg.L):
            R = stats.R[j, l, k]
            out += R - R @ Phi @ R
    return out


# ---------------------------------------------------------------------------
# identities

def woodbury_terms(inst: OracleInstance, j: int, k: int):
    """``(Pi1, Pi2, Pi3)`` of the split into the pilot-sharing users and the rest."""
    cfg = inst.config
    L, K = cfg.L, cfg.K
    H = inst.estimates.hhat[j]                       # (L, N, K)
    h = H[j, :, k]
    rest = np.column_stack([H[l, :, i] for l in range(L) for i in range(K) if i != k]
                           or [np.zeros(cfg.N)])
    A = rest @ rest.conj().T + oracle_zm_inv(inst.stats, j)
    P = np.column_stack([H[l, :, k] for l in range(L) if l != j]) if L > 1 else None
    Ainv_h = gauss_solve(A, h)
    pi1 = (h.conj() @ Ainv_h).real
    if P is None:
        return pi1, np.zeros((1, 0)), np.zeros((0, 0))
    Ainv_P = gauss_solve(A, P)
    pi2 = (h.conj() @ Ainv_P)[None, :]
    pi3 = gauss_inv(np.eye(L - 1) + P.conj().T @ Ainv_P)
    return pi1, pi2, pi3


def woodbury_expansion_check(inst: OracleInstance) -> float:
    """Max relative deviation between ``Pi1 - Pi2 Pi3 Pi2^H`` and the direct quadratic form."""
    cfg = inst.config
    worst = 0.0
    for j in range(cfg.L):
        for k in range(cfg.K):
            pi1, pi2, pi3 = woodbury_terms(inst, j, k)
            expanded = pi1 - (pi2 @ pi3 @ pi2.conj().T).real.item() if pi2.size else pi1
            direct = sinr_mmmse_direct(inst.estimates, inst.est, None, j, k)
            worst = max(worst, abs(expanded - direct) / abs(direct))
    return worst


def qtilde(Hhat, Zs):
    """``((1/N) Hhat^H Zs Hhat + (1/N) I)^-1``."""
    N, K = Hhat.shape
    return gauss_inv(Hhat.conj().T @ Zs @ Hhat / N + np.eye(K) / N)


def smmse_signal_oracle(Hhat, Zs_inv, k):
    """``|g^H hhat_k|^2`` with ``g`` from Gaussian elimination."""
    g = gauss_solve(Hhat @ Hhat.conj().T + Zs_inv, Hhat[:, k])
    return abs(np.vdot(g, Hhat[:, k])) ** 2


def qtilde_convergence_check(make_config, Ns=(16, 32, 64, 128), trials=8, j=0, k=0):
    """
    Per-N signal-identity deviation and mean ``|[Qtilde]_kk - [Q]_kk|``.

    ``make_config(N)`` returns a config whose angles and gains do not
    depend on ``N``.
    """
    from ricianmimo.asymptotics import exact_zs, smmse_q

    identity_dev, q_err = [], []
    for N in Ns:
        cfg = make_config(N)
        stats = build_statistics(cfg)
        est = prepare_estimator(stats)
        ctx = SimulationContext(config=cfg, stats=stats, est=est)
        Zs = exact_zs(est, j)
        Q = smmse_q(est, Zs, j)
        Zs_inv = gauss_inv(Zs)
        dev, err = 0.0, 0.0
        for t in range(trials):
            Hhat = estimate_all(draw_trial(ctx, t)[1], est).local(j)
            Qt = qtilde(Hhat, Zs)
            lhs = smmse_signal_oracle(Hhat, Zs_inv, k)
            rhs = abs(1 - Qt[k, k] / N) ** 2
            dev = max(dev, abs(lhs - rhs) / max(abs(rhs), 1e-300))
            err += abs(Qt[k, k] - Q[k, k]) / trials
        identity_dev.append(dev)
        q_err.append(err)
    return np.array(identity_dev), np.array(q_err)


# ---------------------------------------------------------------------------
# closed-form reductions

def isotropic_mrc(beta, beta_i):
    """Two cells, one user, no LoS, ``R = beta I`` and ``beta_i I``: ``(beta/beta_i)^2``."""
    return (beta / beta_i) ** 2


def scalar_mmmse_over_n(beta, tau_rho_tr, rho_d):
    """Single cell, single user, no LoS, ``R = beta I``: ``beta_M = beta^2 phi z``."""
    phi = 1.0 / (beta + 1.0 / tau_rho_tr)
    z = 1.0 / (1.0 / rho_d + beta - beta**2 * phi)
    return beta**2 * phi * z


def mrc_finite_n(est, j, k):
    """
    MRC SINR approximation that keeps every finite-N term.

    Ratio of expectations ``E[||hhat||^2]^2 / E[interference + noise]``
    using exact fourth moments of Gaussian quadratic forms; the closed
    form keeps only the terms that survive ``N -> infinity``.
    """
    s = est.stats
    L, K, N = s.L, s.K, s.N
    tr = lambda A: np.trace(A).real  # noqa: E731
    C = est.Rtilde[j]
    hb = s.hbar[j]
    Zi = est.Zm_inv[j]
    Phi = est.Phi[j, k]
    num = (tr(C[j, k]) + np.vdot(hb[k], hb[k]).real) ** 2
    den = tr(C[j, k] @ Zi) + (hb[k].conj() @ Zi @ hb[k]).real
    for l in range(L):
        if l == j:
            continue
        A = s.R[j, j, k] @ s.R[j, l, k]
        den += ((hb[k].conj() @ C[l, k] @ hb[k]).real + abs(np.trace(A @ Phi)) ** 2
                + tr(A @ Phi @ A.conj().T @ Phi))
    for l in range(L):
        for i in range(K):
            if i == k:
                continue
            hi = hb[i] if l == j else np.zeros(N)
            den += (tr(C[l, i] @ C[j, k]) + (hb[k].conj() @ C[l, i] @ hb[k]).real
                    + (hi.conj() @ C[j, k] @ hi).real + abs(np.vdot(hb[k], hi)) ** 2)
    return num / den
