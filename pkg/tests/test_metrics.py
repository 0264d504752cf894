import numpy as np
import pytest

from conftest import simple_config
from oracles import random_instance
from ricianmimo.channel_stats import build_statistics
from ricianmimo.detection import cell_combiners, mmmse_combiner
from ricianmimo.estimation import EstimateSet, prepare_estimator
from ricianmimo.metrics import (SimulationContext, TrialError, cell_sinrs, rate_summary,
                                run_monte_carlo, simulate_sinr, sinr_conditional,
                                sinr_mmmse_direct)
from ricianmimo.scenario import CorrelationModel


def _noiseless_single(N=3, rho_d=1.0):
    """One user whose estimate is perfect (R = 0) and equals e1."""
    cfg = simple_config(L=1, K=1, N=N, rho_d=rho_d)
    est = prepare_estimator(build_statistics(cfg, Theta=np.zeros((1, 1, 1, N, N))))
    hhat = np.zeros((1, 1, N, 1), dtype=complex)
    hhat[0, 0, 0, 0] = 1.0
    return EstimateSet(hhat=hhat, est=est, scope="multi"), est


def test_unit_sinr():
    es, est = _noiseless_single()
    assert np.isclose(sinr_conditional(np.eye(3)[0], es, est, None, 0, 0), 1.0)
    assert np.isclose(sinr_mmmse_direct(es, est, None, 0, 0), 1.0)


def test_orthogonal_combiner():
    es, est = _noiseless_single()
    assert sinr_conditional(np.eye(3)[1], es, est, None, 0, 0) == 0.0
    assert sinr_conditional(np.zeros(3), es, est, None, 0, 0) == 0.0


def test_quotient_equals_quadratic_form():
    inst = random_instance(2, L=3, K=2, N=6)
    es = inst.estimates
    for j, k in np.ndindex(3, 2):
        g = mmmse_combiner(es, inst.est, None, j, k)
        a = sinr_conditional(g, es, inst.est, None, j, k)
        b = sinr_mmmse_direct(es, inst.est, None, j, k)
        assert abs(a - b) <= 1e-10 * abs(b)


def test_interferer_order_invariant():
    inst = random_instance(5, L=3, K=2, N=6)
    es = inst.estimates
    a = sinr_mmmse_direct(es, inst.est, None, 1, 0)
    hh = es.hhat.copy()
    hh[1, [0, 2]] = hh[1, [2, 0]]                 # swap two interfering cells at BS 1
    b = sinr_mmmse_direct(EstimateSet(hhat=hh, est=es.est, scope=es.scope), inst.est, None, 1, 0)
    assert np.isclose(a, b, rtol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_direct_matches_conditional(seed):
    inst = random_instance(seed, L=2, K=2, N=5)
    es = inst.estimates
    for j, k in np.ndindex(2, 2):
        g = mmmse_combiner(es, inst.est, None, j, k)
        assert np.isclose(sinr_conditional(g, es, inst.est, None, j, k),
                          sinr_mmmse_direct(es, inst.est, None, j, k), rtol=1e-10)


def test_cell_sinrs_vectorized():
    inst = random_instance(8, L=2, K=2, N=5)
    es = inst.estimates
    for det in ("mrc", "mmmse"):
        G = cell_combiners(es, 0, det)
        ref = [sinr_conditional(G[:, k], es, inst.est, None, 0, k) for k in range(2)]
        assert np.allclose(cell_sinrs(G, es, 0), ref, rtol=1e-12)


def test_rate_summary_zero_prelog():
    gamma = np.random.default_rng(0).exponential(size=(50, 2, 2))
    mean, ci = rate_summary(gamma, 0.0)
    assert np.all(mean == 0) and np.all(ci == 0)


def test_rate_summary_values():
    gamma = np.array([[[0.0]], [[np.e - 1]]])
    mean, ci = rate_summary(gamma, 0.5)
    assert np.isclose(mean[0, 0], 0.25)
    assert np.isclose(ci[0, 0], 1.959964 * np.std([0, 0.5], ddof=1) / np.sqrt(2))


def test_ci_shrinks_with_trials():
    cfg = simple_config(L=2, K=1, N=8, beta=[[[1.0], [0.3]], [[0.3], [1.0]]], kappa=0.5,
                        theta=0.2, corr=CorrelationModel("exponential", 0.5), base_seed=3)
    ctx = SimulationContext.build(cfg, ("mrc",))
    gamma = simulate_sinr(ctx, 4000, ("mrc",))["mrc"]
    ratios = []
    for r in range(4):
        a = rate_summary(gamma[r * 1000: r * 1000 + 500], cfg.prelog)[1]
        b = rate_summary(gamma[r * 1000: r * 1000 + 1000], cfg.prelog)[1]
        ratios.append(a / b)
    ratio = np.mean(ratios)
    assert 0.8 * np.sqrt(2) <= ratio <= 1.2 * np.sqrt(2)


def test_monte_carlo_defaults_and_order(scenario1):
    import inspect
    assert inspect.signature(run_monte_carlo).parameters["trials"].default == 1000
    cfg = scenario1.replace(N=8)
    full = run_monte_carlo(cfg, "mrc", trials=6)
    ctx = SimulationContext.build(cfg, ("mrc",))
    tail = simulate_sinr(ctx, 3, ("mrc",), first_trial=3)["mrc"]
    assert np.array_equal(full.gamma[3:], tail)


def test_trial_error_carries_index(monkeypatch):
    import ricianmimo.metrics as m
    ctx = SimulationContext.build(simple_config(L=1, K=1, N=2), ("mrc",))
    real = m.run_trial

    def flaky(ctx_, trial, detectors):
        if trial == 2:
            raise np.linalg.LinAlgError("boom")
        return real(ctx_, trial, detectors)

    monkeypatch.setattr(m, "run_trial", flaky)
    with pytest.raises(TrialError) as info:
        simulate_sinr(ctx, 5, ("mrc",))
    assert info.value.trial == 2


@pytest.mark.slow
def test_mrc_rates_match_finite_n_moments(scenario1):
    from oracles import mrc_finite_n
    cfg = scenario1.replace(N=64)
    ctx = SimulationContext.build(cfg, ("mrc",))
    emp = np.log1p(simulate_sinr(ctx, 1000, ("mrc",))["mrc"]).mean(axis=0)
    ref = np.log1p([[mrc_finite_n(ctx.est, j, k) for k in range(cfg.K)] for j in range(cfg.L)])
    assert np.all(np.abs(emp - ref) / ref <= 0.03)
