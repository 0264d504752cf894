import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from conftest import simple_config
from ricianmimo.channel_stats import build_statistics, effective_covariance, los_component
from ricianmimo.scenario import CorrelationModel, build_los_steering


def test_effective_covariance_rician():
    assert np.allclose(effective_covariance(2.0, 1.0, True, np.eye(3)), np.eye(3))


def test_effective_covariance_intercell():
    assert np.allclose(effective_covariance(2.0, 1.0, False, np.eye(3)), 2 * np.eye(3))


def test_effective_covariance_rayleigh():
    Theta = np.array([[1.0, 0.3j], [-0.3j, 1.0]])
    assert np.allclose(effective_covariance(1.0, 0.0, True, Theta), Theta)


def test_los_component_unit_scale():
    z = build_los_steering(0.3, 5)
    assert np.allclose(los_component(2.0, 1.0, z), z)


def test_los_component_zero():
    assert np.allclose(los_component(1.0, 0.0, np.ones(4)), 0)


def test_los_scale_monotone():
    scales = [abs(los_component(1.0, k, np.ones(1))[0]) for k in (0.1, 1.0, 10.0, 1e3, 1e6)]
    assert np.all(np.diff(scales) > 0)
    assert scales[-1] < 1.0 and np.isclose(scales[-1], 1.0, atol=1e-6)


@given(beta=st.floats(1e-3, 10.0), kappa=st.floats(0.0, 100.0))
def test_power_split(beta, kappa):
    """Scattered plus LoS power equals beta per antenna."""
    z = build_los_steering(0.2, 4)
    scattered = np.trace(effective_covariance(beta, kappa, True, np.eye(4))).real / 4
    los = np.linalg.norm(los_component(beta, kappa, z)) ** 2 / 4
    assert np.isclose(scattered + los, beta)


def test_statistics_shapes_and_los_only_intracell():
    cfg = simple_config(L=2, K=2, N=5, kappa=1.0, beta=0.5,
                        corr=CorrelationModel("exponential", 0.4), theta=0.2)
    s = build_statistics(cfg)
    assert s.R.shape == (2, 2, 2, 5, 5)
    assert s.hbar.shape == (2, 2, 5)
    assert s.Hbar(1).shape == (5, 2)
    assert np.allclose(s.R[0, 0, 0], 0.25 * s.Theta[0, 0, 0])
    assert np.allclose(s.R[0, 1, 0], 0.5 * s.Theta[0, 1, 0])
    for j in range(2):
        assert np.allclose(s.R_sqrt[j, 1 - j, 0] @ s.R_sqrt[j, 1 - j, 0], s.R[j, 1 - j, 0])


def test_dump_roundtrip(tmp_path):
    s = build_statistics(simple_config(L=2, K=1, N=3, kappa=0.5))
    s.dump(tmp_path / "stats.npz")
    z = np.load(tmp_path / "stats.npz")
    assert np.allclose(z["R"], s.R)
    assert int(z["N"]) == 3
