import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ricianmimo.scenario import (CorrelationModel, ScenarioConfig,  # noqa: E402
                                 builtin_scenario_path, load_scenario)

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Remember the verdict of one acceptance criterion for the end-of-run summary."""
    _ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def simple_config(L=1, K=1, N=4, beta=1.0, kappa=0.0, theta=0.0, tau=None, rho_tr=1.0,
                  rho_d=1.0, corr=None, T_c=200, **kw):
    """Config with scalar-broadcast gains, angles and Rician factors."""
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (L, L, K)).copy()
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (L, K)).copy()
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (L, L, K)).copy()
    return ScenarioConfig(L=L, K=K, N=N, T_c=T_c, tau=K if tau is None else tau,
                          rho_tr=rho_tr, rho_d=rho_d, beta=beta, kappa=kappa, theta=theta,
                          corr_model=corr or CorrelationModel(kind="identity"), **kw)


def two_cell_config(N, kappa=1.0, r=0.5, seed=5, **kw):
    """Two cells, two users, fixed gains and angles; only ``N`` varies."""
    beta = np.full((2, 2, 2), 0.1)
    beta[0, 0] = beta[1, 1] = 0.25
    theta = np.deg2rad(np.array([[[-20.0, 25.0], [-5.0, 40.0]], [[10.0, -30.0], [-18.0, 22.0]]]))
    return ScenarioConfig(L=2, K=2, N=N, T_c=200, tau=2, rho_tr=1.0, rho_d=1.0, beta=beta,
                          kappa=np.full((2, 2), float(kappa)), theta=theta,
                          corr_model=CorrelationModel("exponential", r), base_seed=seed, **kw)


@pytest.fixture(scope="session")
def scenario1():
    return load_scenario(builtin_scenario_path("scenario1"))


@pytest.fixture(scope="session")
def scenario2():
    return load_scenario(builtin_scenario_path("scenario2"))
