"""Multi-cell massive MIMO uplink under correlated Rician fading and pilot contamination."""

from .asymptotics import (AssumptionError, asymptotic_rate, asymptotic_report, check_assumption2,
                          gamma_mmmse_asymptotic, gamma_mrc_asymptotic, gamma_mrc_favorable,
                          gamma_smmse_asymptotic)
from .channel_stats import ChannelStatistics, build_statistics
from .estimation import EstimateSet, estimate_all, prepare_estimator
from .linalg import NumericalError
from .metrics import SimulationContext, run_monte_carlo, simulate_sinr
from .scenario import ConfigError, ScenarioConfig, builtin_scenario_path, load_scenario
from .sweep import run_scenario1, run_scenario2, run_sweep, write_csv

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "ChannelStatistics", "ConfigError", "EstimateSet", "NumericalError",
    "ScenarioConfig", "SimulationContext", "asymptotic_rate", "asymptotic_report",
    "build_statistics", "builtin_scenario_path", "check_assumption2", "estimate_all",
    "gamma_mmmse_asymptotic", "gamma_mrc_asymptotic", "gamma_mrc_favorable",
    "gamma_smmse_asymptotic", "load_scenario", "prepare_estimator", "run_monte_carlo",
    "run_scenario1", "run_scenario2", "run_sweep", "simulate_sinr", "write_csv",
]
