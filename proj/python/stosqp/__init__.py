"""Stochastic SQP solver for two-stage problems with upper-C2 recourse."""

from ._core import (
    ConfigError,
    cli,
    pps_expected,
    pps_instance,
    pps_oracle,
    run_config,
    run_pps_experiment,
    second_stage,
    selftest,
    solve_lp,
    solve_qp,
    stationarity_error,
)

__all__ = [
    "ConfigError",
    "cli",
    "pps_expected",
    "pps_instance",
    "pps_oracle",
    "run_config",
    "run_pps_experiment",
    "second_stage",
    "selftest",
    "solve_lp",
    "solve_qp",
    "stationarity_error",
]
