"""Experiment harness: configs, runners, scaling fits and report output."""

from .experiments import (
    Cell,
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    ScalingFit,
    deviation_stats,
    fit_scaling_exponent,
    run_experiment,
)
from .report import emit_report

__all__ = [
    "Cell",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "ScalingFit",
    "deviation_stats",
    "emit_report",
    "fit_scaling_exponent",
    "run_experiment",
]
