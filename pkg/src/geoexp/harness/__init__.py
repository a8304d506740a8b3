"""Experiment orchestration and the ``geoexp`` command line."""

from .config import ConfigError, ExperimentConfig, SweepConfig
from .experiments import run_integrate, run_suite, run_sweep

__all__ = ["ConfigError", "ExperimentConfig", "SweepConfig", "run_integrate", "run_suite",
           "run_sweep"]
