"""Replication studies: configs, runners and CSV reporting."""

from .config import dump_config, load_config, parse_config, save_config
from .experiment import run_experiment
from .models import EstimatorSpec, ExperimentConfig, ResultRow, WindowModel
from .reporting import ratio_table, results_frame, timing_table, write_estimates, write_frame, write_results
from .studies import dummy_grid_counts, run_dimension_scaling, run_local_covariate, run_study, run_timing

__all__ = [
    "EstimatorSpec",
    "ExperimentConfig",
    "ResultRow",
    "WindowModel",
    "load_config",
    "parse_config",
    "dump_config",
    "save_config",
    "run_experiment",
    "run_dimension_scaling",
    "run_timing",
    "run_local_covariate",
    "run_study",
    "dummy_grid_counts",
    "results_frame",
    "write_results",
    "write_estimates",
    "write_frame",
    "ratio_table",
    "timing_table",
]
