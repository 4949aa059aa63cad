"""Seeded experiment harness: JSON configs in, CSV rows out."""

from .config import ExperimentConfig, config_from_dict, load_config
from .runner import (
    CSV_HEADER,
    ResultRow,
    rows_to_csv,
    run,
    run_correlation_sweep,
    run_grad_check,
    run_identifiability,
    run_noise_sweep,
    write_csv,
)

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ResultRow",
    "config_from_dict",
    "load_config",
    "rows_to_csv",
    "run",
    "run_correlation_sweep",
    "run_grad_check",
    "run_identifiability",
    "run_noise_sweep",
    "write_csv",
]
