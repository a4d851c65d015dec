"""Batch recovery experiments: configuration, trial runner, CSV and SVG output."""
from .config import AXES, CellParams, ConfigError, ExperimentConfig, load_config, parse_config
from .harness import GridRunError, TrialRecord, derive_seed, run_grid, run_trial, success_rates
from .report import CSV_HEADER, heatmap_svg, read_csv, render_heatmap, write_csv

__all__ = [
    "AXES",
    "CellParams",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "GridRunError",
    "TrialRecord",
    "derive_seed",
    "run_grid",
    "run_trial",
    "success_rates",
    "CSV_HEADER",
    "heatmap_svg",
    "read_csv",
    "render_heatmap",
    "write_csv",
]
