from .config import ExperimentConfig, parse_config_file
from .metrics import MetricsLog, Summary, aggregate, emit, rolling_mean
from .runner import build_world, run_experiment, run_seed

__all__ = [
    "ExperimentConfig",
    "parse_config_file",
    "MetricsLog",
    "Summary",
    "aggregate",
    "emit",
    "rolling_mean",
    "build_world",
    "run_experiment",
    "run_seed",
]
