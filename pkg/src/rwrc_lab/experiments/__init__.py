"""Config-driven experiment runs with deterministic result files."""

from rwrc_lab.experiments.config import (
    EXPERIMENT_KINDS,
    ExperimentConfig,
    ExperimentConfigError,
    PotentialSpec,
    experiment_schema,
    load_experiment,
    parse_experiment,
)
from rwrc_lab.experiments.output import ResultWriter, config_hash
from rwrc_lab.experiments.runner import (
    EXIT_CONFIG_ERROR,
    EXIT_FAILURE,
    EXIT_SUCCESS,
    run,
    run_file,
    run_mapping,
)
from rwrc_lab.experiments.slopes import Predictor, SlopeFit, TablePoint, compare_slopes

__all__ = [
    "EXIT_CONFIG_ERROR",
    "EXIT_FAILURE",
    "EXIT_SUCCESS",
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "ExperimentConfigError",
    "PotentialSpec",
    "Predictor",
    "ResultWriter",
    "SlopeFit",
    "TablePoint",
    "compare_slopes",
    "config_hash",
    "experiment_schema",
    "load_experiment",
    "parse_experiment",
    "run",
    "run_file",
    "run_mapping",
]
