from .config import ExperimentConfig, EXPERIMENT_NAMES
from .base_experiment import BaseExperiment, ExperimentResult
from .catalog import (EXPERIMENTS, list_experiments, default_config, create_experiment,
                      run_experiment)
from .cli import main

__all__ = [
    'ExperimentConfig',
    'EXPERIMENT_NAMES',
    'BaseExperiment',
    'ExperimentResult',
    'EXPERIMENTS',
    'list_experiments',
    'default_config',
    'create_experiment',
    'run_experiment',
    'main',
]
