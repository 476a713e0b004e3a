import copy
import logging
from typing import Dict, List, Tuple, Type

from sslab.experiments.base_experiment import BaseExperiment, ExperimentResult
from sslab.experiments.config import EXPERIMENT_NAMES, ExperimentConfig
from sslab.experiments.defaults import experiment_parameters
from sslab.experiments.equilibrium_experiments import (NegishiExperiment, PatchingExperiment,
                                                       RepresentativeAgentExperiment)
from sslab.experiments.example_experiments import ExampleOneExperiment, ExampleTwoExperiment
from sslab.experiments.follmer_experiments import FollmerDefectExperiment
from sslab.experiments.lattice_experiments import LatticeDualityExperiment
from sslab.exceptions import ConfigError

logger = logging.getLogger(__name__)

EXPERIMENTS: Dict[str, Type[BaseExperiment]] = {
    cls.name: cls for cls in (FollmerDefectExperiment, ExampleOneExperiment, ExampleTwoExperiment,
                              LatticeDualityExperiment, NegishiExperiment, PatchingExperiment,
                              RepresentativeAgentExperiment)
}


def list_experiments() -> List[Tuple[str, str]]:
    """(name, claim) for every experiment, in catalog order."""
    return [(name, experiment_parameters[name]['claim']) for name in EXPERIMENT_NAMES]


def default_config(name: str) -> ExperimentConfig:
    """ExperimentConfig with the experiment's default sizes and options."""
    if name not in experiment_parameters:
        raise ConfigError(['experiment: unknown {!r}, expected one of {}'
                           .format(name, EXPERIMENT_NAMES)])
    params = experiment_parameters[name]
    return ExperimentConfig(experiment=name, options=copy.deepcopy(params['options']),
                            **params['config'])


def create_experiment(config: ExperimentConfig) -> BaseExperiment:
    config.validate()
    defaults = experiment_parameters[config.experiment]['options']
    return EXPERIMENTS[config.experiment](config, copy.deepcopy(defaults))


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    return create_experiment(config).run()
