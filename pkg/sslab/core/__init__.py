from .time_grid import TimeGrid, make_grid
from .path import Path
from .calculus import (ito_integral, quadratic_variation, covariation, time_integral,
                       stochastic_exponential)
from .brownian import sample_brownian, bridge_crossing_probability
from .strategy import Strategy, wealth_process
from sslab.exceptions import (InvalidArgumentError, ContractViolationError, InsufficientDataError,
                              MarketClearingError, ConvergenceError, ConfigError)

__all__ = [
    'TimeGrid',
    'make_grid',
    'Path',
    'ito_integral',
    'quadratic_variation',
    'covariation',
    'time_integral',
    'stochastic_exponential',
    'sample_brownian',
    'bridge_crossing_probability',
    'Strategy',
    'wealth_process',
    'InvalidArgumentError',
    'ContractViolationError',
    'InsufficientDataError',
    'MarketClearingError',
    'ConvergenceError',
    'ConfigError',
]
