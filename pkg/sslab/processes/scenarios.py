"""The two short-sale economies built on X.

Example one: S = 1/Z1 with Z1 = X stopped at tau, so dS/S = X dW + X^2 dt
before tau and S is frozen afterwards.

Example two: the deflator integrand switches from X to the constant 1 after
tau, Z = E(-(X 1{t <= tau} + 1{t > tau}) . W), and S = 1/Z has strictly
positive drift on the whole horizon. Z^sup uses beta X before tau.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from sslab.core.bundle import MeasureTag, PathBundle
from sslab.core.path import Path
from sslab.processes.reciprocal_bessel import (PropParams, log_power_density, simulate_X,
                                               stop_at, stopping_index, x_squared_integral)
from sslab.utils.io import CsvOutfile, header_line
from sslab.utils.random_number_generator import RandomSource

logger = logging.getLogger(__name__)

SCENARIO_COLUMNS = ('t', 'X', 'L', 'Z_primary', 'Z_secondary', 'S', 'tau_fired')


class ScenarioVariant(Enum):
    EXAMPLE_ONE = 'example1'
    EXAMPLE_TWO = 'example2'


@dataclass(frozen=True, eq=False)
class ExampleScenario:
    """Realizations of one example economy.

    ``Z_primary`` is Z1 (example one) or Z (example two); ``Z_secondary`` is
    Z^beta or Z^sup. ``tau_index`` is n_steps + 1 on paths where tau never
    fires.
    """
    variant: ScenarioVariant
    params: PropParams
    X: Path
    W: Path
    I: Path
    L: Path
    tau: np.ndarray
    tau_index: np.ndarray
    Z_primary: Path
    Z_secondary: Path
    S: Path
    path_indices: np.ndarray

    @property
    def grid(self):
        return self.params.grid

    @property
    def n_paths(self) -> int:
        return self.X.n_paths

    def integrand(self) -> Path:
        """theta with dS/S = theta dW + theta^2 dt; theta_i applies on (t_i, t_{i+1}]."""
        n = self.grid.n_steps + 1
        before = np.arange(n) < np.atleast_1d(self.tau_index)[:, None]
        after = 1.0 if self.variant is ScenarioVariant.EXAMPLE_TWO else 0.0
        theta = np.where(before, np.atleast_2d(self.X.values), after)
        return self.X.with_values(theta.reshape(self.X.values.shape))

    def sde_residual(self) -> np.ndarray:
        """Per-step residual dS - S (theta dW + theta^2 dt); zero mean, O(dt) size."""
        theta = self.integrand().values[..., :-1]
        S = self.S.values
        dW = self.W.increments()
        return np.diff(S, axis=-1) - S[..., :-1] * (theta * dW + theta ** 2 * self.grid.dt)

    def to_bundle(self) -> PathBundle:
        """Reference-measure bundle of the scenario processes."""
        def batch(p: Path) -> Path:
            return p if p.is_batch else Path(p.grid, p.values[None, :])

        processes = {name: batch(getattr(self, name))
                     for name in ('X', 'W', 'I', 'L', 'Z_primary', 'Z_secondary', 'S')}
        processes['theta'] = batch(self.integrand())
        tau = np.atleast_1d(self.tau).astype(float)
        return PathBundle(MeasureTag.REFERENCE, self.grid, processes, tau,
                          np.full(tau.shape, np.inf), {'tau': np.isfinite(tau)},
                          path_indices=np.atleast_1d(self.path_indices))


def _build(variant: ScenarioVariant, params: PropParams, src: RandomSource,
           path_index) -> ExampleScenario:
    grid = params.grid
    X, W = simulate_X(grid, src, path_index)
    I = x_squared_integral(X)
    log_x = np.log(X.values)
    log_L = log_power_density(log_x, I.values, params.beta, params.beta - 1.0)
    L = X.with_values(np.exp(log_L))
    idx = stopping_index(L, params.threshold)
    log_z = stop_at(log_x, idx)
    log_zb = stop_at(log_power_density(log_x, I.values, params.beta, params.beta), idx)
    if variant is ScenarioVariant.EXAMPLE_TWO:
        times = np.broadcast_to(grid.times, W.values.shape)
        post = -(W.values - stop_at(W.values, idx)) - 0.5 * (times - stop_at(times, idx))
        log_z = log_z + post
        log_zb = log_zb + post
    times_inf = np.append(grid.times, np.inf)
    tau = times_inf[idx]
    Z = X.with_values(np.exp(log_z))
    scenario = ExampleScenario(
        variant=variant, params=params, X=X, W=W, I=I, L=L, tau=tau, tau_index=idx,
        Z_primary=Z, Z_secondary=X.with_values(np.exp(log_zb)),
        S=X.with_values(np.exp(-log_z)),
        path_indices=np.asarray(path_index))
    logger.debug('{} built for {} path(s), tau fired on {}'
                 .format(variant.value, scenario.n_paths, int(np.isfinite(tau).sum())))
    return scenario


def build_example_one(params: PropParams, src: RandomSource, path_index) -> ExampleScenario:
    """Example one: Z1 = X stopped at tau, Z^beta = E(-beta X 1(0,tau] . W), S = 1/Z1.

    Args:
        params (PropParams): T, beta, threshold and grid.
        src (RandomSource): Random streams.
        path_index (int or sequence of int): One realization or a batch.

    Returns:
        ExampleScenario: The realization(s).
    """
    return _build(ScenarioVariant.EXAMPLE_ONE, params, src, path_index)


def build_example_two(params: PropParams, src: RandomSource, path_index) -> ExampleScenario:
    """Example two: unit deflator integrand after tau, S = 1/Z."""
    return _build(ScenarioVariant.EXAMPLE_TWO, params, src, path_index)


def dump_scenario(scenario: ExampleScenario, filename: str, row: int = 0,
                  header: Optional[str] = None) -> str:
    """Write one realization as ``t,X,L,Z_primary,Z_secondary,S,tau_fired``."""
    if header is None:
        header = header_line(variant=scenario.variant.value, T=scenario.params.T,
                             beta=scenario.params.beta,
                             path_index=int(np.atleast_1d(scenario.path_indices)[row]))
    paths = [getattr(scenario, name).row(row).values
             for name in ('X', 'L', 'Z_primary', 'Z_secondary', 'S')]
    tau = float(np.atleast_1d(scenario.tau)[row])
    times = scenario.grid.times
    out = CsvOutfile(filename, SCENARIO_COLUMNS, header)
    out.initialize()
    out.write_rows((t,) + tuple(float(p[i]) for p in paths) + (bool(t >= tau),)
                   for i, t in enumerate(times))
    logger.info('scenario dump written to {}'.format(filename))
    return filename
