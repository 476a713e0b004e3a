"""Splicing of agents' deflators on the sets where they hold the asset.

Deflators are carried as exponent integrands: agent k's deflator is
Y^k = E(-theta^k . W). On each grid cell the patched integrand is taken from
the first agent (in index order) holding a positive amount, so Y S is a
local martingale wherever every agent's own Y^k S is one on its holding set.
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sslab.arbitrage.drift_tests import (MIN_PATHS, N_BINS, DriftTestReport, Verdict,
                                         bin_indices, local_martingale_drift_test)
from sslab.core.bundle import PathBundle
from sslab.core.calculus import ito_integral, stochastic_exponential
from sslab.core.path import Path, check_same_grid
from sslab.exceptions import MarketClearingError
from sslab.processes.scenarios import ExampleScenario
from sslab.utils.statistics import DEFAULT_TEST_SIGNIFICANCE

logger = logging.getLogger(__name__)

CLEARING_TOLERANCE = 1e-12
SYNTHETIC_OFFSET = 1.0


@dataclass(frozen=True, eq=False)
class AgentOutcome:
    """One agent's equilibrium quantities on a batch of paths.

    Attributes:
        name (str): Agent label.
        holdings (Path): H^k(t_i), held on (t_i, t_{i+1}].
        integrand (Path): theta^k with Y^k = E(-theta^k . W).
        terminal_wealth (np.ndarray, optional): X_T^k per path.
    """
    name: str
    holdings: Path
    integrand: Path
    terminal_wealth: Optional[np.ndarray] = None

    def __post_init__(self):
        check_same_grid(self.holdings, self.integrand)
        if self.terminal_wealth is not None and np.any(~(self.terminal_wealth > 0)):
            raise MarketClearingError('{}: terminal wealth must be strictly positive'
                                      .format(self.name))


def deflator_from_integrand(theta: Path, W: Path) -> Path:
    """E(-theta . W) with left-point quadratic variation sum theta_i^2 dt_i."""
    check_same_grid(theta, W)
    N = ito_integral(theta, W)
    h = np.where(theta.exploded, 0.0, theta.values)[..., :-1]
    qv = np.zeros_like(N.values)
    np.cumsum(h * h * theta.grid.dt, axis=-1, out=qv[..., 1:])
    return stochastic_exponential(-N, N.with_values(qv))


def clearing_residual(outcomes: Sequence[AgentOutcome]) -> float:
    total = np.sum([np.atleast_2d(o.holdings.values)[:, :-1] for o in outcomes], axis=0)
    return float(np.nanmax(np.abs(total - 1.0)))


@dataclass(frozen=True, eq=False)
class PatchedDeflator:
    """owner[p, i] is the agent whose integrand is used on cell i of path p."""
    owner: np.ndarray
    integrand: Path
    N: Path
    Y: Path
    n_agents: int

    def sets(self) -> List[np.ndarray]:
        """D_k as boolean (n_paths, n_steps) masks."""
        return [self.owner == k for k in range(self.n_agents)]

    def is_partition(self) -> bool:
        cover = np.sum([d.astype(int) for d in self.sets()], axis=0)
        return bool(np.all(cover == 1))


def patch_deflators(outcomes: Sequence[AgentOutcome], W: Path) -> PatchedDeflator:
    """Compose N = sum_k 1_{D_k} . N^k with D_k = {H^k > 0} minus D_1..D_{k-1}, and Y = E(-N).

    Raises:
        MarketClearingError: A grid cell where no agent holds a positive amount.
    """
    residual = clearing_residual(outcomes)
    if residual > CLEARING_TOLERANCE:
        logger.warning('holdings do not clear the market: max residual {:.3g}'.format(residual))
    H = np.array([np.atleast_2d(o.holdings.values)[:, :-1] for o in outcomes])
    positive = H > 0
    held = positive.any(axis=0)
    if not held.all():
        rows, cells = np.nonzero(~held)
        raise MarketClearingError('no agent holds the asset on cell {} of path {}'
                                  .format(int(cells[0]), int(rows[0])))
    owner = np.argmax(positive, axis=0)
    thetas = np.array([np.atleast_2d(o.integrand.values) for o in outcomes])
    patched = np.take_along_axis(thetas[:, :, :-1], owner[None], axis=0)[0]
    values = np.concatenate([patched, patched[:, -1:]], axis=1)
    theta = outcomes[0].integrand.with_values(values.reshape(outcomes[0].integrand.values.shape))
    N = ito_integral(theta, W)
    Y = deflator_from_integrand(theta, W)
    logger.info('patched deflator: cells per agent {}'
                .format([int(np.sum(owner == k)) for k in range(len(outcomes))]))
    return PatchedDeflator(owner.reshape(H.shape[1:]), theta, N, Y, len(outcomes))


def synthetic_two_agent_outcomes(scenario: ExampleScenario, switch: float = 0.5,
                                 offset: float = SYNTHETIC_OFFSET) -> Tuple[AgentOutcome, ...]:
    """Two agents alternating the whole supply on an example economy.

    Agent 1 holds one share on [0, switch T], agent 2 afterwards. Each
    agent's integrand equals the market price of risk theta on its own
    holding set and theta + ``offset`` elsewhere, so Y^k S is a local
    martingale only on D_k and a strict supermartingale off it.
    """
    grid = scenario.grid
    theta = np.atleast_2d(scenario.integrand().values)
    first = np.broadcast_to(grid.times < switch * grid.T, theta.shape)
    outcomes = []
    for k, own in enumerate((first, ~first)):
        holdings = np.where(own, 1.0, 0.0)
        integrand = np.where(own, theta, theta + offset)
        shape = scenario.X.values.shape
        outcomes.append(AgentOutcome('agent{}'.format(k + 1),
                                     scenario.X.with_values(holdings.reshape(shape)),
                                     scenario.X.with_values(integrand.reshape(shape))))
    return tuple(outcomes)


@dataclass(frozen=True)
class PatchingCheck:
    """Drift tests of the patched Y S and of every agent's own Y^k S."""
    patched: DriftTestReport
    agents: Tuple[DriftTestReport, ...]
    off_set_bins: Tuple[Tuple[int, ...], ...]

    def failures_off_set(self) -> List[List[int]]:
        """Per agent, failing bins lying entirely outside its holding set."""
        return [[b for b in range(r.n_bins) if b in off and r.verdicts[b] is not Verdict.ZERO]
                for r, off in zip(self.agents, self.off_set_bins)]

    @property
    def passed(self) -> bool:
        """Patched Y S passes and some agent's Y^k S fails off its own set."""
        return self.patched.passed and any(self.failures_off_set())

    def reports(self) -> List[DriftTestReport]:
        return [self.patched] + list(self.agents)


def patching_drift_check(patched: PatchedDeflator, outcomes: Sequence[AgentOutcome], W: Path,
                         S: Path, bundle: PathBundle, n_bins: int = N_BINS,
                         significance: float = DEFAULT_TEST_SIGNIFICANCE,
                         min_paths: int = MIN_PATHS) -> PatchingCheck:
    """Two-sided drift tests of Y S and of Y^k S, with each agent's off-set bins."""
    processes = dict(bundle.processes)
    processes['YS'] = patched.Y * S
    idx = bin_indices(S.grid, n_bins)
    off = []
    for k, o in enumerate(outcomes):
        processes['Y{}S'.format(k + 1)] = deflator_from_integrand(o.integrand, W) * S
        own = patched.sets()[k]
        off.append(tuple(b for b, (lo, hi) in enumerate(zip(idx[:-1], idx[1:]))
                         if not own[:, lo:hi].any()))
    extended = replace(bundle, processes=processes)
    main = local_martingale_drift_test(extended, 'YS', n_bins, significance, min_paths,
                                       'Y*S')
    agents = tuple(local_martingale_drift_test(extended, 'Y{}S'.format(k + 1), n_bins,
                                               significance, min_paths,
                                               '{}:Y*S'.format(o.name))
                   for k, o in enumerate(outcomes))
    return PatchingCheck(main, agents, tuple(off))
