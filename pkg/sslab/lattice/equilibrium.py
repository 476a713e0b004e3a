"""Multi-agent equilibrium on a lattice and the deflator patching built from it.

Leaf prices are the terminal payoff of the single risky asset (supply one
share); internal prices are found by tatonnement on the excess demand of the
agents' constrained optima.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from sslab.exceptions import ConvergenceError, InvalidArgumentError, MarketClearingError
from sslab.lattice.arbitrage_search import is_c_maximal
from sslab.lattice.feasibility import find_martingale_measure, find_supermartingale_measure
from sslab.lattice.market_lattice import MarketLattice, MeasureVector, random_lattice
from sslab.lattice.utility import (AgentProblem, DualSolution, UtilitySolution, solve_dual,
                                   solve_constrained_utility)

logger = logging.getLogger(__name__)

TATONNEMENT_DAMPING = 0.5
TATONNEMENT_MAX_ITER = 10000
TATONNEMENT_TOLERANCE = 1e-8
MIN_DAMPING = 1e-4
# fraction of the children's price range kept free at either end
PRICE_MARGIN = 1e-9
MARTINGALE_TOLERANCE = 1e-8
MAX_AGENTS = 3
MAX_EQUILIBRIUM_DEPTH = 3


def log_private_valuation(child_prices, probs) -> float:
    """Price at which a log agent wants to hold exactly its wealth in the asset."""
    return 1.0 / float(np.sum(np.asarray(probs) / np.asarray(child_prices)))


def initial_prices(lattice: MarketLattice) -> np.ndarray:
    """Reference expectation of the leaf payoff, node by node."""
    prices = np.array(lattice.prices, dtype=float)
    kids = lattice.child_matrix()
    for n in reversed(range(lattice.n_internal)):
        prices[n] = np.dot(lattice.ref_probs[n], prices[kids[n]])
    return prices


def _clip_to_children(prices: np.ndarray, lattice: MarketLattice) -> np.ndarray:
    kids = lattice.child_matrix()
    for n in reversed(range(lattice.n_internal)):
        lo, hi = prices[kids[n]].min(), prices[kids[n]].max()
        pad = PRICE_MARGIN * (hi - lo)
        prices[n] = np.clip(prices[n], lo + pad, hi - pad)
    return prices


@dataclass(frozen=True, eq=False)
class LatticeEquilibrium:
    """Solved prices and every agent's optimal plan at those prices."""
    lattice: MarketLattice
    agents: tuple
    solutions: tuple
    iterations: int
    excess_demand: np.ndarray

    @property
    def holdings(self) -> np.ndarray:
        """(n_agents, n_internal) share holdings."""
        return np.array([s.holdings for s in self.solutions])

    @property
    def clearing_residual(self) -> float:
        return float(np.max(np.abs(self.holdings.sum(axis=0) - 1.0)))

    def duals(self) -> List[DualSolution]:
        return [solve_dual(self.lattice, a, 1.0) for a in self.agents]


def _validate_agents(lattice: MarketLattice, agents: Sequence[AgentProblem]) -> None:
    if not 1 <= len(agents) <= MAX_AGENTS:
        raise InvalidArgumentError('between 1 and {} agents are supported, got {}'
                                   .format(MAX_AGENTS, len(agents)))
    if lattice.depth > MAX_EQUILIBRIUM_DEPTH:
        raise InvalidArgumentError('equilibrium lattices have depth <= {}, got {}'
                                   .format(MAX_EQUILIBRIUM_DEPTH, lattice.depth))
    kids = lattice.child_matrix()
    last = range(lattice.n_internal - lattice.branching ** (lattice.depth - 1), lattice.n_internal)
    flat = [n for n in last if np.ptp(lattice.prices[kids[n]]) == 0]
    if flat:
        raise InvalidArgumentError('terminal payoffs are constant below nodes {}'.format(flat))


def solve_equilibrium(lattice: MarketLattice, agents: Sequence[AgentProblem],
                      damping: float = TATONNEMENT_DAMPING,
                      max_iter: int = TATONNEMENT_MAX_ITER,
                      tolerance: float = TATONNEMENT_TOLERANCE) -> LatticeEquilibrium:
    """Clear the market for one share of the risky asset at every internal node.

    Agents' initial wealths are rescaled so that they sum to the solved S_0,
    keeping the proportions of ``agent.x``.

    Args:
        lattice (MarketLattice): Leaf prices (terminal payoff) and reference
            probabilities; internal prices are only a starting point ignored
            here.
        agents (sequence of AgentProblem): One to three agents.
        damping (float): Initial step of the log-price update; halved
            whenever the largest excess demand grows.
        max_iter (int): Iteration budget.
        tolerance (float): Required max |sum of holdings - 1|.

    Returns:
        LatticeEquilibrium

    Raises:
        ConvergenceError: Budget exhausted; diagnostics hold the last excess
            demand per node and the prices.
    """
    _validate_agents(lattice, agents)
    shares = np.array([a.x for a in agents], dtype=float)
    shares /= shares.sum()
    prices = _clip_to_children(initial_prices(lattice), lattice)
    n_int = lattice.n_internal
    last_error = np.inf
    excess = np.full(n_int, np.inf)
    logger.info('+------------------------------------------------+')
    logger.info('| Lattice equilibrium: {} agents, depth {}'.format(len(agents), lattice.depth))
    logger.info('+------------------------------------------------+')
    for it in range(1, max_iter + 1):
        current = lattice.with_prices(prices)
        priced = [a.with_wealth(w * current.s0) for a, w in zip(agents, shares)]
        solutions = [solve_constrained_utility(current, a) for a in priced]
        if not all(s.bounded for s in solutions):
            raise ConvergenceError('unbounded demand at iteration {}'.format(it),
                                   {'prices': prices.copy(), 'iteration': it})
        excess = np.sum([s.holdings for s in solutions], axis=0) - 1.0
        error = float(np.max(np.abs(excess)))
        if error < tolerance:
            logger.info('equilibrium after {} iterations, max excess demand {:.3g}'
                        .format(it, error))
            return LatticeEquilibrium(current, tuple(priced), tuple(solutions), it, excess)
        if error > last_error:
            damping = max(0.5 * damping, MIN_DAMPING)
        last_error = error
        prices[:n_int] *= np.exp(damping * excess)
        prices = _clip_to_children(prices, lattice)
        if it % 1000 == 0:
            logger.info('iteration {}: max excess demand {:.3g}, damping {}'
                        .format(it, error, damping))
    raise ConvergenceError('no equilibrium within {} iterations'.format(max_iter),
                           {'excess_demand': excess.copy(), 'prices': prices.copy(),
                            'damping': damping})


@dataclass(frozen=True, eq=False)
class PatchedLatticeDeflator:
    """Node-by-node splice of the agents' dual measures.

    ``owners[n]`` is the first agent with a positive holding at node n; the
    patched measure uses that agent's transitions there.
    """
    measure: MeasureVector
    owners: np.ndarray
    agent_drifts: np.ndarray
    tolerance: float

    @property
    def deflator(self) -> np.ndarray:
        """Y = dQ/dP per node, relative to the reference probabilities."""
        return self.measure.density()

    @property
    def max_drift(self) -> float:
        return float(np.max(np.abs(self.measure.drift() / self.measure.lattice.prices[
            :self.measure.lattice.n_internal])))

    @property
    def martingale(self) -> bool:
        return self.max_drift <= self.tolerance

    def off_set_failures(self) -> List[int]:
        """Per agent, nodes outside its holding set where its own measure has drift."""
        return [int(np.sum((self.owners != k) & (np.abs(d) > self.tolerance)))
                for k, d in enumerate(self.agent_drifts)]


def patch_lattice_deflators(equilibrium: LatticeEquilibrium,
                            tolerance: float = MARTINGALE_TOLERANCE) -> PatchedLatticeDeflator:
    """Splice the agents' dual optimizers on the sets where they hold the asset.

    Raises:
        MarketClearingError: Some node has no agent with a positive holding.
    """
    lattice = equilibrium.lattice
    duals = equilibrium.duals()
    if not all(d.feasible for d in duals):
        raise MarketClearingError('an agent has no dual optimizer at equilibrium prices')
    H = equilibrium.holdings
    positive = H > 0
    empty = np.flatnonzero(~positive.any(axis=0))
    if empty.size:
        raise MarketClearingError('no agent holds the asset at nodes {}'.format(empty.tolist()))
    owners = np.argmax(positive, axis=0)
    q = np.array([duals[k].measure.transitions[n] for n, k in enumerate(owners)])
    measure = MeasureVector(lattice, q, duals[0].measure.epsilon, 'patched')
    relative = [d.measure.drift() / lattice.prices[:lattice.n_internal] for d in duals]
    patched = PatchedLatticeDeflator(measure, owners, np.array(relative), tolerance)
    logger.info('patched deflator: owners {}, max relative drift {:.3g}'
                .format(np.bincount(owners, minlength=len(duals)).tolist(), patched.max_drift))
    return patched


@dataclass(frozen=True)
class RepresentativeAgentReport:
    applicable: bool
    max_deviation: float
    martingale: bool

    @property
    def passed(self) -> bool:
        return not self.applicable or (self.max_deviation <= 1e-6 and self.martingale)


def representative_agent_check(equilibrium: LatticeEquilibrium) -> RepresentativeAgentReport:
    """On a binomial lattice where every agent always holds a positive amount,
    every agent's dual measure is the unique martingale measure."""
    lattice = equilibrium.lattice
    if lattice.branching != 2 or not np.all(equilibrium.holdings > 0):
        return RepresentativeAgentReport(False, float('nan'), False)
    unique = find_martingale_measure(lattice)
    if not unique.feasible:
        return RepresentativeAgentReport(True, np.inf, False)
    duals = equilibrium.duals()
    deviation = max(float(np.max(np.abs(d.measure.transitions - unique.measure.transitions)))
                    for d in duals)
    martingale = all(d.measure.is_martingale(MARTINGALE_TOLERANCE * lattice.prices.max())
                     for d in duals)
    return RepresentativeAgentReport(True, deviation, martingale)


@dataclass
class CMaximalSumReport:
    """Counts from the randomized search; nothing here is asserted."""
    trials: int = 0
    solved: int = 0
    individual_c_maximal: int = 0
    sum_c_maximal: int = 0
    counterexamples: List[dict] = field(default_factory=list)


def search_c_maximal_sum(n_trials: int = 200, seed: int = 0, depth: int = 2,
                         branching: int = 3, n_agents: int = 2) -> CMaximalSumReport:
    """Is the sum of C-maximal strategies C-maximal? Randomized exploration.

    Each trial draws a lattice and log agents with random beliefs, solves
    their constrained problems and tests the individual and summed terminal
    gains for C-maximality.
    """
    rng = np.random.default_rng(seed)
    report = CMaximalSumReport()
    for _ in range(n_trials):
        report.trials += 1
        lattice = random_lattice(rng, depth, branching)
        if not find_supermartingale_measure(lattice).feasible:
            continue
        beliefs = [rng.dirichlet(np.full(branching, 2.0), size=lattice.n_internal)
                   for _ in range(n_agents)]
        beliefs = [np.clip(b, 0.05, None) / np.clip(b, 0.05, None).sum(axis=1, keepdims=True)
                   for b in beliefs]
        solutions: List[UtilitySolution] = [
            solve_constrained_utility(lattice, AgentProblem('log', 1.0, beliefs=b,
                                                            name='agent{}'.format(k)))
            for k, b in enumerate(beliefs)]
        if not all(s.bounded for s in solutions):
            continue
        report.solved += 1
        if all(is_c_maximal(lattice, s.terminal_gain, s.agent.x).c_maximal for s in solutions):
            report.individual_c_maximal += 1
        total = np.sum([s.terminal_gain for s in solutions], axis=0)
        if is_c_maximal(lattice, total, float(n_agents)).c_maximal:
            report.sum_c_maximal += 1
        else:
            report.counterexamples.append(lattice.to_dict())
    logger.info('C-maximal sums: {} of {} solved trials ({} with C-maximal summands)'
                .format(report.sum_c_maximal, report.solved, report.individual_c_maximal))
    return report


def equilibrium_report(equilibrium: LatticeEquilibrium,
                       patched: Optional[PatchedLatticeDeflator] = None) -> List[dict]:
    """Rows ``node,price,holding_<agent>...,owner`` for the CSV artifact."""
    rows = []
    for n in equilibrium.lattice.internal_nodes:
        row = {'node': int(n), 'price': float(equilibrium.lattice.prices[n])}
        for a, s in zip(equilibrium.agents, equilibrium.solutions):
            row['holding_' + a.name] = float(s.holdings[n])
        if patched is not None:
            row['owner'] = equilibrium.agents[int(patched.owners[n])].name
        rows.append(row)
    return rows
