"""Negishi weights and the aggregate (representative) utility U(x; lambda).

U(x; lambda) = max { sum_k lambda_k U_k(c_k) : c_1 + ... + c_n = x }, solved
path by path through the first-order system lambda_k U_k'(c_k) = mu.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from sslab.equilibrium.utility import CHAIN_TOLERANCE, UtilitySpec
from sslab.exceptions import InvalidArgumentError, InsufficientDataError
from sslab.utils.statistics import DEFAULT_LEVEL, McEstimate, accumulate

logger = logging.getLogger(__name__)

BISECTION_ITERATIONS = 200
BISECTION_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class NegishiWeights:
    """lambda_k per path, shape (n_agents, n_paths)."""
    values: np.ndarray

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.values, dtype=float))
        if np.any(~(lam > 0)):
            raise InvalidArgumentError('Negishi weights must be strictly positive')
        object.__setattr__(self, 'values', lam)

    @property
    def n_agents(self) -> int:
        return self.values.shape[0]

    @property
    def n_paths(self) -> int:
        return self.values.shape[1]

    def scaled(self, c) -> 'NegishiWeights':
        return NegishiWeights(self.values * c)

    def restrict(self, rows) -> 'NegishiWeights':
        return NegishiWeights(self.values[:, rows])


def negishi_weights(z_T, agents: Sequence[Tuple[UtilitySpec, np.ndarray]]) -> NegishiWeights:
    """lambda_k = Z_T / U_k'(X_T^k), path by path.

    Args:
        z_T (array): Terminal deflator per path.
        agents (sequence): (utility, optimal terminal wealth per path) per agent.

    Raises:
        InvalidArgumentError: Nonpositive wealth; the message names the agent
            and the first offending path.
    """
    z = np.asarray(z_T, dtype=float)
    rows = []
    for k, (U, wealth) in enumerate(agents):
        w = np.asarray(wealth, dtype=float)
        bad = np.flatnonzero(~(w > 0))
        if bad.size:
            raise InvalidArgumentError('agent {} ({}) has nonpositive terminal wealth on path {}'
                                       .format(k, U.name, int(bad[0])))
        rows.append(z / U.marginal(w))
    return NegishiWeights(np.array(rows))


@dataclass(frozen=True, eq=False)
class Allocation:
    """Optimal split c* (n_agents, n_paths) and multiplier mu* per path."""
    c: np.ndarray
    mu: np.ndarray
    total: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.c.sum(axis=0) - self.total) / self.total))


def aggregate_allocation(weights: NegishiWeights, x, agents: Sequence[UtilitySpec]) -> Allocation:
    """Solve x = sum_k c_k, lambda_k U_k'(c_k) = mu for every path.

    Bisection on log mu, bracketed by [min_k lambda_k U_k'(x), max_k lambda_k U_k'(x/n)].
    """
    n = len(agents)
    if n != weights.n_agents:
        raise InvalidArgumentError('{} weights for {} agents'.format(weights.n_agents, n))
    x = np.broadcast_to(np.asarray(x, dtype=float), (weights.n_paths,))
    if np.any(~(x > 0)):
        raise InvalidArgumentError('total wealth must be strictly positive')
    lam = weights.values
    at_total = np.array([lam[k] * U.marginal(x) for k, U in enumerate(agents)])
    at_share = np.array([lam[k] * U.marginal(x / n) for k, U in enumerate(agents)])
    lo, hi = np.log(at_total.min(axis=0)), np.log(at_share.max(axis=0))

    def demand(log_mu):
        mu = np.exp(log_mu)
        return np.array([U.inverse_marginal(mu / lam[k]) for k, U in enumerate(agents)])

    for _ in range(BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        excess = demand(mid).sum(axis=0) - x
        # demand decreases in mu
        lo = np.where(excess > 0, mid, lo)
        hi = np.where(excess > 0, hi, mid)
        if np.all(hi - lo < BISECTION_TOLERANCE):
            break
    log_mu = 0.5 * (lo + hi)
    return Allocation(demand(log_mu), np.exp(log_mu), np.array(x))


def aggregate_utility(x, weights: NegishiWeights, agents: Sequence[UtilitySpec]) -> np.ndarray:
    """U(x; lambda) per path."""
    alloc = aggregate_allocation(weights, x, agents)
    return np.sum([weights.values[k] * U.value(alloc.c[k]) for k, U in enumerate(agents)],
                  axis=0)


@dataclass(frozen=True)
class AggregationCheck:
    label: str
    gap: McEstimate
    excluded: int
    violations: int
    level: float = DEFAULT_LEVEL
    tolerance: float = 0.0

    @property
    def upper(self) -> float:
        return self.gap.ci(self.level)[1] if self.gap.stderr_defined else self.gap.mean

    @property
    def passed(self) -> bool:
        return self.upper <= self.tolerance and self.violations == 0


@dataclass(frozen=True)
class AggregationReport:
    checks: Tuple[AggregationCheck, ...]
    roundtrip_residual: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks)


def verify_aggregation(weights: NegishiWeights, agents: Sequence[UtilitySpec], z_T, s_T,
                       candidates: Dict[str, np.ndarray], generating_wealth=None,
                       level: float = DEFAULT_LEVEL, tolerance: float = 0.0) -> AggregationReport:
    """E[U(X_T; lambda)] <= E[U(S_T; lambda)] for every candidate wealth.

    Also counts paths breaking U(X;lambda) <= U(S;lambda) + Z (X - S) and,
    when the generating wealths are given, the largest relative error of
    the allocation round trip at total wealth S_T.
    """
    z = np.asarray(z_T, dtype=float)
    s = np.asarray(s_T, dtype=float)
    base = aggregate_allocation(weights, s, agents)
    u_s = np.sum([weights.values[k] * U.value(base.c[k]) for k, U in enumerate(agents)], axis=0)
    roundtrip = float('nan')
    if generating_wealth is not None:
        target = np.atleast_2d(np.asarray(generating_wealth, dtype=float))
        roundtrip = float(np.max(np.abs(base.c - target) / target))
    checks: List[AggregationCheck] = []
    for label, wealth in candidates.items():
        w = np.asarray(wealth, dtype=float)
        keep = w > 0
        if keep.sum() < 2:
            raise InsufficientDataError('candidate {!r} has fewer than two positive paths'
                                        .format(label))
        sub = [U.restrict(keep) for U in agents]
        u_x = aggregate_utility(w[keep], weights.restrict(keep), sub)
        budget = z[keep] * (w[keep] - s[keep])
        slack = u_x - u_s[keep] - budget
        scale = 1.0 + np.abs(u_s[keep]) + np.abs(budget)
        violations = int(np.sum(slack > CHAIN_TOLERANCE * scale))
        checks.append(AggregationCheck(label, accumulate(u_x - u_s[keep]),
                                       int(w.size - keep.sum()), violations, level, tolerance))
    report = AggregationReport(tuple(checks), roundtrip)
    logger.info('aggregation: {} candidates, {} chain violations, round trip {:.3g}'
                .format(len(checks), report.violations, roundtrip))
    return report
