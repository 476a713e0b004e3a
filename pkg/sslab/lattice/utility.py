"""Expected utility maximization on a lattice and its dual.

The primal is solved by backward induction on the risky fraction pi of
wealth: for log and power utility the value function at every node is
a_n log W + b_n or c_n W^(1-gamma)/(1-gamma), so each node reduces to a
one-dimensional concave problem solved by root-finding on its first-order
condition.

The dual minimizes E[V(y Y_T)] over supermartingale deflators. On a finite
tree the optimal deflator is y dQ/dP for Q in the closure of M_sup, and the
objective separates over nodes; each node problem is a small smooth convex
program over transition vectors.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from sslab.exceptions import InvalidArgumentError
from sslab.lattice.arbitrage_search import find_arbitrage
from sslab.lattice.feasibility import EQUIVALENCE_EPSILON, max_margin_transitions
from sslab.lattice.market_lattice import MarketLattice, MeasureVector, TreeStrategy

logger = logging.getLogger(__name__)

FOC_TOLERANCE = 1e-10
ZERO_RETURN = 1e-14
DUAL_FTOL = 1e-15
DUAL_MAXITER = 500
DUAL_FLOOR = 1e-12
CONJUGACY_TOLERANCE = 1e-8
UTILITY_KINDS = ('log', 'power')


@dataclass(frozen=True)
class AgentProblem:
    """One investor on a lattice.

    Attributes:
        utility (str): 'log' or 'power'.
        x (float): Initial wealth, > 0.
        gamma (float): Power exponent in (0, 1); U(x) = x^(1-gamma)/(1-gamma).
        constrained (bool): Holdings must be nonnegative (no short sales).
        state_weights (tuple, optional): Positive weight per leaf; the agent
            maximizes E[w U(X_T)] (stochastic utility).
        beliefs (tuple, optional): Subjective transition probabilities, one
            row per internal node.
        name (str): Label used in reports.
    """
    utility: str = 'log'
    x: float = 1.0
    gamma: float = 0.5
    constrained: bool = True
    state_weights: Optional[tuple] = None
    beliefs: Optional[tuple] = None
    name: str = 'agent'

    def __post_init__(self):
        if self.utility not in UTILITY_KINDS:
            raise InvalidArgumentError('utility must be one of {}, got {!r}'
                                       .format(UTILITY_KINDS, self.utility))
        if not self.x > 0:
            raise InvalidArgumentError('initial wealth must be > 0, got {}'.format(self.x))
        if self.utility == 'power' and not 0.0 < self.gamma < 1.0:
            raise InvalidArgumentError('gamma must lie in (0, 1), got {}'.format(self.gamma))
        for name in ('state_weights', 'beliefs'):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(np.asarray(value, dtype=float).ravel()))

    def with_wealth(self, x: float) -> 'AgentProblem':
        return AgentProblem(self.utility, x, self.gamma, self.constrained, self.state_weights,
                            self.beliefs, self.name)

    def transitions(self, lattice: MarketLattice) -> np.ndarray:
        if self.beliefs is None:
            return np.asarray(lattice.ref_probs)
        q = np.asarray(self.beliefs).reshape(lattice.n_internal, lattice.branching)
        if np.any(q <= 0) or np.any(np.abs(q.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidArgumentError('{}: beliefs must be strictly positive and sum to 1 per node'
                                       .format(self.name))
        return q

    def leaf_weights(self, lattice: MarketLattice) -> np.ndarray:
        n_leaves = lattice.n_nodes - lattice.n_internal
        if self.state_weights is None:
            return np.ones(n_leaves)
        w = np.asarray(self.state_weights)
        if w.shape != (n_leaves,) or np.any(w <= 0):
            raise InvalidArgumentError('{}: expected {} strictly positive state weights'
                                       .format(self.name, n_leaves))
        return w

    def utility_of(self, wealth) -> np.ndarray:
        """U(wealth), -inf for nonpositive wealth."""
        w = np.asarray(wealth, dtype=float)
        with np.errstate(divide='ignore', invalid='ignore'):
            if self.utility == 'log':
                out = np.log(w)
            else:
                out = np.power(w, 1.0 - self.gamma) / (1.0 - self.gamma)
        return np.where(w > 0, out, -np.inf)

    def marginal(self, wealth) -> np.ndarray:
        w = np.asarray(wealth, dtype=float)
        return 1.0 / w if self.utility == 'log' else np.power(w, -self.gamma)


@dataclass(frozen=True, eq=False)
class UtilitySolution:
    """Optimal plan of one agent.

    ``value`` is +inf when the problem is unbounded; the plan fields are then
    None and ``witness`` holds an arbitrage strategy when one was found.
    """
    agent: AgentProblem
    lattice: MarketLattice
    value: float
    fractions: Optional[np.ndarray] = None
    holdings: Optional[np.ndarray] = None
    wealth: Optional[np.ndarray] = None
    witness: Optional[TreeStrategy] = None
    unbounded_nodes: tuple = ()

    @property
    def bounded(self) -> bool:
        return bool(np.isfinite(self.value))

    @property
    def terminal_wealth(self) -> Optional[np.ndarray]:
        return None if self.wealth is None else self.wealth[self.lattice.n_internal:]

    @property
    def terminal_gain(self) -> Optional[np.ndarray]:
        return None if self.wealth is None else self.terminal_wealth - self.agent.x

    def strategy(self) -> TreeStrategy:
        return TreeStrategy(self.lattice, self.holdings, self.wealth - self.agent.x, self.agent.name)


def _marginal_terms(kind: str, gamma: float, growth: np.ndarray) -> np.ndarray:
    return 1.0 / growth if kind == 'log' else np.power(growth, -gamma)


def _fraction_interval(r: np.ndarray, constrained: bool):
    """Open interval of fractions keeping 1 + pi r > 0 on every branch."""
    up, down = r[r > ZERO_RETURN], r[r < -ZERO_RETURN]
    lo = np.max(-1.0 / up) if up.size else -np.inf
    hi = np.min(-1.0 / down) if down.size else np.inf
    if constrained:
        lo = max(lo, 0.0)
    return lo, hi


def optimal_fraction(kind: str, gamma: float, weights: np.ndarray, r: np.ndarray,
                     constrained: bool) -> float:
    """argmax over pi of sum_c weights_c f(1 + pi r_c); +inf/-inf when unbounded.

    Returns 0 when every return vanishes.
    """
    if np.all(np.abs(r) <= ZERO_RETURN):
        return 0.0
    lo, hi = _fraction_interval(r, constrained)

    def slope(pi):
        return float(np.sum(weights * r * _marginal_terms(kind, gamma, 1.0 + pi * r)))

    if np.isinf(hi):
        return np.inf
    if np.isinf(lo):
        return -np.inf
    if constrained and lo == 0.0 and slope(0.0) <= 0.0:
        return 0.0
    left, right = lo, hi
    step = 0.5 * (hi - lo)
    for _ in range(200):
        left = lo + step
        if slope(left) > 0:
            break
        step *= 0.5
    step = 0.5 * (hi - lo)
    for _ in range(200):
        right = hi - step
        if slope(right) < 0:
            break
        step *= 0.5
    if slope(left) <= 0:
        return left
    if slope(right) >= 0:
        return right
    return brentq(slope, left, right, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_constrained_utility(lattice: MarketLattice, agent: AgentProblem) -> UtilitySolution:
    """Maximize E[w U(x + (H . S)_T)] over (constrained) strategies by backward induction.

    Args:
        lattice (MarketLattice): The market.
        agent (AgentProblem): Utility, wealth, constraint and beliefs.

    Returns:
        UtilitySolution: Value, optimal fraction and share holdings per
        internal node, wealth per node. Unbounded problems carry value +inf
        and an arbitrage witness.
    """
    p = agent.transitions(lattice)
    omega = agent.leaf_weights(lattice)
    kids = lattice.child_matrix()
    returns = lattice.returns()
    n_int = lattice.n_internal
    # a: coefficient of U(W); b: additive term (log only)
    a = np.empty(lattice.n_nodes)
    b = np.zeros(lattice.n_nodes)
    a[n_int:] = omega
    fractions = np.empty(n_int)
    unbounded = []
    for n in reversed(range(n_int)):
        c, r = kids[n], returns[n]
        w = p[n] * a[c]
        pi = optimal_fraction(agent.utility, agent.gamma, w, r, agent.constrained)
        if not np.isfinite(pi):
            unbounded.append(n)
            pi = 0.0
        fractions[n] = pi
        growth = 1.0 + pi * r
        if agent.utility == 'log':
            a[n] = np.sum(w)
            b[n] = np.sum(p[n] * (b[c] + a[c] * np.log(growth)))
        else:
            a[n] = np.sum(w * np.power(growth, 1.0 - agent.gamma))
    if unbounded:
        witness = find_arbitrage(lattice, agent.constrained)
        logger.info('{}: utility unbounded at nodes {}'.format(agent.name, sorted(unbounded)))
        return UtilitySolution(agent, lattice, np.inf, witness=witness,
                               unbounded_nodes=tuple(sorted(unbounded)))
    wealth = np.empty(lattice.n_nodes)
    wealth[0] = agent.x
    for n in range(n_int):
        wealth[kids[n]] = wealth[n] * (1.0 + fractions[n] * returns[n])
    holdings = fractions * wealth[:n_int] / lattice.prices[:n_int]
    if agent.utility == 'log':
        value = a[0] * np.log(agent.x) + b[0]
    else:
        value = a[0] * agent.x ** (1.0 - agent.gamma) / (1.0 - agent.gamma)
    return UtilitySolution(agent, lattice, float(value), fractions, holdings, wealth)


def expected_utility(lattice: MarketLattice, agent: AgentProblem, terminal_wealth) -> float:
    """E_agent[w U(X_T)] for a given terminal wealth per leaf."""
    P = lattice.node_probabilities(agent.transitions(lattice))[lattice.n_internal:]
    u = agent.utility_of(terminal_wealth)
    return float(np.sum(P * agent.leaf_weights(lattice) * u))


def foc_residuals(solution: UtilitySolution) -> np.ndarray:
    """Per-node first-order residual; zero at interior optima, <= 0 at pi = 0 bounds."""
    lattice, agent = solution.lattice, solution.agent
    p = agent.transitions(lattice)
    kids = lattice.child_matrix()
    returns = lattice.returns()
    P = lattice.node_probabilities(p)
    omega = agent.leaf_weights(lattice)
    # marginal value of wealth at every node: E[w U'(X_T) | node] propagated back
    m = np.empty(lattice.n_nodes)
    m[lattice.n_internal:] = omega * agent.marginal(solution.terminal_wealth)
    for n in reversed(range(lattice.n_internal)):
        m[n] = np.sum(p[n] * m[kids[n]] * (1.0 + solution.fractions[n] * returns[n]))
    res = np.array([np.sum(p[n] * m[kids[n]] * returns[n]) for n in lattice.internal_nodes])
    return res * P[:lattice.n_internal]


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Dual value v(y) and the optimizing deflator.

    ``value`` is +inf when the deflator cone has no strictly positive element.
    """
    agent: AgentProblem
    lattice: MarketLattice
    y: float
    value: float
    measure: Optional[MeasureVector] = None
    deflator: Optional[np.ndarray] = None

    @property
    def feasible(self) -> bool:
        return bool(np.isfinite(self.value))


def _dual_node(objective, jac, start: np.ndarray, returns: np.ndarray, equality: bool):
    b = len(start)
    constraints = [{'type': 'eq', 'fun': lambda q: np.sum(q) - 1.0,
                    'jac': lambda q: np.ones(b)}]
    price = {'type': 'eq' if equality else 'ineq',
             'fun': lambda q: -np.dot(q, returns), 'jac': lambda q: -returns}
    if np.any(np.abs(returns) > ZERO_RETURN):
        constraints.append(price)
    res = minimize(objective, start, jac=jac, method='SLSQP', bounds=[(DUAL_FLOOR, 1.0)] * b,
                   constraints=constraints,
                   options={'ftol': DUAL_FTOL, 'maxiter': DUAL_MAXITER})
    if not res.success:
        logger.debug('dual node solve: {}'.format(res.message))
    q = np.clip(res.x, 0.0, None)
    return q / q.sum()


def _dual_transitions(lattice: MarketLattice, agent: AgentProblem):
    """Backward pass; returns (transitions, root constant) or (None, None) when infeasible."""
    p = agent.transitions(lattice)
    omega = agent.leaf_weights(lattice)
    P = lattice.node_probabilities(p)
    kids = lattice.child_matrix()
    returns = lattice.returns()
    n_int = lattice.n_internal
    equality = not agent.constrained
    leaf = lattice.leaves
    # J holds the subtree mass (log) or the per-node minimum of sum q^-k J (power)
    J = np.empty(lattice.n_nodes)
    if agent.utility == 'log':
        J[leaf] = P[leaf] * omega
    else:
        k = (1.0 - agent.gamma) / agent.gamma
        J[leaf] = np.power(P[leaf], 1.0 + k) * np.power(omega, 1.0 / agent.gamma)
    q = np.empty((n_int, lattice.branching))
    for n in reversed(range(n_int)):
        c = kids[n]
        start, margin = max_margin_transitions(returns[n], equality)
        if start is None or margin < EQUIVALENCE_EPSILON:
            return None, None
        scale = J[c].max()
        weights = J[c] / scale
        if agent.utility == 'log':
            q[n] = _dual_node(lambda v: -np.sum(weights * np.log(v)),
                              lambda v: -weights / v, start, returns[n], equality)
            J[n] = J[c].sum()
        else:
            q[n] = _dual_node(lambda v: np.sum(weights * np.power(v, -k)),
                              lambda v: -k * weights * np.power(v, -k - 1.0),
                              start, returns[n], equality)
            J[n] = scale * np.sum(weights * np.power(q[n], -k))
    return q, J[0]


def solve_dual(lattice: MarketLattice, agent: AgentProblem, y: float = 1.0) -> DualSolution:
    """v(y) = inf over supermartingale deflators Y of E[V(w, y Y_T)].

    Args:
        lattice (MarketLattice): The market.
        agent (AgentProblem): Utility and constraint; the agent's wealth is unused.
        y (float): Dual variable, > 0.

    Returns:
        DualSolution: Value, optimal measure Q and deflator values
        y dQ/dP_agent per node.
    """
    if not y > 0:
        raise InvalidArgumentError('y must be > 0, got {}'.format(y))
    q, root = _dual_transitions(lattice, agent)
    if q is None:
        return DualSolution(agent, lattice, y, np.inf)
    measure = MeasureVector(lattice, q, EQUIVALENCE_EPSILON, 'dual:' + agent.name)
    P = lattice.node_probabilities(agent.transitions(lattice))
    Q = measure.node_probabilities
    deflator = y * Q / P
    leaf = lattice.leaves
    omega = agent.leaf_weights(lattice)
    if agent.utility == 'log':
        m = P[leaf] * omega
        value = np.sum(m * (np.log(omega / deflator[leaf]) - 1.0))
    else:
        k = (1.0 - agent.gamma) / agent.gamma
        value = y ** -k * agent.gamma / (1.0 - agent.gamma) * root
    return DualSolution(agent, lattice, y, float(value), measure, deflator)


@dataclass(frozen=True)
class ConjugacyReport:
    primal: float
    dual_infimum: float
    y_star: float
    gap: float

    @property
    def passed(self) -> bool:
        if np.isinf(self.primal) and np.isinf(self.dual_infimum):
            return True
        return bool(self.gap < CONJUGACY_TOLERANCE)


def conjugacy_gap(lattice: MarketLattice, agent: AgentProblem) -> ConjugacyReport:
    """Compare u(x) with inf over y of v(y) + x y.

    The dual optimizer Q does not depend on y, so v is evaluated along y
    from one dual solve.
    """
    primal = solve_constrained_utility(lattice, agent).value
    base = solve_dual(lattice, agent, 1.0)
    if not base.feasible:
        gap = 0.0 if np.isinf(primal) else np.inf
        return ConjugacyReport(primal, np.inf, float('nan'), gap)
    omega = agent.leaf_weights(lattice)
    mass = float(np.sum(lattice.node_probabilities(agent.transitions(lattice))[lattice.leaves]
                        * omega))
    x = agent.x
    if agent.utility == 'log':
        def v(y):
            return base.value - mass * np.log(y)
        guess = mass / x
    else:
        k = (1.0 - agent.gamma) / agent.gamma

        def v(y):
            return base.value * y ** -k
        guess = (k * base.value / x) ** (1.0 / (k + 1.0))
    res = minimize_scalar(lambda s: v(np.exp(s)) + x * np.exp(s),
                          bracket=(np.log(guess) - 1.0, np.log(guess) + 1.0),
                          method='brent', tol=1e-14)
    y_star = float(np.exp(res.x))
    dual_inf = float(res.fun)
    gap = abs(primal - dual_inf) if np.isfinite(primal) else np.inf
    logger.debug('{}: u={:.12g}, inf_y v+xy={:.12g}, gap={:.3g}'
                 .format(agent.name, primal, dual_inf, gap))
    return ConjugacyReport(float(primal), dual_inf, y_star, float(gap))
