"""Feasibility of (super)martingale measures and deflators on a lattice.

Equivalence to the reference measure is approximated by a margin: each LP
maximizes the smallest transition probability (or deflator value) t, and the
set counts as nonempty when t* >= epsilon.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from sslab.exceptions import InvalidArgumentError
from sslab.lattice.arbitrage_search import HIGHS_OPTIONS
from sslab.lattice.market_lattice import MarketLattice, MeasureVector

logger = logging.getLogger(__name__)

EQUIVALENCE_EPSILON = 1e-9


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    """Outcome of a feasibility LP.

    Attributes:
        feasible (bool): t* >= epsilon.
        margin (float): t*, -inf when the system is infeasible even at t = 0.
        epsilon (float): Equivalence level.
        measure (MeasureVector, optional): Feasible measure, if one was asked for.
        deflator (np.ndarray, optional): Feasible deflator values per node.
        infeasible_nodes (tuple): Nodes whose local system failed.
    """
    feasible: bool
    margin: float
    epsilon: float
    measure: Optional[MeasureVector] = None
    deflator: Optional[np.ndarray] = None
    infeasible_nodes: tuple = ()

    def __bool__(self) -> bool:
        return self.feasible


def _check_epsilon(lattice: MarketLattice, epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0 / lattice.branching:
        raise InvalidArgumentError('epsilon must lie in (0, 1/branching), got {}'.format(epsilon))


def _max_margin(c, A_ub, b_ub, A_eq, b_eq, bounds):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method='highs',
                  options=HIGHS_OPTIONS)
    if res.status != 0:
        return None, -np.inf
    return res.x, float(res.x[-1])


def max_margin_transitions(returns: np.ndarray, equality: bool):
    """Max-margin transition vector for one node; returns (q, margin)."""
    b = len(returns)
    c = np.zeros(b + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.eye(b), np.ones((b, 1))])
    b_ub = np.zeros(b)
    A_eq = [np.append(np.ones(b), 0.0)]
    b_eq = [1.0]
    if equality:
        A_eq.append(np.append(returns, 0.0))
        b_eq.append(0.0)
    else:
        A_ub = np.vstack([A_ub, np.append(returns, 0.0)])
        b_ub = np.append(b_ub, 0.0)
    x, margin = _max_margin(c, A_ub, b_ub, np.array(A_eq), np.array(b_eq),
                            [(0.0, 1.0)] * b + [(0.0, 1.0)])
    return (None if x is None else x[:b]), margin


def _find_measure(lattice: MarketLattice, epsilon: float, equality: bool,
                  label: str) -> FeasibilityResult:
    _check_epsilon(lattice, epsilon)
    returns = lattice.returns()
    q = np.empty((lattice.n_internal, lattice.branching))
    margins = np.empty(lattice.n_internal)
    for n in lattice.internal_nodes:
        row, margins[n] = max_margin_transitions(returns[n], equality)
        q[n] = np.nan if row is None else row
    bad = tuple(int(n) for n in np.flatnonzero(~(margins >= epsilon)))
    margin = float(margins.min())
    if bad:
        logger.debug('{}: no {}-equivalent solution at nodes {}'.format(label, epsilon, bad))
        return FeasibilityResult(False, margin, epsilon, infeasible_nodes=bad)
    q /= q.sum(axis=1, keepdims=True)
    return FeasibilityResult(True, margin, epsilon, MeasureVector(lattice, q, epsilon, label))


def find_supermartingale_measure(lattice: MarketLattice,
                                 epsilon: float = EQUIVALENCE_EPSILON) -> FeasibilityResult:
    """Q ~ P (transitions >= epsilon) under which S is a supermartingale.

    Args:
        lattice (MarketLattice): The market.
        epsilon (float): Equivalence level, in (0, 1/branching).

    Returns:
        FeasibilityResult: With the max-margin measure when feasible.
    """
    return _find_measure(lattice, epsilon, False, 'M_sup')


def find_martingale_measure(lattice: MarketLattice,
                            epsilon: float = EQUIVALENCE_EPSILON) -> FeasibilityResult:
    """Equality version of ``find_supermartingale_measure``."""
    return _find_measure(lattice, epsilon, True, 'M')


def find_local_martingale_measure(lattice: MarketLattice,
                                  epsilon: float = EQUIVALENCE_EPSILON) -> FeasibilityResult:
    """Martingale measure found as joint node probabilities over the whole tree.

    Independent of the node-by-node transition LP; on a finite tree both
    describe the same set.
    """
    _check_epsilon(lattice, epsilon)
    N, n_int = lattice.n_nodes, lattice.n_internal
    P = lattice.node_probabilities()
    kids = lattice.child_matrix()
    dS = lattice.price_changes()
    n_var = N + 1
    A_eq, b_eq = [], []
    root = np.zeros(n_var)
    root[0] = 1.0
    A_eq.append(root)
    b_eq.append(1.0)
    for n in range(n_int):
        mass = np.zeros(n_var)
        mass[kids[n]] = 1.0
        mass[n] = -1.0
        A_eq.append(mass)
        b_eq.append(0.0)
        drift = np.zeros(n_var)
        drift[kids[n]] = dS[n]
        A_eq.append(drift)
        b_eq.append(0.0)
    A_ub = np.zeros((N - 1, n_var))
    for j in range(1, N):
        A_ub[j - 1, j] = -1.0
        A_ub[j - 1, -1] = P[j]
    c = np.zeros(n_var)
    c[-1] = -1.0
    x, margin = _max_margin(c, A_ub, np.zeros(N - 1), np.array(A_eq), np.array(b_eq),
                            [(0.0, 1.0)] * N + [(0.0, 1.0)])
    if x is None or margin < epsilon:
        return FeasibilityResult(False, margin, epsilon)
    Q = x[:N]
    q = Q[kids] / Q[:n_int, None]
    return FeasibilityResult(True, margin, epsilon, MeasureVector(lattice, q, epsilon, 'M_loc'))


def find_deflator(lattice: MarketLattice, kind: str = 'sup',
                  epsilon: float = EQUIVALENCE_EPSILON) -> FeasibilityResult:
    """Strictly positive deflator Y with Y_0 = 1 and Y >= epsilon.

    ``kind='loc'``: Y and YS are martingales (Y (1 + H . S) a local martingale
    for every H). ``kind='sup'``: Y is a supermartingale and
    E[Y' (S' - S) | node] <= 0, i.e. Y (1 + H . S) is a supermartingale for
    every H >= 0.
    """
    if kind not in ('loc', 'sup'):
        raise InvalidArgumentError("kind must be 'loc' or 'sup', got {!r}".format(kind))
    _check_epsilon(lattice, epsilon)
    N, n_int = lattice.n_nodes, lattice.n_internal
    p = lattice.ref_probs
    kids = lattice.child_matrix()
    dS = lattice.price_changes()
    n_var = N + 1
    mass_rows, drift_rows = [], []
    for n in range(n_int):
        mass = np.zeros(n_var)
        mass[kids[n]] = p[n]
        mass[n] = -1.0
        mass_rows.append(mass)
        drift = np.zeros(n_var)
        drift[kids[n]] = p[n] * dS[n]
        drift_rows.append(drift)
    floor = np.zeros((N, n_var))
    floor[np.arange(N), np.arange(N)] = -1.0
    floor[:, -1] = 1.0
    root = np.zeros(n_var)
    root[0] = 1.0
    A_eq, b_eq = [root], [1.0]
    A_ub, b_ub = [floor], [np.zeros(N)]
    if kind == 'loc':
        A_eq += mass_rows + drift_rows
        b_eq += [0.0] * (2 * n_int)
    else:
        A_ub += [np.array(mass_rows), np.array(drift_rows)]
        b_ub += [np.zeros(n_int), np.zeros(n_int)]
    c = np.zeros(n_var)
    c[-1] = -1.0
    x, margin = _max_margin(c, np.vstack(A_ub), np.concatenate(b_ub), np.array(A_eq),
                            np.array(b_eq), [(0.0, None)] * N + [(0.0, 1.0)])
    if x is None or margin < epsilon:
        return FeasibilityResult(False, margin, epsilon)
    return FeasibilityResult(True, margin, epsilon, deflator=x[:N])
