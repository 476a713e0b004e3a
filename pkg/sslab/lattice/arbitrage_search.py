"""Linear programs over strategies on a lattice.

Every search maximizes the (normalized) total improvement over a target, so a
strictly positive optimum is a witness and a zero optimum proves there is none.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from sslab.lattice.market_lattice import MarketLattice, TreeStrategy

logger = logging.getLogger(__name__)

WITNESS_TOLERANCE = 1e-9
HIGHS_OPTIONS = {'primal_feasibility_tolerance': 1e-10, 'dual_feasibility_tolerance': 1e-10}


def gains_matrix(lattice: MarketLattice) -> np.ndarray:
    """A with (H . S) at node j equal to (A @ H)[j]; shape (n_nodes, n_internal)."""
    A = np.zeros((lattice.n_nodes, lattice.n_internal))
    dS = lattice.price_changes()
    kids = lattice.child_matrix()
    for n in lattice.internal_nodes:
        for k, child in enumerate(kids[n]):
            A[child] = A[n]
            A[child, n] = dS[n, k]
    return A


def _maximize(objective, A_ub, b_ub, bounds):
    res = linprog(-np.asarray(objective), A_ub=A_ub, b_ub=b_ub, bounds=bounds, method='highs',
                  options=HIGHS_OPTIONS)
    if res.status != 0:
        logger.debug('linprog status {}: {}'.format(res.status, res.message))
        return None, 0.0
    return res.x, -res.fun


def _improvement_search(lattice: MarketLattice, target_leaf: np.ndarray, constrained: bool,
                        every_node: bool = False, wealth_floor: Optional[float] = None,
                        label: str = '') -> Optional[TreeStrategy]:
    """Maximize sum(G_T - target) subject to G_T >= target and sum(G_T - target) <= 1."""
    A = gains_matrix(lattice)
    A_leaf = A[lattice.n_internal:]
    total = A_leaf.sum(axis=0)
    rows = [-A_leaf, total[None, :]]
    rhs = [-target_leaf, [1.0 + target_leaf.sum()]]
    if every_node:
        rows.append(-A[:lattice.n_internal])
        rhs.append(np.zeros(lattice.n_internal))
    if wealth_floor is not None:
        rows.append(-A)
        rhs.append(np.full(lattice.n_nodes, wealth_floor))
    bounds = [(0.0, None) if constrained else (None, None)] * lattice.n_internal
    H, value = _maximize(total, np.vstack(rows), np.concatenate(rhs), bounds)
    improvement = value - target_leaf.sum()
    if H is None or improvement <= WITNESS_TOLERANCE:
        return None
    H = np.where(np.abs(H) < 1e-14, 0.0, H)
    return TreeStrategy(lattice, H, A @ H, label)


def find_arbitrage(lattice: MarketLattice, constrained: bool) -> Optional[TreeStrategy]:
    """Strategy with terminal gain >= 0 everywhere and > 0 somewhere, or None.

    Args:
        lattice (MarketLattice): The market.
        constrained (bool): Restrict to nonnegative holdings.

    Returns:
        TreeStrategy or None: Witness of an (constrained) arbitrage.
    """
    target = np.zeros(lattice.n_nodes - lattice.n_internal)
    return _improvement_search(lattice, target, constrained, label='arbitrage')


def find_dominating_strategy(lattice: MarketLattice, constrained: bool) -> Optional[TreeStrategy]:
    """Strategy whose terminal gain weakly dominates buy-and-hold S_T - S_0, strictly somewhere."""
    target = lattice.prices[lattice.leaves] - lattice.s0
    return _improvement_search(lattice, target, constrained, label='dominance')


def find_unbounded_profit(lattice: MarketLattice, constrained: bool) -> Optional[TreeStrategy]:
    """Gain >= 0 at every node and > 0 at some leaf: scaling it gives unbounded profit
    with a fixed admissibility floor."""
    target = np.zeros(lattice.n_nodes - lattice.n_internal)
    return _improvement_search(lattice, target, constrained, every_node=True,
                               label='unbounded profit')


@dataclass(frozen=True, eq=False)
class CMaximality:
    c_maximal: bool
    witness: Optional[TreeStrategy] = None


def is_c_maximal(lattice: MarketLattice, terminal_gain, wealth: Optional[float] = None
                 ) -> CMaximality:
    """No constrained strategy weakly dominates ``terminal_gain`` with a strict gain somewhere.

    With ``wealth`` given, competitors must keep wealth + (H . S) >= 0 at every node.
    """
    target = np.asarray(terminal_gain, dtype=float)
    floor = None if wealth is None else float(wealth)
    witness = _improvement_search(lattice, target, True, wealth_floor=floor,
                                  label='C-dominance')
    return CMaximality(witness is None, witness)
