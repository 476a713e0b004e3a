"""Finite event trees carrying one risky asset price.

Trees are non-recombining with a fixed branching factor and breadth-first
node ids: the root is 0 and the children of node i are b*i + 1, ..., b*i + b.
"""
import json
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence

import numpy as np

from sslab.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

MAX_DEPTH = 5
PROBABILITY_TOLERANCE = 1e-12
PRICE_FACTORS = (0.5, 0.8, 1.0, 1.25, 2.0)


def n_nodes_for(depth: int, branching: int) -> int:
    return (branching ** (depth + 1) - 1) // (branching - 1)


class MarketLattice:
    """Event tree with node prices and reference transition probabilities.

    Parameters:
    depth (int): Number of periods, 1 <= depth <= 5.
    branching (int): Children per internal node, >= 2.
    prices (array): Strictly positive price per node id.
    ref_probs (array): Shape (n_internal, branching); row n holds the
        transition probabilities from node n to its children.
    """

    def __init__(self, depth: int, branching: int, prices, ref_probs) -> None:
        if int(depth) != depth or not 1 <= depth <= MAX_DEPTH:
            raise InvalidArgumentError('depth must be an integer in [1, {}], got {}'
                                       .format(MAX_DEPTH, depth))
        if int(branching) != branching or branching < 2:
            raise InvalidArgumentError('branching must be an integer >= 2, got {}'
                                       .format(branching))
        self.depth = int(depth)
        self.branching = int(branching)
        self.prices = np.asarray(prices, dtype=float).copy()
        self.ref_probs = np.asarray(ref_probs, dtype=float).reshape(-1, self.branching).copy()
        self._validate()
        self.prices.setflags(write=False)
        self.ref_probs.setflags(write=False)

    def _validate(self) -> None:
        if self.prices.shape != (self.n_nodes,):
            raise InvalidArgumentError('expected {} node prices, got {}'
                                       .format(self.n_nodes, self.prices.shape))
        if self.ref_probs.shape != (self.n_internal, self.branching):
            raise InvalidArgumentError('expected reference probabilities of shape {}, got {}'
                                       .format((self.n_internal, self.branching),
                                               self.ref_probs.shape))
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise InvalidArgumentError('node prices must be finite and strictly positive')
        if np.any(self.ref_probs <= 0) or np.any(self.ref_probs >= 1):
            raise InvalidArgumentError('reference transition probabilities must lie in (0, 1)')
        if np.any(np.abs(self.ref_probs.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE):
            raise InvalidArgumentError('reference transition probabilities must sum to 1 per node')

    def __repr__(self) -> str:
        return 'MarketLattice(depth={}, branching={}, S0={})'.format(self.depth, self.branching,
                                                                     self.s0)

    @property
    def n_nodes(self) -> int:
        return n_nodes_for(self.depth, self.branching)

    @property
    def n_internal(self) -> int:
        return n_nodes_for(self.depth - 1, self.branching)

    @property
    def s0(self) -> float:
        return float(self.prices[0])

    @property
    def internal_nodes(self) -> np.ndarray:
        return np.arange(self.n_internal)

    @property
    def leaves(self) -> np.ndarray:
        return np.arange(self.n_internal, self.n_nodes)

    def children(self, node: int) -> np.ndarray:
        if not 0 <= node < self.n_internal:
            raise InvalidArgumentError('node {} has no children'.format(node))
        start = self.branching * node + 1
        return np.arange(start, start + self.branching)

    def child_matrix(self) -> np.ndarray:
        """(n_internal, branching) array of child ids."""
        return self.branching * self.internal_nodes[:, None] + 1 + np.arange(self.branching)

    def parent(self, node: int) -> int:
        if node <= 0:
            raise InvalidArgumentError('the root has no parent')
        return (node - 1) // self.branching

    def level(self, node: int) -> int:
        level, first = 0, 0
        while node >= first + self.branching ** level:
            first += self.branching ** level
            level += 1
        return level

    def ancestors(self, node: int) -> list:
        """Internal nodes on the path from the root to ``node`` (excluded)."""
        out = []
        while node > 0:
            node = self.parent(node)
            out.append(node)
        return out[::-1]

    def price_changes(self) -> np.ndarray:
        """S_child - S_node, shape (n_internal, branching)."""
        return self.prices[self.child_matrix()] - self.prices[:self.n_internal, None]

    def returns(self) -> np.ndarray:
        """S_child / S_node - 1, shape (n_internal, branching)."""
        return self.prices[self.child_matrix()] / self.prices[:self.n_internal, None] - 1.0

    def node_probabilities(self, transitions: Optional[np.ndarray] = None) -> np.ndarray:
        """Probability of reaching each node under the given (default reference) transitions."""
        q = self.ref_probs if transitions is None else np.asarray(transitions, dtype=float)
        prob = np.empty(self.n_nodes)
        prob[0] = 1.0
        kids = self.child_matrix()
        for n in self.internal_nodes:
            prob[kids[n]] = prob[n] * q[n]
        return prob

    def with_prices(self, prices) -> 'MarketLattice':
        return MarketLattice(self.depth, self.branching, prices, self.ref_probs)

    def to_dict(self) -> Dict:
        return {'depth': self.depth, 'branching': self.branching,
                'prices': self.prices.tolist(), 'ref_probs': self.ref_probs.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> 'MarketLattice':
        missing = [k for k in ('depth', 'branching', 'prices', 'ref_probs') if k not in data]
        if missing:
            raise InvalidArgumentError('lattice file lacks {}'.format(missing))
        prices = data['prices']
        if isinstance(prices, dict):
            prices = [prices[k] for k in sorted(prices, key=int)]
        return cls(data['depth'], data['branching'], prices, data['ref_probs'])

    @classmethod
    def from_factors(cls, s0: float, factors, probs, depth: int) -> 'MarketLattice':
        """Tree where every node moves by the same multiplicative factors."""
        factors = np.asarray(factors, dtype=float)
        b = len(factors)
        n = n_nodes_for(depth, b)
        n_int = n_nodes_for(depth - 1, b)
        prices = np.empty(n)
        prices[0] = s0
        for node in range(n_int):
            prices[b * node + 1:b * node + 1 + b] = prices[node] * factors
        return cls(depth, b, prices, np.tile(np.asarray(probs, dtype=float), (n_int, 1)))

    @classmethod
    def binomial(cls, s0: float = 1.0, up: float = 2.0, down: float = 0.5, p: float = 0.5,
                 depth: int = 1) -> 'MarketLattice':
        """Binomial tree; ``up`` and ``down`` are gross factors (up=2 doubles the price)."""
        return cls.from_factors(s0, (up, down), (p, 1.0 - p), depth)

    @classmethod
    def constant(cls, s0: float = 1.0, depth: int = 1, branching: int = 2) -> 'MarketLattice':
        return cls.from_factors(s0, np.ones(branching), np.full(branching, 1.0 / branching), depth)


def save_lattice(lattice: MarketLattice, filename: str) -> None:
    try:
        with open(filename, 'w') as outfile:
            json.dump(lattice.to_dict(), outfile, indent=2)
    except IOError as e:
        logger.error("Failed to write lattice file '{}': {}".format(filename, e))
        raise


def load_lattice(filename: str) -> MarketLattice:
    """Read a JSON file with ``depth, branching, prices, ref_probs`` (breadth-first ids)."""
    try:
        with open(filename) as infile:
            data = json.load(infile)
    except IOError as e:
        logger.error("Failed to read lattice file '{}': {}".format(filename, e))
        raise
    return MarketLattice.from_dict(data)


def random_lattice(rng: np.random.Generator, depth: int, branching: int,
                   factors: Sequence[float] = PRICE_FACTORS) -> MarketLattice:
    """Random tree whose one-step factors are drawn from a small discrete set.

    Drawing from a discrete set makes ties (children priced at or above the
    parent on every branch) common, so degenerate nodes are well represented.
    """
    n = n_nodes_for(depth, branching)
    n_int = n_nodes_for(depth - 1, branching)
    prices = np.empty(n)
    prices[0] = 1.0
    for node in range(n_int):
        kids = slice(branching * node + 1, branching * node + 1 + branching)
        prices[kids] = prices[node] * rng.choice(factors, size=branching)
    probs = rng.dirichlet(np.full(branching, 2.0), size=n_int)
    probs = np.clip(probs, 0.05, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return MarketLattice(depth, branching, prices, probs)


@dataclass(frozen=True, eq=False)
class MeasureVector:
    """Transition probabilities of a candidate measure Q, one row per internal node."""
    lattice: MarketLattice
    transitions: np.ndarray
    epsilon: float
    label: str = ''

    def __post_init__(self):
        q = np.asarray(self.transitions, dtype=float)
        if q.shape != (self.lattice.n_internal, self.lattice.branching):
            raise InvalidArgumentError('transitions must have shape (n_internal, branching)')
        object.__setattr__(self, 'transitions', q)

    @property
    def node_probabilities(self) -> np.ndarray:
        return self.lattice.node_probabilities(self.transitions)

    def density(self) -> np.ndarray:
        """dQ/dP at every node."""
        return self.node_probabilities / self.lattice.node_probabilities()

    def is_equivalent(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.transitions >= self.epsilon - tol))

    def drift(self) -> np.ndarray:
        """E_Q[S_child | node] - S_node per internal node."""
        return np.sum(self.transitions * self.lattice.price_changes(), axis=1)

    def is_martingale(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.drift()) <= tol))

    def is_supermartingale(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.drift() <= tol))


@dataclass(frozen=True, eq=False)
class TreeStrategy:
    """Holdings per internal node and the resulting gains (H . S) per node."""
    lattice: MarketLattice
    holdings: np.ndarray
    gains: np.ndarray
    label: str = ''

    @property
    def terminal_gains(self) -> np.ndarray:
        return self.gains[self.lattice.n_internal:]


def iter_one_period_grid(ups: Sequence[float], downs: Sequence[float],
                         p: float = 0.5) -> Iterator[MarketLattice]:
    for u in ups:
        for d in downs:
            if d < u:
                yield MarketLattice.binomial(1.0, u, d, p, depth=1)
