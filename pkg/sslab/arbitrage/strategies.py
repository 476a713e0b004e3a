"""Families of (mostly short-sale constrained) trading strategies.

Each generated strategy starts from unit wealth and is self-financing on the
grid: holdings H_i are chosen at t_i and kept on (t_i, t_{i+1}].
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from sslab.core.calculus import time_integral
from sslab.core.path import Path, check_same_grid
from sslab.core.strategy import Strategy
from sslab.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def constant_fraction_wealth(S: Path, pi: float, x0: float = 1.0) -> Path:
    """Wealth that keeps the fraction ``pi`` in the stock, rebalanced at every grid time.

    V_{i+1} = V_i (1 + pi (S_{i+1} - S_i) / S_i).
    """
    values = np.atleast_2d(S.values)
    growth = 1.0 + pi * np.diff(values, axis=-1) / values[:, :-1]
    wealth = np.empty_like(values)
    wealth[:, 0] = x0
    np.cumprod(growth, axis=-1, out=wealth[:, 1:])
    wealth[:, 1:] *= x0
    return S.with_values(wealth.reshape(S.values.shape))


def constant_fraction_log_wealth(S: Path, theta: Path, pi: float, x0: float = 1.0) -> Path:
    """Continuously rebalanced log wealth when dS/S = theta dW + theta^2 dt.

    log V = log x0 + pi log(S/S_0) + pi (1 - pi) Q / 2 with Q = int theta^2 ds.
    """
    check_same_grid(S, theta)
    Q = time_integral(theta * theta)
    log_s = np.log(S.values / S.values[..., :1])
    return S.with_values(np.log(x0) + pi * log_s + 0.5 * pi * (1.0 - pi) * Q.values)


@dataclass(frozen=True)
class StrategyFamily:
    """Parameters generating a strategy family.

    Attributes:
        fractions (tuple): Constant fractions pi of wealth held in the stock.
        switch_times (tuple): Buy-then-switch rules: all-in until the time,
            cash afterwards.
        thresholds (tuple): Take-profit rules: all-in until S reaches
            ``threshold * S_0``, cash afterwards.
        constrained (bool): Only nonnegative holdings; fractions outside
            [0, inf) are rejected unless False.
    """
    fractions: Tuple[float, ...] = DEFAULT_FRACTIONS
    switch_times: Tuple[float, ...] = ()
    thresholds: Tuple[float, ...] = ()
    constrained: bool = True

    def __post_init__(self):
        if self.constrained and any(pi < 0 for pi in self.fractions):
            raise InvalidArgumentError('constrained family with negative fractions {}'
                                       .format([pi for pi in self.fractions if pi < 0]))
        if any(k <= 0 for k in self.thresholds):
            raise InvalidArgumentError('take-profit thresholds must be positive')

    def __len__(self) -> int:
        return len(self.fractions) + len(self.switch_times) + len(self.thresholds)

    def generate(self, S: Path) -> Iterator[Strategy]:
        """Strategies for the price paths ``S`` (one holding row per path)."""
        values = np.atleast_2d(S.values)
        s0 = values[:, :1]
        for pi in self.fractions:
            wealth = np.atleast_2d(constant_fraction_wealth(S, pi).values)
            holdings = pi * wealth / values
            yield self._make(S, holdings, 'pi={:g}'.format(pi), pi < 0)
        times = S.grid.times
        for t in self.switch_times:
            holdings = np.where(times[None, :] < t, 1.0 / s0, 0.0)
            yield self._make(S, holdings, 'switch@{:g}'.format(t), False)
        for k in self.thresholds:
            reached = np.maximum.accumulate(values, axis=-1) >= k * s0
            holdings = np.where(reached, 0.0, 1.0 / s0)
            yield self._make(S, holdings, 'take-profit@{:g}'.format(k), False)

    def _make(self, S: Path, holdings: np.ndarray, label: str, short: bool) -> Strategy:
        holdings = np.where(np.isfinite(holdings), holdings, 0.0)
        return Strategy(S.with_values(holdings.reshape(S.values.shape)),
                        constrained=self.constrained and not short, label=label)


def fraction_family(fractions: Sequence[float], constrained: Optional[bool] = None) -> StrategyFamily:
    if constrained is None:
        constrained = all(pi >= 0 for pi in fractions)
    return StrategyFamily(tuple(float(pi) for pi in fractions), constrained=constrained)
