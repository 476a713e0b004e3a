import logging
from dataclasses import dataclass

import numpy as np

from sslab.core.calculus import ito_integral
from sslab.exceptions import ContractViolationError, InvalidArgumentError
from sslab.core.path import Path, check_same_grid

logger = logging.getLogger(__name__)

ADMISSIBILITY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Strategy:
    """Holdings (shares of the risky asset) on a grid.

    Attributes:
        holdings (Path): H(t_i), used on (t_i, t_{i+1}].
        constrained (bool): Short sales banned, H >= 0 everywhere.
        floor (float): Admissibility floor a >= 0, (H . S) >= -a.
        label (str): Name used in reports.
    """
    holdings: Path
    constrained: bool = True
    floor: float = 1.0
    label: str = ''

    def __post_init__(self):
        if self.floor < 0:
            raise InvalidArgumentError('admissibility floor must be >= 0')

    def negative_samples(self) -> np.ndarray:
        """Paths (batch rows) carrying a negative holding sample."""
        h = np.where(self.holdings.exploded, 0.0, self.holdings.values)
        bad = (h < 0).any(axis=-1)
        return np.flatnonzero(np.atleast_1d(bad))

    def validate(self) -> None:
        if self.constrained:
            bad = self.negative_samples()
            if bad.size:
                raise ContractViolationError(
                    'constrained strategy {!r} has negative holdings on paths {}'
                    .format(self.label, bad[:10].tolist()))

    def admissibility_violations(self, wealth: Path, x0: float) -> np.ndarray:
        """Paths where the gain process drops below -floor."""
        gains = np.where(wealth.exploded, 0.0, wealth.values - x0)
        bad = (gains < -self.floor - ADMISSIBILITY_TOLERANCE).any(axis=-1)
        return np.flatnonzero(np.atleast_1d(bad))


def wealth_process(x0: float, H: Strategy, S: Path, check_floor: bool = True) -> Path:
    """Self-financing wealth x0 + (H . S).

    Raises:
        ContractViolationError: a constrained strategy holds a negative amount,
            or, with ``check_floor``, the gains drop below -H.floor on some path.
    """
    check_same_grid(H.holdings, S)
    H.validate()
    wealth = ito_integral(H.holdings, S)
    wealth = wealth.with_values(wealth.values + x0)
    bad = H.admissibility_violations(wealth, x0)
    if bad.size:
        message = 'strategy {!r} breaks its {}-admissibility floor on paths {}'.format(
            H.label, H.floor, bad[:10].tolist())
        if check_floor:
            raise ContractViolationError(message)
        logger.warning(message)
    return wealth
