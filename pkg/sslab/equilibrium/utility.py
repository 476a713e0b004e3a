"""Pathwise (stochastic) utility functions and the concavity checks built on them.

A UtilitySpec evaluates w U(x) path by path, where w is a positive state
weight: 1 for plain log/power utility, Z_T S_T^gamma for the representative
utility whose marginal at S_T is the deflator Z_T.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from sslab.exceptions import InvalidArgumentError, InsufficientDataError
from sslab.utils.statistics import DEFAULT_LEVEL, McEstimate, accumulate

logger = logging.getLogger(__name__)

UTILITY_KINDS = ('log', 'power', 'representative')
CHAIN_TOLERANCE = 1e-9


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise InvalidArgumentError('gamma must lie in (0, 1), got {}'.format(gamma))


@dataclass(frozen=True, eq=False)
class UtilitySpec:
    """Per-path utility w U(x).

    Attributes:
        kind (str): 'log', 'power' or 'representative' (power with state
            weight Z_T S_T^gamma).
        gamma (float): Power exponent in (0, 1); U(x) = x^(1-gamma)/(1-gamma).
        weights (np.ndarray, optional): State weight per path, 1 when None.
        name (str): Label used in reports and errors.
    """
    kind: str = 'log'
    gamma: float = 0.5
    weights: Optional[np.ndarray] = None
    name: str = 'U'

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise InvalidArgumentError('utility kind must be one of {}, got {!r}'
                                       .format(UTILITY_KINDS, self.kind))
        if self.kind != 'log':
            _check_gamma(self.gamma)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(~(w > 0)):
                raise InvalidArgumentError('{}: state weights must be strictly positive'
                                           .format(self.name))
            object.__setattr__(self, 'weights', w)

    @property
    def is_log(self) -> bool:
        return self.kind == 'log'

    def _w(self) -> np.ndarray:
        return 1.0 if self.weights is None else self.weights

    def value(self, x) -> np.ndarray:
        """w U(x); -inf where x <= 0."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore', invalid='ignore'):
            if self.is_log:
                u = np.log(x)
            else:
                u = np.power(x, 1.0 - self.gamma) / (1.0 - self.gamma)
            out = self._w() * u
        return np.where(x > 0, out, -np.inf)

    def marginal(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_log:
            return self._w() / x
        return self._w() * np.power(x, -self.gamma)

    def inverse_marginal(self, y) -> np.ndarray:
        """I(y) with w U'(I(y)) = y."""
        y = np.asarray(y, dtype=float)
        if self.is_log:
            return self._w() / y
        return np.power(self._w() / y, 1.0 / self.gamma)

    def restrict(self, rows) -> 'UtilitySpec':
        """Same utility on a subset of paths."""
        if self.weights is None:
            return self
        return UtilitySpec(self.kind, self.gamma, self.weights[rows], self.name)


def representative_utility(gamma: float, z_T, s_T) -> UtilitySpec:
    """U(x) = Z_T S_T^gamma x^(1-gamma) / (1-gamma), so that U'(S_T) = Z_T.

    Args:
        gamma (float): Exponent in (0, 1).
        z_T (array): Terminal deflator per path, > 0.
        s_T (array): Terminal price per path, > 0.

    Returns:
        UtilitySpec: Kind 'representative'.
    """
    _check_gamma(gamma)
    z = np.asarray(z_T, dtype=float)
    s = np.asarray(s_T, dtype=float)
    if z.shape != s.shape:
        raise InvalidArgumentError('z_T and s_T must have the same shape')
    if np.any(~(z > 0)) or np.any(~(s > 0)):
        raise InvalidArgumentError('z_T and s_T must be strictly positive')
    return UtilitySpec('representative', gamma, z * np.power(s, gamma), 'representative')


@dataclass(frozen=True)
class BeliefDecomposition:
    """Representative utility written as (dP*/dP) c U* with U*(x) = x^(1-gamma)/(1-gamma)."""
    density: np.ndarray
    normalizer: McEstimate
    bound: McEstimate
    pathwise_bound_holds: bool

    def density_mean(self) -> float:
        return float(np.mean(self.density))


def belief_decomposition(gamma: float, z_T, s_T) -> BeliefDecomposition:
    """Split Z_T S_T^gamma into a probability density and a constant.

    dP*/dP = Z_T S_T^gamma / E[Z_T S_T^gamma]; the normalizer is finite
    because S^gamma <= 1 + S pathwise, hence E[Z S^gamma] <= E[Z (1 + S)].
    """
    U = representative_utility(gamma, z_T, s_T)
    w = U.weights
    z = np.asarray(z_T, dtype=float)
    s = np.asarray(s_T, dtype=float)
    upper = z * (1.0 + s)
    return BeliefDecomposition(w / np.mean(w), accumulate(w), accumulate(upper),
                               bool(np.all(w <= upper)))


@dataclass(frozen=True)
class OptimalityGapReport:
    """Estimates of the concavity chain E[U(X_T)] <= E[U(S_T)] + E[Z X_T] - E[Z S_T] <= E[U(S_T)].

    Attributes:
        utility_gap: E[U(X_T) - U(S_T)].
        concavity_slack: E[U(X_T) - U(S_T) - Z (X_T - S_T)], <= 0 pathwise.
        budget_gap: E[Z X_T - Z S_T], <= 0 when ZS is a martingale and ZX a
            supermartingale.
        excluded (int): Paths with nonpositive candidate wealth.
        violations (int): Paths breaking the pathwise concavity inequality.
    """
    label: str
    utility_gap: McEstimate
    concavity_slack: McEstimate
    budget_gap: McEstimate
    excluded: int
    violations: int
    level: float = DEFAULT_LEVEL
    tolerance: float = 0.0

    def upper(self, est: McEstimate) -> float:
        return est.ci(self.level)[1] if est.stderr_defined else est.mean

    @property
    def passed(self) -> bool:
        return self.upper(self.utility_gap) <= self.tolerance and self.violations == 0


def optimality_gap(U: UtilitySpec, X_T, S_T, z_T, level: float = DEFAULT_LEVEL,
                   tolerance: float = 0.0, label: str = '') -> OptimalityGapReport:
    """Estimate every line of the concavity chain for a candidate wealth.

    Paths with X_T <= 0 have utility -inf; they are excluded and counted.
    """
    x = np.asarray(X_T, dtype=float)
    s = np.asarray(S_T, dtype=float)
    z = np.asarray(z_T, dtype=float)
    keep = x > 0
    excluded = int(x.size - keep.sum())
    if excluded:
        logger.warning('{}: {} path(s) with nonpositive wealth excluded'
                       .format(label or U.name, excluded))
    if keep.sum() < 2:
        raise InsufficientDataError('optimality gap needs at least two positive-wealth paths')
    Ur = U.restrict(keep)
    ux, us = Ur.value(x[keep]), Ur.value(s[keep])
    budget = z[keep] * (x[keep] - s[keep])
    slack = ux - us - budget
    scale = 1.0 + np.abs(us) + np.abs(budget)
    violations = int(np.sum(slack > CHAIN_TOLERANCE * scale))
    report = OptimalityGapReport(label or U.name, accumulate(ux - us), accumulate(slack),
                                 accumulate(budget), excluded, violations, level, tolerance)
    logger.debug('{}: utility gap {:.4g} +- {:.2g}, chain violations {}'
                 .format(report.label, report.utility_gap.mean, report.utility_gap.stderr,
                         violations))
    return report
