import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Tuple, Union

import numpy as np

from sslab.arbitrage.drift_tests import (MIN_PATHS, N_BINS, DriftTestReport, Extractor,
                                         drift_statistics, extract_path)
from sslab.arbitrage.strategies import StrategyFamily
from sslab.core.bundle import PathBundle
from sslab.core.strategy import wealth_process
from sslab.exceptions import ContractViolationError, InsufficientDataError
from sslab.utils.statistics import (DEFAULT_LEVEL, DEFAULT_TEST_SIGNIFICANCE, McEstimate,
                                    accumulate)

logger = logging.getLogger(__name__)

INITIAL_WEALTH = 1.0


@dataclass(frozen=True)
class DeflatorReport:
    """Supermartingale tests of Y (1 + H . S), one per strategy of a family."""
    deflator: str
    reports: Tuple[DriftTestReport, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def failed_strategies(self) -> List[str]:
        return [r.strategy for r in self.reports if not r.passed]

    def merge(self, other: 'DeflatorReport') -> 'DeflatorReport':
        return replace(self, reports=tuple(a.merge(b) for a, b in zip(self.reports, other.reports)))

    def rows(self) -> List[tuple]:
        return [row for r in self.reports for row in r.rows()]


def deflator_check(Y: Extractor, S: Extractor, family: StrategyFamily, bundle: PathBundle,
                   n_bins: int = N_BINS, significance: float = DEFAULT_TEST_SIGNIFICANCE,
                   min_paths: int = MIN_PATHS, label: str = '') -> DeflatorReport:
    """Test Y (1 + H . S) for supermartingale drift over every strategy H of ``family``.

    Raises:
        ContractViolationError: a strategy is not 1-admissible (or breaks the
            short-sale constraint) on some path.
    """
    y = extract_path(bundle, Y)
    s = extract_path(bundle, S)
    name = label or (Y if isinstance(Y, str) else getattr(Y, '__name__', 'Y'))
    reports = []
    for H in family.generate(s):
        wealth = wealth_process(INITIAL_WEALTH, H, s, check_floor=False)
        bad = H.admissibility_violations(wealth, INITIAL_WEALTH)
        if bad.size:
            raise ContractViolationError('strategy {!r} is not {}-admissible on path {}'
                                         .format(H.label, H.floor,
                                                 int(bundle.path_indices[bad[0]])))
        product = y * wealth
        if product.n_paths < min_paths:
            raise InsufficientDataError('deflator check needs at least {} paths'.format(min_paths))
        edges, estimates = drift_statistics(product, n_bins)
        report = DriftTestReport.from_estimates('deflator', '{}*(1+H.S)'.format(name), edges,
                                                estimates, False, significance, H.label)
        logger.info(report.summary())
        reports.append(report)
    return DeflatorReport(name, tuple(reports))


@dataclass(frozen=True)
class LogWealthReport:
    """Estimate of E[log(Z_T X_T)] and the paths excluded for nonpositive wealth."""
    estimate: McEstimate
    excluded: int
    tolerance: float
    level: float = DEFAULT_LEVEL

    @property
    def upper(self) -> float:
        return self.estimate.ci(self.level)[1] if self.estimate.stderr_defined \
            else self.estimate.mean

    @property
    def passed(self) -> bool:
        return bool(self.upper <= self.tolerance)


TerminalExtractor = Union[str, Callable[[PathBundle], np.ndarray]]


def log_wealth_bound_check(Z: TerminalExtractor, wealth: TerminalExtractor, bundle: PathBundle,
                           tolerance: float = 0.0, level: float = DEFAULT_LEVEL,
                           log_scale: bool = False) -> LogWealthReport:
    """E[log(Z_T X_T)] <= 0 for any wealth X dominated through the deflator Z.

    Args:
        Z: Terminal deflator values (process name or function of the bundle).
        wealth: Terminal wealth values; with ``log_scale`` the extractor
            returns log wealth directly.
        bundle (PathBundle): Simulated paths.
        tolerance (float): Pass iff the upper confidence end is at most this.
        level (float): Confidence level.
        log_scale (bool): ``wealth`` already returns log wealth.
    """
    z_T = bundle.extract(Z)
    w_T = bundle.extract(wealth)
    if log_scale:
        keep = np.isfinite(w_T) & (z_T > 0)
        values = np.log(z_T[keep]) + w_T[keep]
    else:
        keep = (w_T > 0) & (z_T > 0)
        values = np.log(z_T[keep] * w_T[keep])
    excluded = int(len(w_T) - keep.sum())
    if excluded:
        logger.warning('{} path(s) with nonpositive terminal wealth excluded'.format(excluded))
    if keep.sum() == 0:
        raise InsufficientDataError('no path with positive terminal wealth')
    report = LogWealthReport(accumulate(values), excluded, tolerance, level)
    logger.info('E[log(Z X)] = {:.6g}, upper {:.6g}: {}'
                .format(report.estimate.mean, report.upper, 'pass' if report.passed else 'FAIL'))
    return report
