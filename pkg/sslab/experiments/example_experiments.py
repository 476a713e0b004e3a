"""Drift structure of the two short-sale economies and log-optimality of buy-and-hold."""
import logging
from typing import Dict, List, Optional

import numpy as np

from sslab.arbitrage.deflators import DeflatorReport, deflator_check, log_wealth_bound_check
from sslab.arbitrage.drift_tests import (MIN_PATHS, POSITIVE_TSTAT, REPORT_COLUMNS,
                                         DriftTestReport, conditional_supermartingale_test,
                                         supermartingale_test, window_drift_test)
from sslab.arbitrage.strategies import DEFAULT_FRACTIONS, constant_fraction_log_wealth, \
    fraction_family
from sslab.core.bundle import PathBundle
from sslab.core.path import Path
from sslab.core.time_grid import TimeGrid
from sslab.experiments.base_experiment import BaseExperiment
from sslab.monte_carlo.follmer import simulate_under_follmer_beta
from sslab.processes.reciprocal_bessel import PropParams, stop_at
from sslab.processes.scenarios import build_example_one, build_example_two, dump_scenario
from sslab.utils.random_number_generator import RandomSource
from sslab.utils.statistics import McEstimate, merge

logger = logging.getLogger(__name__)

LOG_OPTIMALITY_COLUMNS = ('pi', 'estimate', 'stderr', 'ci_lo', 'ci_hi', 'excluded', 'passed')
EQUALITY_SLACK = 1e-12


def stopped_price(bundle: PathBundle) -> Path:
    """S = 1/X stopped at tau, from a Follmer bundle carrying Y = 1/X."""
    Y = bundle['Y']
    idx = np.searchsorted(bundle.grid.times, bundle.tau)
    return Y.with_values(stop_at(np.atleast_2d(Y.values), idx))


def _max_tstat(report: DriftTestReport) -> float:
    z = np.array([np.nan if t is None else t for t in report.tstats], dtype=float)
    return float(np.nanmax(z)) if np.isfinite(z).any() else float('nan')


def _merged(current: Optional[DriftTestReport], report: DriftTestReport) -> DriftTestReport:
    return report if current is None else current.merge(report)


def window_drift(report: DriftTestReport, exposure: float, grid: TimeGrid) -> DriftTestReport:
    """Window drift report with bins merged up to ``exposure`` path-time each.

    Where the relative volatility of the price is one (S after tau in example
    two), one-step returns have mean and variance close to dt, so a bin
    carrying path-time E has an expected t-statistic near sqrt(E).
    """
    return report.coalesced(int(np.ceil(exposure * grid.n_steps / grid.T)))


class ExampleOneExperiment(BaseExperiment):
    name = 'example1'
    title = 'Example one: measure structure of S'

    def _run(self) -> None:
        cfg = self.config
        self.require_paths(MIN_PATHS, 'drift tests')
        params = PropParams.create(cfg.T, cfg.beta, cfg.n_steps)
        src = RandomSource(cfg.seed)
        drift_P = None
        deflator: Optional[DeflatorReport] = None
        identity = 0.0
        conditional_rows: List[tuple] = []
        family = fraction_family(DEFAULT_FRACTIONS, constrained=True)
        for k, idx in enumerate(self.chunks()):
            scenario = build_example_one(params, src, idx)
            if k == 0:
                self.add_artifact(dump_scenario(scenario, self.output_path('scenario.csv'),
                                                header=self.header(path_index=int(idx[0]))))
            bundle = scenario.to_bundle()
            identity = max(identity, float(np.max(np.abs(
                scenario.Z_primary.values * scenario.S.values - 1.0))))
            drift_P = _merged(drift_P, window_drift_test(
                bundle['S'], 0, scenario.tau_index, significance=cfg.significance,
                label='S|P,t<tau'))
            chunk_deflator = deflator_check('Z_secondary', 'S', family, bundle,
                                            significance=cfg.significance, min_paths=len(idx),
                                            label='Zbeta')
            deflator = chunk_deflator if deflator is None else deflator.merge(chunk_deflator)
            if k == 0 and self.options.get('conditional_levels'):
                conditional = conditional_supermartingale_test(
                    bundle, 'Z_secondary', n_levels=int(self.options['conditional_levels']),
                    significance=cfg.significance, min_paths=len(idx), label='Zbeta|level')
                conditional_rows = conditional.rows()

        drift_beta = None
        for idx in self.chunks(start=cfg.n_paths):
            bundle = simulate_under_follmer_beta(params.grid, src, params, idx)
            drift_beta = _merged(drift_beta, supermartingale_test(
                bundle, stopped_price, significance=cfg.significance, min_paths=len(idx),
                label='S|Pbeta'))

        drift_P = window_drift(drift_P, self.options['window_exposure'], params.grid)
        self.claim('S has positive drift on every bin before tau under P (t > {:g})'
                   .format(POSITIVE_TSTAT), drift_P.strictly_positive(), drift_P.min_tstat(),
                   detail='{} bins, t-statistics {}'.format(
                       drift_P.n_bins, np.round(drift_P.tstats, 2).tolist()))
        self.claim('S is a supermartingale under P^(beta)', drift_beta.passed,
                   _max_tstat(drift_beta), detail=drift_beta.summary())
        self.claim('Z^(1) S = 1 on every path', identity <= self.options['identity_tolerance'],
                   identity, detail='max |Z1 S - 1|')
        self.claim('Z^(beta) is a supermartingale deflator for long-only strategies',
                   deflator.passed, detail='failed: {}'.format(deflator.failed_strategies()))

        rows = drift_P.rows() + drift_beta.rows() + deflator.rows() + conditional_rows
        self.write_artifact('arbitrage.csv', REPORT_COLUMNS, rows)


class ExampleTwoExperiment(BaseExperiment):
    name = 'example2'
    title = 'Example two: log-optimality of holding S'

    def _run(self) -> None:
        cfg = self.config
        self.require_paths(MIN_PATHS, 'drift tests')
        params = PropParams.create(cfg.T, cfg.beta, cfg.n_steps)
        src = RandomSource(cfg.seed)
        fractions = [float(pi) for pi in self.options['fractions']]
        tolerance = float(self.options['tolerance'])
        estimates: Dict[float, McEstimate] = {pi: McEstimate() for pi in fractions}
        excluded = {pi: 0 for pi in fractions}
        drift = None
        for k, idx in enumerate(self.chunks()):
            scenario = build_example_two(params, src, idx)
            if k == 0:
                self.add_artifact(dump_scenario(scenario, self.output_path('scenario.csv'),
                                                header=self.header(path_index=int(idx[0]))))
            bundle = scenario.to_bundle()
            for pi in fractions:
                report = log_wealth_bound_check('Z_primary', _log_wealth(pi), bundle, tolerance,
                                                cfg.level, log_scale=True)
                estimates[pi] = merge(estimates[pi], report.estimate)
                excluded[pi] += report.excluded
            drift = _merged(drift, window_drift_test(
                bundle['S'], scenario.tau_index, params.grid.n_steps,
                significance=cfg.significance, label='S|P,t>tau'))

        rows = []
        for pi in fractions:
            est = estimates[pi]
            lo, hi = est.ci(cfg.level)
            passed = hi <= tolerance
            self.claim('E[log X_T] - E[log S_T] <= 0 at pi={:g}'.format(pi), passed, est.mean,
                       (lo, hi), '{} paths excluded'.format(excluded[pi]))
            if pi == 1.0:
                self.claim('E[log X_T] = E[log S_T] at pi=1',
                           abs(est.mean) <= (hi - lo) / 2.0 + EQUALITY_SLACK, est.mean, (lo, hi))
            rows.append((pi, est.mean, est.stderr, lo, hi, excluded[pi], passed))
        drift = window_drift(drift, self.options['window_exposure'], params.grid)
        self.claim('S has positive drift on every bin of (tau, T] under P (t > {:g})'
                   .format(POSITIVE_TSTAT), drift.strictly_positive(), drift.min_tstat(),
                   detail='{} bins, {} step returns, t-statistics {}'.format(
                       drift.n_bins, sum(e.n for e in drift.estimates),
                       np.round(drift.tstats, 2).tolist()))
        self.write_artifact('log_optimality.csv', LOG_OPTIMALITY_COLUMNS, rows)
        self.write_artifact('arbitrage.csv', REPORT_COLUMNS, drift.rows())


def _log_wealth(pi: float):
    def terminal_log_wealth(bundle: PathBundle) -> np.ndarray:
        return constant_fraction_log_wealth(bundle['S'], bundle['theta'], pi).terminal
    terminal_log_wealth.__name__ = 'log_wealth_pi={:g}'.format(pi)
    return terminal_log_wealth
