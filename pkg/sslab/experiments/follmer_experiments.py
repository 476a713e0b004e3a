"""Defect of the strict local martingale Z^(1) against the true martingale Z^(beta)."""
import logging
from typing import Dict, List

import numpy as np

from sslab.experiments.base_experiment import BaseExperiment, binomial_row, estimate_row
from sslab.monte_carlo.follmer import (cutoff_sensitivity, defect_direct, defect_via_explosion,
                                       dump_paths, explosion_proportion, simulate_under_follmer1,
                                       simulate_under_follmer_beta)
from sslab.processes.reciprocal_bessel import PropParams, barrier_hit_probability, hitting_prob_p
from sslab.processes.scenarios import build_example_one
from sslab.utils.random_number_generator import RandomSource
from sslab.utils.statistics import (DEFAULT_RESOLUTION, McEstimate, accumulate, binomial_exact,
                                    merge_all, verify_equality, verify_strict)

logger = logging.getLogger(__name__)

FOLLMER_COLUMNS = ('measure', 'T', 'beta', 'n_paths', 'estimator', 'estimate', 'stderr', 'ci_lo',
                   'ci_hi', 'seed')
AGREEMENT_SIGMAS = 3.0


def defect_lower_bound(T: float) -> float:
    """p(T)^2 / (1 + p(T)), the proven lower bound on 1 - E[Z_T^(1)]."""
    p = hitting_prob_p(T)
    return p * p / (1.0 + p)


def within_sigmas(a: McEstimate, b: McEstimate, sigmas: float = AGREEMENT_SIGMAS) -> bool:
    return abs(a.mean - b.mean) <= sigmas * np.hypot(a.stderr, b.stderr)


class FollmerDefectExperiment(BaseExperiment):
    name = 'prop51'
    title = 'Follmer defect of Z^(1) and Z^(beta)'

    def _run(self) -> None:
        cfg = self.config
        params = PropParams.create(cfg.T, cfg.beta, cfg.n_steps)
        src = RandomSource(cfg.seed)
        rows: List[tuple] = []

        reference = self._reference(params, src, cfg.n_paths, start=0)
        via = self._follmer_one(params, src, cfg.n_paths, start=cfg.n_paths, dump=True)
        explosions = self._follmer_beta(params, src, start=2 * cfg.n_paths)

        for label, est in (('E[Z1_T]', reference['Z1']), ('E[Zbeta_T]', reference['Zbeta']),
                           ('defect_direct', reference['defect']), ('E[X_T]', reference['X'])):
            rows.append(self._row('P', cfg.T, cfg.beta, label, estimate_row(est, cfg.level)))
        rows.append(self._row('P1', cfg.T, cfg.beta, 'defect_via_explosion',
                              estimate_row(via, cfg.level)))
        rows.append(self._row('Pbeta', cfg.T, cfg.beta, 'explosion_rate',
                              binomial_row(explosions), explosions.trials))

        self.record(verify_strict(reference['Z1'], 1.0, '<', cfg.level, claim='E[Z_T^(1)] < 1'))
        bound = defect_lower_bound(cfg.T)
        defect = reference['defect']
        self.claim('defect exceeds p^2/(1+p) - 3 se',
                   defect.mean > bound - AGREEMENT_SIGMAS * defect.stderr, defect.mean,
                   defect.ci(cfg.level), 'bound {:.6f}'.format(bound))
        self.record(verify_equality(reference['Zbeta'], 1.0, cfg.level, DEFAULT_RESOLUTION,
                                    claim='E[Z_T^(beta)] = 1'))
        self.claim('no Follmer-beta explosions, upper bound < {:g}'
                   .format(self.options['explosion_bound']),
                   explosions.successes == 0 and explosions.upper < self.options['explosion_bound'],
                   explosions.point, (explosions.lower, explosions.upper),
                   '{} explosions in {} paths'.format(explosions.successes, explosions.trials))
        self.claim('defect_direct agrees with defect_via_explosion',
                   within_sigmas(defect, via), defect.mean - via.mean,
                   (-AGREEMENT_SIGMAS * np.hypot(defect.stderr, via.stderr),
                    AGREEMENT_SIGMAS * np.hypot(defect.stderr, via.stderr)))
        x_exact = 1.0 - hitting_prob_p(cfg.T)
        x_est = reference['X']
        self.claim('E[X_T] = 1 - p(T)',
                   abs(x_est.mean - x_exact) <= AGREEMENT_SIGMAS * x_est.stderr, x_est.mean,
                   x_est.ci(cfg.level), 'exact {:.6f}'.format(x_exact))

        rows.extend(self._barrier_oracle(src))
        rows.extend(self._sweep(src))
        rows.extend(self._cutoffs(params, src))
        self.write_artifact('follmer.csv', FOLLMER_COLUMNS, rows)

    def _row(self, measure, T, beta, estimator, values, n_paths=None) -> tuple:
        n = self.config.n_paths if n_paths is None else n_paths
        return (measure, T, beta, n, estimator) + tuple(values) + (self.config.seed,)

    def _reference(self, params: PropParams, src: RandomSource, n_paths: int,
                   start: int) -> Dict[str, McEstimate]:
        parts = {'Z1': [], 'Zbeta': [], 'defect': [], 'X': []}
        for idx in self.chunks(start, n_paths):
            scenario = build_example_one(params, src, idx)
            parts['Z1'].append(accumulate(scenario.Z_primary.terminal))
            parts['Zbeta'].append(accumulate(scenario.Z_secondary.terminal))
            parts['defect'].append(defect_direct(scenario.to_bundle()))
            parts['X'].append(accumulate(scenario.X.terminal))
        return {key: merge_all(values) for key, values in parts.items()}

    def _follmer_one(self, params: PropParams, src: RandomSource, n_paths: int,
                     start: int, dump: bool = False) -> McEstimate:
        parts = []
        n_dump = int(self.options.get('dump_paths', 0)) if dump else 0
        for idx in self.chunks(start, n_paths):
            bundle = simulate_under_follmer1(params.grid, src, params, idx)
            if n_dump and not parts:
                directory = self.output_path('paths')
                rows = range(min(n_dump, len(idx)))
                for path in dump_paths(bundle, directory, ['Y', 'Z'], rows):
                    self.add_artifact(path)
            parts.append(defect_via_explosion(bundle))
        return merge_all(parts)

    def _follmer_beta(self, params: PropParams, src: RandomSource, start: int):
        exploded = 0
        for idx in self.chunks(start):
            bundle = simulate_under_follmer_beta(params.grid, src, params, idx)
            exploded += int(explosion_proportion(bundle, self.config.level).successes)
        return binomial_exact(exploded, self.config.n_paths, self.config.level)

    def _barrier_oracle(self, src: RandomSource) -> List[tuple]:
        rows = []
        n = int(self.options['barrier_paths'])
        if n < 2:
            return rows
        for T in self.options['sweep_T']:
            est = barrier_hit_probability(T, int(self.options['sweep_steps']), src, n)
            exact = hitting_prob_p(T)
            se = est.as_estimate().stderr
            self.claim('p({:g}) matches barrier Monte Carlo'.format(T),
                       abs(est.point - exact) <= AGREEMENT_SIGMAS * se, est.point,
                       (est.lower, est.upper), 'exact {:.6f}'.format(exact))
            rows.append(self._row('P', T, '', 'p_barrier', binomial_row(est), n))
        return rows

    def _sweep(self, src: RandomSource) -> List[tuple]:
        rows = []
        n = int(self.options['sweep_paths'])
        if n < 2:
            return rows
        for T in self.options['sweep_T']:
            for beta in self.options['sweep_beta']:
                params = PropParams.create(T, beta, int(self.options['sweep_steps']))
                direct = self._reference(params, src, n, start=0)['defect']
                via = self._follmer_one(params, src, n, start=n)
                half = AGREEMENT_SIGMAS * np.hypot(direct.stderr, via.stderr)
                self.claim('defect estimators agree at T={:g}, beta={:g}'.format(T, beta),
                           within_sigmas(direct, via), direct.mean - via.mean, (-half, half))
                rows.append(self._row('P', T, beta, 'defect_direct',
                                      estimate_row(direct, self.config.level), n))
                rows.append(self._row('P1', T, beta, 'defect_via_explosion',
                                      estimate_row(via, self.config.level), n))
        return rows

    def _cutoffs(self, params: PropParams, src: RandomSource) -> List[tuple]:
        cutoffs = self.options.get('cutoffs') or []
        if not cutoffs:
            return []
        n = min(self.config.n_paths, self.config.chunk)
        results = cutoff_sensitivity(params.grid, src, params, cutoffs,
                                     np.arange(self.config.n_paths, self.config.n_paths + n))
        return [self._row('P1', params.T, params.beta, 'defect_cutoff={:g}'.format(c),
                          binomial_row(est), n) for c, est in results]
