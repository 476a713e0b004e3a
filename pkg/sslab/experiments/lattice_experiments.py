"""Finite-lattice duality: feasibility LPs against arbitrage searches, and utility conjugacy."""
import logging
from typing import List, Tuple

import numpy as np

from sslab.experiments.base_experiment import BaseExperiment
from sslab.lattice.duality import MIN_INSTANCES, lattice_family, verify_duality_theorem
from sslab.lattice.equilibrium import search_c_maximal_sum
from sslab.lattice.arbitrage_search import is_c_maximal
from sslab.lattice.market_lattice import MarketLattice, load_lattice, save_lattice
from sslab.lattice.utility import AgentProblem, conjugacy_gap, solve_constrained_utility

logger = logging.getLogger(__name__)

UTILITY_COLUMNS = ('instance_id', 'agent', 'primal', 'dual', 'y_star', 'gap', 'passed',
                   'c_maximal')
CLOSED_FORM_COLUMNS = ('case', 'up', 'down', 'p', 'pi', 'expected', 'error')
SEARCH_COLUMNS = ('trials', 'solved', 'individual_c_maximal', 'sum_c_maximal', 'counterexamples')

# (label, up, down, p, pi*) for a log agent on a one-period binomial lattice
LOG_CLOSED_FORMS = (
    ('symmetric', 2.0, 0.5, 0.5, 0.5),
    ('levered', 1.5, 0.9, 0.5, 4.0),
)


def utility_agents(gamma: float) -> List[AgentProblem]:
    return [AgentProblem('log', 1.0, name='log_C'),
            AgentProblem('power', 1.0, gamma, name='power_C'),
            AgentProblem('log', 1.0, constrained=False, name='log'),
            AgentProblem('power', 1.0, gamma, constrained=False, name='power')]


class LatticeDualityExperiment(BaseExperiment):
    name = 'lattice-duality'
    title = 'Lattice duality: measures, deflators and arbitrage'

    def _family(self) -> List[Tuple[str, MarketLattice]]:
        lat = self.config.lattice
        family = list(lattice_family(int(lat.get('n_random', 500)), seed=self.config.seed,
                                     max_depth=int(lat.get('max_depth', 3)),
                                     branchings=tuple(lat.get('branchings', (2, 3)))))
        if lat.get('grid', 'default') == 'none':
            family = [(i, lattice) for i, lattice in family if not i.startswith('grid-')]
        for filename in self.options.get('files', []):
            family.append(('file:' + filename, load_lattice(filename)))
        return family

    def _run(self) -> None:
        family = self._family()
        report = verify_duality_theorem(family)
        path = self.output_path('lattice_report.csv')
        report.write(path, self.header())
        self.add_artifact(path)
        logger.info('condition counts: {}'.format(report.counts()))
        self.claim('at least {} lattices classified'.format(MIN_INSTANCES),
                   report.n_instances >= MIN_INSTANCES, report.n_instances)
        self.claim('equivalences hold on every lattice', report.passed,
                   len(report.mismatches),
                   detail='mismatches: {}'.format([r.instance_id for r in report.mismatches]))
        self._save_mismatches(report.mismatches, dict(family))
        self._conjugacy(family)
        self._closed_forms()
        self._c_maximal_sum()

    def _save_mismatches(self, mismatches, lattices) -> None:
        for record in mismatches:
            filename = self.output_path('mismatch_{}.json'.format(record.instance_id))
            save_lattice(lattices[record.instance_id], filename)
            self.add_artifact(filename)

    def _conjugacy(self, family) -> None:
        n = int(self.options['utility_instances'])
        tolerance = float(self.options['conjugacy_tolerance'])
        rows = []
        worst, failures, not_maximal = 0.0, 0, 0
        for instance_id, lattice in family[:n]:
            for agent in utility_agents(self.config.gamma):
                conj = conjugacy_gap(lattice, agent)
                maximal = ''
                if agent.constrained and np.isfinite(conj.primal):
                    solution = solve_constrained_utility(lattice, agent)
                    maximal = is_c_maximal(lattice, solution.terminal_gain, agent.x).c_maximal
                    not_maximal += not maximal
                passed = bool(np.isinf(conj.primal) and np.isinf(conj.dual_infimum)
                              or conj.gap < tolerance)
                failures += not passed
                if np.isfinite(conj.gap):
                    worst = max(worst, conj.gap)
                rows.append((instance_id, agent.name, conj.primal, conj.dual_infimum, conj.y_star,
                             conj.gap, passed, maximal))
        self.claim('primal-dual conjugacy gap < {:g}'.format(tolerance), failures == 0, worst,
                   detail='{} failures over {} problems'.format(failures, len(rows)))
        self.claim('optimal constrained strategies are C-maximal', not_maximal == 0, not_maximal)
        self.write_artifact('utility_duality.csv', UTILITY_COLUMNS, rows)

    def _closed_forms(self) -> None:
        tolerance = float(self.options['closed_form_tolerance'])
        rows = []
        for label, up, down, p, expected in LOG_CLOSED_FORMS:
            lattice = MarketLattice.binomial(1.0, up, down, p)
            solution = solve_constrained_utility(lattice, AgentProblem('log', 1.0))
            pi = float(solution.fractions[0])
            self.claim('log agent pi* = {:g} on u={:g}, d={:g}'.format(expected, up, down),
                       abs(pi - expected) <= tolerance, pi)
            rows.append((label, up, down, p, pi, expected, abs(pi - expected)))
        self.write_artifact('closed_forms.csv', CLOSED_FORM_COLUMNS, rows)

    def _c_maximal_sum(self) -> None:
        trials = int(self.options.get('c_maximal_trials', 0))
        if trials < 1:
            return
        search = search_c_maximal_sum(trials, seed=self.config.seed)
        self.write_artifact('c_maximal_sum.csv', SEARCH_COLUMNS,
                            [(search.trials, search.solved, search.individual_c_maximal,
                              search.sum_c_maximal, len(search.counterexamples))])
