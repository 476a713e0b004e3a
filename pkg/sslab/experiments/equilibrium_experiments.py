"""Aggregation, deflator patching and the representative agent."""
import logging
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np

from sslab.arbitrage.drift_tests import MIN_PATHS, REPORT_COLUMNS
from sslab.arbitrage.strategies import constant_fraction_log_wealth
from sslab.equilibrium.negishi import (AggregationCheck, aggregate_allocation, negishi_weights,
                                       verify_aggregation)
from sslab.equilibrium.patching import (PatchingCheck, patch_deflators, patching_drift_check,
                                        synthetic_two_agent_outcomes)
from sslab.equilibrium.utility import (OptimalityGapReport, UtilitySpec, belief_decomposition,
                                       optimality_gap, representative_utility)
from sslab.experiments.base_experiment import BaseExperiment
from sslab.lattice.equilibrium import (equilibrium_report, patch_lattice_deflators,
                                       representative_agent_check, solve_equilibrium)
from sslab.lattice.market_lattice import MarketLattice
from sslab.lattice.utility import AgentProblem
from sslab.processes.reciprocal_bessel import PropParams
from sslab.processes.scenarios import ExampleScenario, build_example_one, build_example_two
from sslab.utils.random_number_generator import RandomSource
from sslab.utils.statistics import merge

logger = logging.getLogger(__name__)

GAP_COLUMNS = ('candidate', 'gap', 'stderr', 'ci_lo', 'ci_hi', 'excluded', 'violations', 'passed')
GAP_TOLERANCE = 1e-9


def candidate_wealth(scenario: ExampleScenario, pi: float) -> np.ndarray:
    """Terminal wealth of the continuously rebalanced fraction ``pi`` from unit wealth."""
    return np.exp(constant_fraction_log_wealth(scenario.S, scenario.integrand(), pi).terminal)


def _merge_checks(current: Optional[Dict[str, AggregationCheck]], checks) -> Dict:
    if current is None:
        return {c.label: c for c in checks}
    return {c.label: replace(current[c.label], gap=merge(current[c.label].gap, c.gap),
                             excluded=current[c.label].excluded + c.excluded,
                             violations=current[c.label].violations + c.violations)
            for c in checks}


def _merge_gap(current: Optional[OptimalityGapReport],
               report: OptimalityGapReport) -> OptimalityGapReport:
    if current is None:
        return report
    return replace(current, utility_gap=merge(current.utility_gap, report.utility_gap),
                   concavity_slack=merge(current.concavity_slack, report.concavity_slack),
                   budget_gap=merge(current.budget_gap, report.budget_gap),
                   excluded=current.excluded + report.excluded,
                   violations=current.violations + report.violations)


class NegishiExperiment(BaseExperiment):
    name = 'negishi'
    title = 'Negishi aggregation'

    def _run(self) -> None:
        cfg = self.config
        params = PropParams.create(cfg.T, cfg.beta, cfg.n_steps)
        src = RandomSource(cfg.seed)
        shares = np.asarray(self.options['shares'], dtype=float)
        fractions = [float(pi) for pi in self.options['fractions']]
        checks = None
        roundtrip, invariance = 0.0, 0.0
        for idx in self.chunks():
            scenario = build_example_two(params, src, idx)
            z_T, s_T = scenario.Z_primary.terminal, scenario.S.terminal
            agents = [UtilitySpec('log', name='log'),
                      representative_utility(cfg.gamma, z_T, s_T)]
            optima = [share * s_T for share in shares[:len(agents)]]
            weights = negishi_weights(z_T, list(zip(agents, optima)))
            candidates = {'pi={:g}'.format(pi): candidate_wealth(scenario, pi)
                          for pi in fractions}
            report = verify_aggregation(weights, agents, z_T, s_T, candidates,
                                        generating_wealth=np.array(optima), level=cfg.level,
                                        tolerance=GAP_TOLERANCE)
            roundtrip = max(roundtrip, report.roundtrip_residual)
            base = aggregate_allocation(weights, s_T, agents)
            scaled = aggregate_allocation(weights.scaled(self.options['scale']), s_T, agents)
            invariance = max(invariance, float(np.max(np.abs(scaled.c - base.c) / base.c)))
            checks = _merge_checks(checks, report.checks)

        tolerance = float(self.options['roundtrip_tolerance'])
        self.claim('weights reproduce the individual optima', roundtrip <= tolerance, roundtrip,
                   detail='max relative error')
        self.claim('allocation is invariant to rescaling the weights', invariance <= tolerance,
                   invariance)
        violations = sum(c.violations for c in checks.values())
        self.claim('U(X;lambda) <= U(S;lambda) + Z (X - S) on every path', violations == 0,
                   violations)
        rows = []
        for label, check in checks.items():
            lo, hi = check.gap.ci(cfg.level)
            self.claim('E[U(X;lambda)] <= E[U(S;lambda)] at {}'.format(label), check.passed,
                       check.gap.mean, (lo, hi))
            rows.append((label, check.gap.mean, check.gap.stderr, lo, hi, check.excluded,
                         check.violations, check.passed))
        self.write_artifact('negishi.csv', GAP_COLUMNS, rows)


def _belief_agents(beliefs, lattice: MarketLattice) -> List[AgentProblem]:
    """Log agents with equal wealth and up-probability p_k at every node."""
    return [AgentProblem('log', 1.0, beliefs=np.tile([p, 1.0 - p], (lattice.n_internal, 1)),
                         name='agent{}'.format(k + 1))
            for k, p in enumerate(beliefs)]


class PatchingExperiment(BaseExperiment):
    name = 'patching'
    title = 'Deflator patching on holding sets'

    def _run(self) -> None:
        cfg = self.config
        self.require_paths(MIN_PATHS, 'drift tests')
        params = PropParams.create(cfg.T, cfg.beta, cfg.n_steps)
        src = RandomSource(cfg.seed)
        check: Optional[PatchingCheck] = None
        partition = True
        for idx in self.chunks():
            scenario = build_example_one(params, src, idx)
            outcomes = synthetic_two_agent_outcomes(scenario, float(self.options['switch']),
                                                    float(self.options['offset']))
            patched = patch_deflators(outcomes, scenario.W)
            partition &= patched.is_partition()
            chunk = patching_drift_check(patched, outcomes, scenario.W, scenario.S,
                                         scenario.to_bundle(), significance=cfg.significance,
                                         min_paths=len(idx))
            if check is None:
                check = chunk
            else:
                check = replace(check, patched=check.patched.merge(chunk.patched),
                                agents=tuple(a.merge(b) for a, b in zip(check.agents,
                                                                        chunk.agents)))

        self.claim('holding sets partition the horizon', partition)
        self.claim('patched Y S is a local martingale on every bin', check.patched.passed,
                   detail=check.patched.summary())
        failures = check.failures_off_set()
        self.claim('some Y^k S fails off its own holding set', any(failures),
                   detail='failing off-set bins per agent {}'.format(failures))
        rows = [row for report in check.reports() for row in report.rows()]
        self.write_artifact('arbitrage.csv', REPORT_COLUMNS, rows)
        self._lattice()

    def _lattice(self) -> None:
        depth = int(self.options['lattice_depth'])
        lattice = MarketLattice.binomial(1.0, float(self.options['lattice_up']),
                                         float(self.options['lattice_down']), 0.5, depth)
        eq = solve_equilibrium(lattice, _belief_agents(self.options['beliefs'], lattice))
        patched = patch_lattice_deflators(eq)
        self.claim('lattice price is a martingale under the patched deflator', patched.martingale,
                   patched.max_drift, detail='off-set drift nodes {}'
                   .format(patched.off_set_failures()))
        rows = equilibrium_report(eq, patched)
        self.write_artifact('lattice_patching.csv', list(rows[0]), rows)


class RepresentativeAgentExperiment(BaseExperiment):
    name = 'repr-agent'
    title = 'Representative agent'

    def _run(self) -> None:
        cfg = self.config
        params = PropParams.create(cfg.T, cfg.beta, cfg.n_steps)
        src = RandomSource(cfg.seed)
        fractions = [float(pi) for pi in self.options['fractions']]
        gaps: Dict[float, Optional[OptimalityGapReport]] = {pi: None for pi in fractions}
        marginal_error = 0.0
        bound_holds = True
        normalizer = bound = None
        for idx in self.chunks():
            scenario = build_example_one(params, src, idx)
            z_T, s_T = scenario.Z_primary.terminal, scenario.S.terminal
            U = representative_utility(cfg.gamma, z_T, s_T)
            marginal_error = max(marginal_error,
                                 float(np.max(np.abs(U.marginal(s_T) - z_T) / z_T)))
            beliefs = belief_decomposition(cfg.gamma, z_T, s_T)
            bound_holds &= beliefs.pathwise_bound_holds
            normalizer = beliefs.normalizer if normalizer is None else \
                merge(normalizer, beliefs.normalizer)
            bound = beliefs.bound if bound is None else merge(bound, beliefs.bound)
            for pi in fractions:
                report = optimality_gap(U, candidate_wealth(scenario, pi), s_T, z_T, cfg.level,
                                        GAP_TOLERANCE, 'pi={:g}'.format(pi))
                gaps[pi] = _merge_gap(gaps[pi], report)

        self.claim("U'(S_T) = Z_T", marginal_error <= float(self.options['marginal_tolerance']),
                   marginal_error, detail='max relative error')
        self.claim('Z S^gamma <= Z (1 + S) on every path, so the belief density normalizes',
                   bound_holds and normalizer.mean <= bound.mean, normalizer.mean,
                   normalizer.ci(cfg.level), 'bound {:.6g}'.format(bound.mean))
        rows = []
        for pi, report in gaps.items():
            lo, hi = report.utility_gap.ci(cfg.level)
            self.claim('holding S is optimal against pi={:g}'.format(pi), report.passed,
                       report.utility_gap.mean, (lo, hi),
                       '{} chain violations'.format(report.violations))
            rows.append((report.label, report.utility_gap.mean, report.utility_gap.stderr, lo, hi,
                         report.excluded, report.violations, report.passed))
        self.write_artifact('repr_agent.csv', GAP_COLUMNS, rows)
        self._lattice()

    def _lattice(self) -> None:
        depth = int(self.options['lattice_depth'])
        lattice = MarketLattice.binomial(1.0, 2.0, 0.5, 0.5, depth)
        agents = [AgentProblem('log', 1.0, name='log'),
                  AgentProblem('power', 1.0, self.config.gamma, name='power')]
        eq = solve_equilibrium(lattice, agents)
        check = representative_agent_check(eq)
        self.claim('every agent uses the unique deflator on the binomial lattice',
                   check.applicable and check.passed, check.max_deviation,
                   detail='applicable' if check.applicable else 'some holding is zero')
        rows = equilibrium_report(eq)
        self.write_artifact('lattice_equilibrium.csv', list(rows[0]), rows)
