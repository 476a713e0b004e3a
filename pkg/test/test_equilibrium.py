import numpy as np
import pytest

from sslab.equilibrium.negishi import (NegishiWeights, aggregate_allocation, aggregate_utility,
                                       negishi_weights, verify_aggregation)
from sslab.equilibrium.patching import (AgentOutcome, deflator_from_integrand, patch_deflators,
                                        patching_drift_check, synthetic_two_agent_outcomes)
from sslab.equilibrium.utility import (UtilitySpec, belief_decomposition, optimality_gap,
                                       representative_utility)
from sslab.exceptions import InvalidArgumentError, MarketClearingError
from sslab.processes.reciprocal_bessel import PropParams
from sslab.processes.scenarios import build_example_one
from sslab.utils.random_number_generator import RandomSource


@pytest.fixture(scope='module')
def market():
    rng = np.random.default_rng(0)
    z = rng.lognormal(0.0, 0.5, 500)
    s = rng.lognormal(0.0, 0.5, 500)
    return z, s


def test_utility_marginal_and_inverse():
    for U in (UtilitySpec('log'), UtilitySpec('power', 0.3),
              UtilitySpec('representative', 0.5, np.array([2.0, 3.0]))):
        x = np.array([0.5, 4.0])
        assert np.allclose(U.inverse_marginal(U.marginal(x)), x)
    assert UtilitySpec('log').value(np.array([-1.0]))[0] == -np.inf
    with pytest.raises(InvalidArgumentError):
        UtilitySpec('power', 1.0)
    with pytest.raises(InvalidArgumentError):
        UtilitySpec('log', weights=np.array([1.0, 0.0]))


def test_representative_marginal_is_deflator(market):
    z, s = market
    U = representative_utility(0.4, z, s)
    assert np.allclose(U.marginal(s), z, rtol=1e-12)
    with pytest.raises(InvalidArgumentError):
        representative_utility(0.4, z, -s)


def test_belief_decomposition_bound(market):
    z, s = market
    beliefs = belief_decomposition(0.5, z, s)
    assert beliefs.pathwise_bound_holds
    assert beliefs.density_mean() == pytest.approx(1.0)
    assert beliefs.normalizer.mean <= beliefs.bound.mean


def test_concavity_chain_has_no_violations(market):
    z, s = market
    U = representative_utility(0.5, z, s)
    for factor in (0.25, 0.9, 1.5):
        report = optimality_gap(U, factor * s, s, z, label='x{}'.format(factor))
        assert report.violations == 0
        assert report.concavity_slack.mean <= 0.0


def test_optimality_gap_excludes_ruined_paths(market):
    z, s = market
    x = s.copy()
    x[:3] = -1.0
    report = optimality_gap(UtilitySpec('log'), x, s, z)
    assert report.excluded == 3


def test_negishi_round_trip(market):
    z, s = market
    agents = [UtilitySpec('log', name='log'), representative_utility(0.5, z, s)]
    optima = [0.4 * s, 0.6 * s]
    weights = negishi_weights(z, list(zip(agents, optima)))
    assert weights.n_agents == 2 and weights.n_paths == 500
    alloc = aggregate_allocation(weights, s, agents)
    assert np.max(np.abs(alloc.c - np.array(optima)) / np.array(optima)) < 1e-10
    assert alloc.residual < 1e-10
    assert np.allclose(alloc.mu, z, rtol=1e-9)


def test_weights_are_scale_invariant(market):
    z, s = market
    agents = [UtilitySpec('log'), UtilitySpec('power', 0.5)]
    weights = negishi_weights(z, [(agents[0], 0.3 * s), (agents[1], 0.7 * s)])
    base = aggregate_allocation(weights, s, agents)
    scaled = aggregate_allocation(weights.scaled(3.0), s, agents)
    assert np.allclose(base.c, scaled.c, rtol=1e-10)
    value = aggregate_utility(s, weights, agents)
    assert value.shape == (500,)


def test_negishi_rejects_nonpositive_wealth(market):
    z, s = market
    wealth = s.copy()
    wealth[7] = 0.0
    with pytest.raises(InvalidArgumentError, match='path 7'):
        negishi_weights(z, [(UtilitySpec('log', name='log'), wealth)])
    with pytest.raises(InvalidArgumentError):
        NegishiWeights(np.array([[1.0, -1.0]]))


def test_aggregation_chain(market):
    z, s = market
    agents = [UtilitySpec('log'), representative_utility(0.5, z, s)]
    optima = np.array([0.4 * s, 0.6 * s])
    weights = negishi_weights(z, list(zip(agents, optima)))
    report = verify_aggregation(weights, agents, z, s, {'half': 0.5 * s, 'double': 2.0 * s},
                                generating_wealth=optima)
    assert report.roundtrip_residual < 1e-10
    assert report.violations == 0
    assert [c.label for c in report.checks] == ['half', 'double']


@pytest.fixture(scope='module')
def scenario():
    params = PropParams.create(1.0, 2.0, 256)
    return build_example_one(params, RandomSource(0), range(2000))


def test_constant_zero_integrand_gives_unit_deflator(scenario):
    theta = scenario.X.with_values(np.zeros_like(scenario.X.values))
    assert np.allclose(deflator_from_integrand(theta, scenario.W).values, 1.0)


def test_patch_partitions_the_horizon(scenario):
    outcomes = synthetic_two_agent_outcomes(scenario, 0.5, 1.0)
    patched = patch_deflators(outcomes, scenario.W)
    assert patched.is_partition()
    first, second = patched.sets()
    times = scenario.grid.times[:-1]
    assert np.all(first[:, times < 0.5]) and not np.any(first[:, times >= 0.5])
    assert np.all(second[:, times >= 0.5])


def test_patch_requires_a_holder(scenario):
    zero = scenario.X.with_values(np.zeros_like(scenario.X.values))
    outcomes = [AgentOutcome('a', zero, scenario.integrand()),
                AgentOutcome('b', zero, scenario.integrand())]
    with pytest.raises(MarketClearingError):
        patch_deflators(outcomes, scenario.W)


@pytest.mark.slow
def test_patched_deflator_passes_where_agents_fail(scenario):
    outcomes = synthetic_two_agent_outcomes(scenario, 0.5, 1.0)
    patched = patch_deflators(outcomes, scenario.W)
    check = patching_drift_check(patched, outcomes, scenario.W, scenario.S,
                                 scenario.to_bundle(), significance=1e-6)
    assert check.patched.passed
    assert any(check.failures_off_set())
    assert check.off_set_bins[0] == tuple(range(8, 16))
