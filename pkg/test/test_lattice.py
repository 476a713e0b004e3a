import numpy as np
import pytest

from sslab.exceptions import InvalidArgumentError
from sslab.lattice.arbitrage_search import (find_arbitrage, find_dominating_strategy,
                                            find_unbounded_profit, gains_matrix, is_c_maximal)
from sslab.lattice.duality import classify_lattice, lattice_family, verify_duality_theorem
from sslab.lattice.equilibrium import (log_private_valuation, patch_lattice_deflators,
                                       representative_agent_check, search_c_maximal_sum,
                                       solve_equilibrium)
from sslab.lattice.feasibility import (find_deflator, find_local_martingale_measure,
                                       find_martingale_measure, find_supermartingale_measure)
from sslab.lattice.market_lattice import MarketLattice, load_lattice, save_lattice
from sslab.lattice.utility import (AgentProblem, conjugacy_gap, expected_utility, foc_residuals,
                                   solve_constrained_utility, solve_dual)


@pytest.fixture
def symmetric():
    return MarketLattice.binomial(1.0, 2.0, 0.5, 0.5)


@pytest.fixture
def falling():
    return MarketLattice.binomial(1.0, 0.8, 0.5, 0.5)


@pytest.fixture
def rising():
    return MarketLattice.binomial(1.0, 1.25, 1.0, 0.5)


def test_lattice_layout():
    lattice = MarketLattice.binomial(1.0, 2.0, 0.5, 0.5, depth=3)
    assert lattice.n_nodes == 15 and lattice.n_internal == 7
    assert lattice.children(0).tolist() == [1, 2]
    assert lattice.parent(6) == 2
    assert lattice.level(6) == 2
    assert lattice.ancestors(7) == [0, 1, 3]
    assert lattice.node_probabilities()[lattice.leaves].sum() == pytest.approx(1.0)


def test_lattice_validation():
    with pytest.raises(InvalidArgumentError):
        MarketLattice(1, 2, [1.0, 2.0, 0.5], [[0.5, 0.6]])
    with pytest.raises(InvalidArgumentError):
        MarketLattice(1, 2, [1.0, -2.0, 0.5], [[0.5, 0.5]])
    with pytest.raises(InvalidArgumentError):
        MarketLattice(6, 2, np.ones(127), np.full((63, 2), 0.5))


def test_save_and_load(tmp_path, symmetric):
    filename = str(tmp_path / 'lattice.json')
    save_lattice(symmetric, filename)
    loaded = load_lattice(filename)
    assert np.array_equal(loaded.prices, symmetric.prices)
    assert np.array_equal(loaded.ref_probs, symmetric.ref_probs)


def test_gains_matrix(symmetric):
    A = gains_matrix(MarketLattice.binomial(1.0, 2.0, 0.5, 0.5, depth=2))
    assert A.shape == (7, 3)
    assert A[3].tolist() == [1.0, 2.0, 0.0]
    assert gains_matrix(symmetric)[1:].ravel().tolist() == [1.0, -0.5]


def test_measures_of_symmetric_lattice(symmetric):
    m = find_martingale_measure(symmetric)
    assert m.feasible
    assert m.measure.transitions[0] == pytest.approx([1.0 / 3.0, 2.0 / 3.0])
    assert m.measure.is_martingale()
    loc = find_local_martingale_measure(symmetric)
    assert loc.feasible
    assert np.allclose(loc.measure.transitions, m.measure.transitions)
    assert find_deflator(symmetric, 'loc').feasible
    with pytest.raises(InvalidArgumentError):
        find_deflator(symmetric, 'other')


def test_falling_price_is_only_free_of_constrained_arbitrage(falling):
    assert find_arbitrage(falling, False) is not None
    assert find_arbitrage(falling, True) is None
    assert not find_martingale_measure(falling).feasible
    assert find_supermartingale_measure(falling).feasible
    assert find_deflator(falling, 'sup').feasible
    assert not find_deflator(falling, 'loc').feasible
    record = classify_lattice(falling, 'falling')
    assert record.consistent
    assert record.NA_C and record.NUPBR_C and not record.NA


def test_rising_price_has_unbounded_profit(rising):
    witness = find_unbounded_profit(rising, True)
    assert witness is not None
    assert np.all(witness.holdings >= 0)
    assert np.all(witness.gains >= -1e-12)
    assert not find_supermartingale_measure(rising).feasible
    assert classify_lattice(rising).consistent


def test_duality_on_generated_family():
    family = list(lattice_family(40, seed=3))
    assert family[0][0] == 'grid-000'
    assert len(family) == 51 + 40
    report = verify_duality_theorem(family)
    assert report.passed
    assert report.n_instances == 91
    assert set(report.counts()) >= {'NA', 'NA_C', 'NUPBR_C'}


@pytest.mark.slow
def test_duality_on_full_family():
    report = verify_duality_theorem(lattice_family(500, seed=0))
    assert report.n_instances >= 500
    assert report.mismatches == []


@pytest.mark.parametrize('up, down, expected', [(2.0, 0.5, 0.5), (1.5, 0.9, 4.0)])
def test_log_agent_closed_form(up, down, expected):
    lattice = MarketLattice.binomial(1.0, up, down, 0.5)
    solution = solve_constrained_utility(lattice, AgentProblem('log', 1.0))
    assert solution.fractions[0] == pytest.approx(expected, abs=1e-10)
    assert np.max(np.abs(foc_residuals(solution))) < 1e-10
    assert expected_utility(lattice, solution.agent, solution.terminal_wealth) == \
        pytest.approx(solution.value, abs=1e-12)


def test_constrained_agent_stays_out_of_falling_market(falling):
    solution = solve_constrained_utility(falling, AgentProblem('power', 2.0, 0.5))
    assert solution.fractions[0] == 0.0
    assert solution.value == pytest.approx(2.0 * np.sqrt(2.0))
    free = solve_constrained_utility(falling, AgentProblem('log', 1.0, constrained=False))
    assert not free.bounded
    assert free.witness is not None


def test_unbounded_utility_has_infinite_dual(rising):
    agent = AgentProblem('log', 1.0)
    assert not solve_constrained_utility(rising, agent).bounded
    assert not solve_dual(rising, agent).feasible
    assert conjugacy_gap(rising, agent).passed


@pytest.mark.parametrize('agent', [
    AgentProblem('log', 1.0),
    AgentProblem('power', 1.0, 0.5),
    AgentProblem('log', 2.0, constrained=False),
    AgentProblem('power', 1.0, 0.3, constrained=False),
])
def test_conjugacy_gap_on_symmetric_tree(agent):
    lattice = MarketLattice.binomial(1.0, 2.0, 0.5, 0.5, depth=2)
    report = conjugacy_gap(lattice, agent)
    assert report.gap < 1e-8
    assert report.y_star > 0


def test_conjugacy_gap_with_binding_constraint(falling):
    report = conjugacy_gap(falling, AgentProblem('log', 1.0))
    assert report.primal == pytest.approx(0.0)
    assert report.gap < 1e-8


def test_agent_validation():
    with pytest.raises(InvalidArgumentError):
        AgentProblem('exp')
    with pytest.raises(InvalidArgumentError):
        AgentProblem('power', 1.0, 1.5)
    with pytest.raises(InvalidArgumentError):
        AgentProblem('log', 0.0)


def test_optimal_strategy_is_c_maximal(symmetric):
    solution = solve_constrained_utility(symmetric, AgentProblem('log', 1.0))
    assert is_c_maximal(symmetric, solution.terminal_gain, 1.0).c_maximal


def test_doing_nothing_is_not_c_maximal_when_price_rises(rising):
    result = is_c_maximal(rising, np.zeros(2))
    assert not result.c_maximal
    assert result.witness is not None


def test_single_log_agent_equilibrium(symmetric):
    eq = solve_equilibrium(symmetric, [AgentProblem('log', 1.0, name='log')])
    assert eq.clearing_residual < 1e-8
    assert eq.lattice.s0 == pytest.approx(log_private_valuation([2.0, 0.5], [0.5, 0.5]),
                                          rel=1e-6)
    report = representative_agent_check(eq)
    assert report.applicable and report.passed


def test_patched_deflator_with_heterogeneous_beliefs():
    lattice = MarketLattice.binomial(1.0, 2.0, 0.5, 0.5, depth=2)
    agents = [AgentProblem('log', 1.0, beliefs=np.tile([p, 1.0 - p], (lattice.n_internal, 1)),
                           name='agent{}'.format(k)) for k, p in enumerate((0.6, 0.4))]
    eq = solve_equilibrium(lattice, agents)
    patched = patch_lattice_deflators(eq)
    assert patched.martingale
    assert len(patched.off_set_failures()) == 2


def test_equilibrium_rejects_too_many_agents(symmetric):
    with pytest.raises(InvalidArgumentError):
        solve_equilibrium(symmetric, [AgentProblem('log', 1.0)] * 4)


def test_c_maximal_sum_search_runs():
    report = search_c_maximal_sum(5, seed=1)
    assert report.trials == 5
    assert report.sum_c_maximal <= report.solved


def test_dominating_strategy(falling, symmetric):
    for constrained in (False, True):
        witness = find_dominating_strategy(falling, constrained)
        assert witness is not None
        assert np.all(witness.terminal_gains >= falling.prices[falling.leaves] - 1.0 - 1e-9)
        assert find_dominating_strategy(symmetric, constrained) is None
