from .market_lattice import (MarketLattice, MeasureVector, TreeStrategy, random_lattice,
                             save_lattice, load_lattice, iter_one_period_grid)
from .arbitrage_search import (gains_matrix, find_arbitrage, find_dominating_strategy,
                               find_unbounded_profit, is_c_maximal, CMaximality)
from .feasibility import (FeasibilityResult, find_supermartingale_measure,
                          find_martingale_measure, find_local_martingale_measure, find_deflator,
                          EQUIVALENCE_EPSILON)
from .utility import (AgentProblem, UtilitySolution, DualSolution, ConjugacyReport,
                      solve_constrained_utility, solve_dual, conjugacy_gap, expected_utility,
                      foc_residuals)
from .duality import (DualityRecord, DualityReport, lattice_family, classify_lattice,
                      verify_duality_theorem, LATTICE_REPORT_COLUMNS)
from .equilibrium import (LatticeEquilibrium, PatchedLatticeDeflator, RepresentativeAgentReport,
                          CMaximalSumReport, solve_equilibrium, patch_lattice_deflators,
                          representative_agent_check, search_c_maximal_sum,
                          log_private_valuation, equilibrium_report)

__all__ = [
    'MarketLattice',
    'MeasureVector',
    'TreeStrategy',
    'random_lattice',
    'save_lattice',
    'load_lattice',
    'iter_one_period_grid',
    'gains_matrix',
    'find_arbitrage',
    'find_dominating_strategy',
    'find_unbounded_profit',
    'is_c_maximal',
    'CMaximality',
    'FeasibilityResult',
    'find_supermartingale_measure',
    'find_martingale_measure',
    'find_local_martingale_measure',
    'find_deflator',
    'EQUIVALENCE_EPSILON',
    'AgentProblem',
    'UtilitySolution',
    'DualSolution',
    'ConjugacyReport',
    'solve_constrained_utility',
    'solve_dual',
    'conjugacy_gap',
    'expected_utility',
    'foc_residuals',
    'DualityRecord',
    'DualityReport',
    'lattice_family',
    'classify_lattice',
    'verify_duality_theorem',
    'LATTICE_REPORT_COLUMNS',
    'LatticeEquilibrium',
    'PatchedLatticeDeflator',
    'RepresentativeAgentReport',
    'CMaximalSumReport',
    'solve_equilibrium',
    'patch_lattice_deflators',
    'representative_agent_check',
    'search_c_maximal_sum',
    'log_private_valuation',
    'equilibrium_report',
]
