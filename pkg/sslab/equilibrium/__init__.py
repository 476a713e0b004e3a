from .utility import (UtilitySpec, BeliefDecomposition, OptimalityGapReport,
                      representative_utility, belief_decomposition, optimality_gap)
from .negishi import (NegishiWeights, Allocation, AggregationCheck, AggregationReport,
                      negishi_weights, aggregate_allocation, aggregate_utility,
                      verify_aggregation)
from .patching import (AgentOutcome, PatchedDeflator, PatchingCheck, patch_deflators,
                       deflator_from_integrand, synthetic_two_agent_outcomes,
                       patching_drift_check, clearing_residual)

__all__ = [
    'UtilitySpec',
    'BeliefDecomposition',
    'OptimalityGapReport',
    'representative_utility',
    'belief_decomposition',
    'optimality_gap',
    'NegishiWeights',
    'Allocation',
    'AggregationCheck',
    'AggregationReport',
    'negishi_weights',
    'aggregate_allocation',
    'aggregate_utility',
    'verify_aggregation',
    'AgentOutcome',
    'PatchedDeflator',
    'PatchingCheck',
    'patch_deflators',
    'deflator_from_integrand',
    'synthetic_two_agent_outcomes',
    'patching_drift_check',
    'clearing_residual',
]
