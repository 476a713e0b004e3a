from .reciprocal_bessel import (PropParams, hitting_prob_p, tau_threshold, simulate_X,
                                likelihood_ratio_L, likelihood_ratio_closed_form, stopping_tau,
                                stopping_index, barrier_hit_probability)
from .scenarios import (ScenarioVariant, ExampleScenario, build_example_one, build_example_two,
                        dump_scenario)

__all__ = [
    'PropParams',
    'hitting_prob_p',
    'tau_threshold',
    'simulate_X',
    'likelihood_ratio_L',
    'likelihood_ratio_closed_form',
    'stopping_tau',
    'stopping_index',
    'barrier_hit_probability',
    'ScenarioVariant',
    'ExampleScenario',
    'build_example_one',
    'build_example_two',
    'dump_scenario',
]
