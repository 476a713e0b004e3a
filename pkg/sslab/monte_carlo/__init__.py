from sslab.core.bundle import MeasureTag, PathBundle
from .follmer import (girsanov_shift, simulate_under_follmer1, simulate_under_follmer_beta,
                      simulate_example_two_follmer, defect_direct, defect_via_explosion,
                      explosion_proportion, cutoff_sensitivity, dump_paths, path_chunks)

__all__ = [
    'MeasureTag',
    'PathBundle',
    'girsanov_shift',
    'simulate_under_follmer1',
    'simulate_under_follmer_beta',
    'simulate_example_two_follmer',
    'defect_direct',
    'defect_via_explosion',
    'explosion_proportion',
    'cutoff_sensitivity',
    'dump_paths',
    'path_chunks',
]
