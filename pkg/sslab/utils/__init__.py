from .random_number_generator import RandomSource
from .statistics import (McEstimate, BinomialEstimate, accumulate, merge, one_sided_test,
                         two_sided_test, binomial_exact)

__all__ = [
    'RandomSource',
    'McEstimate',
    'BinomialEstimate',
    'accumulate',
    'merge',
    'one_sided_test',
    'two_sided_test',
    'binomial_exact',
]
