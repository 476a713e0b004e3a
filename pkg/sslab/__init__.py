"""
sslab - Short-Sale Lab.

Numerical laboratory for strict local martingale deflators, Follmer-measure
explosion identities, constrained no-arbitrage duality on finite lattices and
representative-agent aggregation.
"""
from .logging_config import setup_logging

setup_logging()

__version__ = "0.1.0"
__maintainer__ = "sslab developers"
__credits__ = 'Short-Sale Lab'
__copyright__ = '2026'
__status__ = 'Beta'
