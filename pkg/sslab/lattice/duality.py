"""Exhaustive check of the no-arbitrage / dual-set equivalences on lattices.

Each side of every equivalence is decided by its own LP: the market
conditions by strategy searches (arbitrage_search), the dual sets by
measure/deflator feasibility (feasibility).
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Tuple

import numpy as np

from sslab.lattice.arbitrage_search import (find_arbitrage, find_dominating_strategy,
                                            find_unbounded_profit)
from sslab.lattice.feasibility import (EQUIVALENCE_EPSILON, find_deflator,
                                       find_local_martingale_measure, find_martingale_measure,
                                       find_supermartingale_measure)
from sslab.lattice.market_lattice import MarketLattice, iter_one_period_grid, random_lattice
from sslab.utils.io import CsvOutfile

logger = logging.getLogger(__name__)

LATTICE_REPORT_COLUMNS = ('instance_id', 'M_nonempty', 'Msup_nonempty', 'Dloc_nonempty', 'NA',
                          'NA_C', 'ND', 'ND_C', 'NUPBR', 'NUPBR_C', 'consistent')
GRID_UPS = tuple(np.round(np.arange(0.5, 3.0 + 1e-9, 0.25), 10))
GRID_DOWNS = tuple(np.round(np.arange(0.25, 1.5 + 1e-9, 0.25), 10))
MIN_INSTANCES = 500


def lattice_family(n_random: int = 500, seed: int = 0, max_depth: int = 3,
                   branchings: Tuple[int, ...] = (2, 3)) -> Iterator[Tuple[str, MarketLattice]]:
    """One-period binomial grid followed by random trees of depth <= ``max_depth``.

    Yields:
        (instance_id, MarketLattice)
    """
    for i, lattice in enumerate(iter_one_period_grid(GRID_UPS, GRID_DOWNS)):
        yield 'grid-{:03d}'.format(i), lattice
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        depth = int(rng.integers(1, max_depth + 1))
        branching = int(rng.choice(branchings))
        yield 'random-{:04d}'.format(i), random_lattice(rng, depth, branching)


@dataclass(frozen=True)
class DualityRecord:
    """Both sides of every equivalence for one lattice."""
    instance_id: str
    M_nonempty: bool
    Mloc_nonempty: bool
    Msup_nonempty: bool
    Dloc_nonempty: bool
    Dsup_nonempty: bool
    NA: bool
    NA_C: bool
    ND: bool
    ND_C: bool
    NUPBR: bool
    NUPBR_C: bool
    failures: Tuple[str, ...] = ()

    @property
    def consistent(self) -> bool:
        return not self.failures

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in LATTICE_REPORT_COLUMNS)


def _equivalences(r: dict) -> List[Tuple[str, bool, bool]]:
    return [
        ('NUPBR <=> D_loc', r['NUPBR'], r['Dloc_nonempty']),
        ('NUPBR_C <=> D_sup', r['NUPBR_C'], r['Dsup_nonempty']),
        ('NA and NUPBR <=> M_loc', r['NA'] and r['NUPBR'], r['Mloc_nonempty']),
        ('NA_C and NUPBR_C <=> M_sup', r['NA_C'] and r['NUPBR_C'], r['Msup_nonempty']),
        ('NA and NUPBR and ND <=> M', r['NA'] and r['NUPBR'] and r['ND'], r['M_nonempty']),
        ('M = M_loc', r['M_nonempty'], r['Mloc_nonempty']),
    ]


def classify_lattice(lattice: MarketLattice, instance_id: str = '',
                     epsilon: float = EQUIVALENCE_EPSILON) -> DualityRecord:
    """Decide every market condition and dual set of ``lattice`` independently."""
    r = {
        'M_nonempty': find_martingale_measure(lattice, epsilon).feasible,
        'Mloc_nonempty': find_local_martingale_measure(lattice, epsilon).feasible,
        'Msup_nonempty': find_supermartingale_measure(lattice, epsilon).feasible,
        'Dloc_nonempty': find_deflator(lattice, 'loc', epsilon).feasible,
        'Dsup_nonempty': find_deflator(lattice, 'sup', epsilon).feasible,
        'NA': find_arbitrage(lattice, False) is None,
        'NA_C': find_arbitrage(lattice, True) is None,
        'ND': find_dominating_strategy(lattice, False) is None,
        'ND_C': find_dominating_strategy(lattice, True) is None,
        'NUPBR': find_unbounded_profit(lattice, False) is None,
        'NUPBR_C': find_unbounded_profit(lattice, True) is None,
    }
    failures = tuple(name for name, lhs, rhs in _equivalences(r) if lhs != rhs)
    if failures:
        logger.warning('{}: equivalence mismatch {}'.format(instance_id or lattice, failures))
    return DualityRecord(instance_id, failures=failures, **r)


@dataclass
class DualityReport:
    records: List[DualityRecord] = field(default_factory=list)

    @property
    def n_instances(self) -> int:
        return len(self.records)

    @property
    def mismatches(self) -> List[DualityRecord]:
        return [r for r in self.records if not r.consistent]

    @property
    def passed(self) -> bool:
        return self.n_instances > 0 and not self.mismatches

    def counts(self) -> dict:
        """How often each condition holds; ND_C is reported, not asserted."""
        keys = ('M_nonempty', 'Msup_nonempty', 'Dloc_nonempty', 'NA', 'NA_C', 'ND', 'ND_C',
                'NUPBR', 'NUPBR_C')
        return {k: sum(bool(getattr(r, k)) for r in self.records) for k in keys}

    def write(self, filename: str, header: str = '#') -> None:
        out = CsvOutfile(filename, LATTICE_REPORT_COLUMNS, header)
        out.initialize()
        out.write_rows(r.row() for r in self.records)


def verify_duality_theorem(lattices: Iterable[Tuple[str, MarketLattice]],
                           epsilon: float = EQUIVALENCE_EPSILON) -> DualityReport:
    """Classify every lattice and cross-check the equivalences.

    Args:
        lattices (iterable): (instance_id, MarketLattice) pairs, e.g. from
            ``lattice_family``.
        epsilon (float): Equivalence level of the feasibility LPs.

    Returns:
        DualityReport: One record per lattice; ``passed`` iff zero mismatches.
    """
    report = DualityReport()
    for instance_id, lattice in lattices:
        report.records.append(classify_lattice(lattice, instance_id, epsilon))
        if report.n_instances % 100 == 0:
            logger.info('classified {} lattices, {} mismatches'
                        .format(report.n_instances, len(report.mismatches)))
    logger.info('duality check: {} lattices, {} mismatches'
                .format(report.n_instances, len(report.mismatches)))
    return report
