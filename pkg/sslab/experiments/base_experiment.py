import logging
import os
from abc import ABC
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sslab.exceptions import ConfigError
from sslab.experiments.config import ExperimentConfig
from sslab.utils.io import header_line, write_csv
from sslab.utils.statistics import BinomialEstimate, ClaimCheck, McEstimate

logger = logging.getLogger(__name__)

CLAIM_COLUMNS = ('claim', 'passed', 'estimate', 'ci_lo', 'ci_hi', 'detail')
CLAIMS_FILE = 'claims.csv'


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    checks: Tuple[ClaimCheck, ...]
    artifacts: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failed(self) -> List[str]:
        return [c.claim for c in self.checks if not c.passed]


class BaseExperiment(ABC):
    """Base class of the catalog experiments.

    Subclasses set ``name`` and ``title`` and implement ``_run``, which
    records claim checks and writes CSV artifacts into ``config.out``.
    """
    name: str = ''
    title: str = ''

    def __init__(self, config: ExperimentConfig, options: Optional[Dict] = None) -> None:
        """
        Args:
            config (ExperimentConfig): Validated configuration.
            options (dict, optional): Default experiment options; entries of
                ``config.options`` take precedence.
        """
        self._config = config
        self._options = dict(options or {})
        self._options.update(config.options)
        self._checks: List[ClaimCheck] = []
        self._artifacts: List[str] = []

    @property
    def config(self) -> ExperimentConfig:
        return self._config

    @property
    def options(self) -> Dict:
        return self._options

    @property
    def checks(self) -> List[ClaimCheck]:
        return list(self._checks)

    def header(self, **extra) -> str:
        return header_line(experiment=self.name, seed=self._config.seed,
                           config=self._config.to_dict(), **extra)

    def output_path(self, filename: str) -> str:
        return os.path.join(self._config.out, filename)

    def write_artifact(self, filename: str, columns: Sequence[str], rows) -> str:
        path = write_csv(self.output_path(filename), columns, rows, self.header())
        self._artifacts.append(path)
        return path

    def add_artifact(self, path: str) -> None:
        self._artifacts.append(path)

    def record(self, check: ClaimCheck) -> ClaimCheck:
        logger.info('[{}] {}: estimate {:.6g}, interval [{:.6g}, {:.6g}]{}'.format(
            'pass' if check.passed else 'FAIL', check.claim, check.estimate, check.ci[0],
            check.ci[1], ' ({})'.format(check.detail) if check.detail else ''))
        self._checks.append(check)
        return check

    def claim(self, claim: str, passed: bool, estimate: float = float('nan'),
              ci: Tuple[float, float] = (float('nan'), float('nan')),
              detail: str = '') -> ClaimCheck:
        return self.record(ClaimCheck(claim, bool(passed), float(estimate),
                                      (float(ci[0]), float(ci[1])), detail))

    def require_paths(self, minimum: int, reason: str) -> None:
        if self._config.n_paths < minimum:
            raise ConfigError(['n_paths: {} needs at least {} paths, got {}'
                               .format(reason, minimum, self._config.n_paths)])

    def chunks(self, start: int = 0, n_paths: Optional[int] = None) -> Iterator[np.ndarray]:
        """Blocks of global path indices, none shorter than ``config.chunk``.

        The remainder is spread over the blocks so that per-batch drift tests
        see at least ``chunk`` paths.
        """
        n = self._config.n_paths if n_paths is None else n_paths
        n_blocks = max(1, n // self._config.chunk)
        for block in np.array_split(np.arange(start, start + n), n_blocks):
            yield block

    def banner(self) -> None:
        text = '| {} |'.format(self.title or self.name)
        logger.info('+' + '-' * (len(text) - 2) + '+')
        logger.info(text)
        logger.info('+' + '-' * (len(text) - 2) + '+')

    def run(self) -> ExperimentResult:
        self.banner()
        logger.info('config: {}'.format(self._config.to_dict()))
        self._run()
        rows = [(c.claim, c.passed, c.estimate, c.ci[0], c.ci[1], c.detail) for c in self._checks]
        self.write_artifact(CLAIMS_FILE, CLAIM_COLUMNS, rows)
        result = ExperimentResult(self.name, tuple(self._checks), tuple(self._artifacts))
        logger.info('{}: {}/{} claims passed'.format(
            self.name, sum(c.passed for c in self._checks), len(self._checks)))
        return result

    def _run(self) -> None:
        raise NotImplementedError


def estimate_row(est: McEstimate, level: float) -> Tuple[float, float, float, float]:
    """(estimate, stderr, ci_lo, ci_hi) of an McEstimate."""
    lo, hi = est.ci(level)
    return est.mean, est.stderr, lo, hi


def binomial_row(est: BinomialEstimate) -> Tuple[float, float, float, float]:
    """(estimate, stderr, ci_lo, ci_hi) with the exact Clopper-Pearson interval."""
    return est.point, est.as_estimate().stderr, est.lower, est.upper
