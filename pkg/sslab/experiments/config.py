import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List

from sslab.exceptions import ConfigError
from sslab.utils.random_number_generator import MAX_SEED

logger = logging.getLogger(__name__)

EXPERIMENT_NAMES = ('prop51', 'example1', 'example2', 'lattice-duality', 'negishi', 'patching',
                    'repr-agent')
MAX_STEPS = 2 ** 20
LATTICE_GRIDS = ('default', 'none')


def _default_lattice() -> Dict[str, Any]:
    return {'grid': 'default', 'n_random': 500, 'max_depth': 3, 'branchings': [2, 3]}


@dataclass
class ExperimentConfig:
    """Configuration of one experiment run.

    Attributes:
        experiment (str): Catalog name.
        T (float): Horizon.
        beta (float): Exponent of the true-martingale density, > 1.
        gamma (float): Power-utility exponent in (0, 1).
        n_paths (int): Monte Carlo sample size.
        n_steps (int): Grid steps.
        seed (int): Master seed of the random streams.
        out (str): Output directory.
        level (float): Confidence level of the claim intervals.
        significance (float): Per-bin level of the drift tests.
        chunk (int): Paths simulated per batch.
        lattice (dict): Lattice family parameters: ``grid`` ('default' or
            'none'), ``n_random``, ``max_depth``, ``branchings``.
        options (dict): Experiment-specific knobs, see ``defaults``.
    """
    experiment: str = 'prop51'
    T: float = 1.0
    beta: float = 2.0
    gamma: float = 0.5
    n_paths: int = 100000
    n_steps: int = 4096
    seed: int = 42
    out: str = 'results'
    level: float = 0.99
    significance: float = 0.001
    chunk: int = 1024
    lattice: Dict[str, Any] = field(default_factory=_default_lattice)
    options: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(['unknown field {!r}'.format(key) for key in unknown])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_file_overrides(cls, filename: str, base: 'ExperimentConfig') -> 'ExperimentConfig':
        """``base`` updated with the fields present in a JSON config file."""
        data = _read_json(filename)
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(['{}: unknown field {!r}'.format(filename, key) for key in unknown])
        return base.with_overrides(**data)

    @classmethod
    def from_json(cls, text: str) -> 'ExperimentConfig':
        return cls.from_dict(_parse_json(text))

    @classmethod
    def load(cls, filename: str) -> 'ExperimentConfig':
        return cls.from_dict(_read_json(filename))

    def save(self, filename: str) -> None:
        try:
            with open(filename, 'w') as outfile:
                outfile.write(self.to_json() + '\n')
        except IOError as e:
            logger.error("Failed to write config file '{}': {}".format(filename, e))
            raise

    def with_overrides(self, **flags) -> 'ExperimentConfig':
        """Copy with every non-None flag applied; dict fields are merged key by key."""
        updates = {}
        for key, value in flags.items():
            if value is None:
                continue
            if key in ('lattice', 'options') and isinstance(value, dict):
                merged = dict(getattr(self, key))
                merged.update(value)
                value = merged
            updates[key] = value
        try:
            return replace(self, **updates)
        except TypeError as e:
            raise ConfigError([str(e)])

    def validate(self) -> 'ExperimentConfig':
        """Raise ConfigError naming every field out of range."""
        problems: List[str] = []

        def check(ok, message):
            if not ok:
                problems.append(message)

        check(self.experiment in EXPERIMENT_NAMES,
              'experiment: unknown {!r}, expected one of {}'.format(self.experiment,
                                                                    EXPERIMENT_NAMES))
        check(_number(self.T) and self.T > 0, 'T: must be positive, got {!r}'.format(self.T))
        check(_number(self.beta) and self.beta > 1,
              'beta: must exceed 1, got {!r}'.format(self.beta))
        check(_number(self.gamma) and 0 < self.gamma < 1,
              'gamma: must lie in (0, 1), got {!r}'.format(self.gamma))
        check(_integer(self.n_paths) and self.n_paths >= 2,
              'n_paths: must be an integer >= 2, got {!r}'.format(self.n_paths))
        check(_integer(self.n_steps) and 16 <= self.n_steps <= MAX_STEPS,
              'n_steps: must be an integer in [16, {}], got {!r}'.format(MAX_STEPS, self.n_steps))
        check(_integer(self.seed) and 0 <= self.seed <= MAX_SEED,
              'seed: must be an integer in [0, 2^64 - 1], got {!r}'.format(self.seed))
        check(_number(self.level) and 0 < self.level < 1,
              'level: must lie in (0, 1), got {!r}'.format(self.level))
        check(_number(self.significance) and 0 < self.significance < 0.5,
              'significance: must lie in (0, 0.5), got {!r}'.format(self.significance))
        check(_integer(self.chunk) and self.chunk >= 1,
              'chunk: must be a positive integer, got {!r}'.format(self.chunk))
        check(isinstance(self.options, dict), 'options: must be an object')
        if isinstance(self.lattice, dict):
            problems.extend(_lattice_problems(self.lattice))
        else:
            problems.append('lattice: must be an object')
        if problems:
            raise ConfigError(problems)
        return self


def _parse_json(text: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(['not valid JSON: {}'.format(e)])
    if not isinstance(data, dict):
        raise ConfigError(['top level must be a JSON object'])
    return data


def _read_json(filename: str) -> Dict[str, Any]:
    try:
        with open(filename) as infile:
            text = infile.read()
    except IOError as e:
        logger.error("Failed to read config file '{}': {}".format(filename, e))
        raise ConfigError(['cannot read {}: {}'.format(filename, e)])
    return _parse_json(text)


def _number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _integer(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _lattice_problems(lattice: Dict[str, Any]) -> List[str]:
    problems = []
    unknown = sorted(set(lattice) - set(_default_lattice()))
    problems.extend('lattice.{}: unknown field'.format(key) for key in unknown)
    grid = lattice.get('grid', 'default')
    if grid not in LATTICE_GRIDS:
        problems.append('lattice.grid: must be one of {}, got {!r}'.format(LATTICE_GRIDS, grid))
    n_random = lattice.get('n_random', 0)
    if not (_integer(n_random) and n_random >= 0):
        problems.append('lattice.n_random: must be a nonnegative integer, got {!r}'
                        .format(n_random))
    depth = lattice.get('max_depth', 3)
    if not (_integer(depth) and 1 <= depth <= 3):
        problems.append('lattice.max_depth: must be 1, 2 or 3, got {!r}'.format(depth))
    branchings = lattice.get('branchings', [2, 3])
    if not (isinstance(branchings, (list, tuple)) and branchings
            and all(_integer(b) and 2 <= b <= 4 for b in branchings)):
        problems.append('lattice.branchings: must be a nonempty list of integers in [2, 4], '
                        'got {!r}'.format(branchings))
    return problems
