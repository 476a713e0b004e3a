from dataclasses import dataclass
from typing import Optional

import numpy as np

from sslab.exceptions import InvalidArgumentError
from sslab.core.time_grid import TimeGrid


def _readonly(a: np.ndarray) -> np.ndarray:
    v = a.view()
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Path:
    """Discretely sampled trajectory (or a batch of trajectories).

    ``values`` has shape ``(n_steps + 1,)`` for a single path or
    ``(n_paths, n_steps + 1)`` for a batch sharing one grid. ``exploded``
    flags samples where the process has reached +infinity; the flag is
    absorbing, and the stored value at an exploded sample is NaN.
    """
    grid: TimeGrid
    values: np.ndarray
    exploded: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (1, 2) or values.shape[-1] != self.grid.n_steps + 1:
            raise InvalidArgumentError('values must have shape (..., {}), got {}'
                                       .format(self.grid.n_steps + 1, values.shape))
        if self.exploded is None:
            exploded = np.zeros(values.shape, dtype=bool)
        else:
            exploded = np.asarray(self.exploded, dtype=bool)
            if exploded.shape != values.shape:
                raise InvalidArgumentError('exploded mask must match values')
            exploded = np.logical_or.accumulate(exploded, axis=-1)
            if exploded.any():
                values = np.where(exploded, np.nan, values)
        object.__setattr__(self, 'values', _readonly(values))
        object.__setattr__(self, 'exploded', _readonly(exploded))

    @classmethod
    def from_increments(cls, grid: TimeGrid, increments, start: float = 0.0) -> 'Path':
        inc = np.asarray(increments, dtype=float)
        out = np.empty(inc.shape[:-1] + (inc.shape[-1] + 1,))
        out[..., 0] = start
        np.cumsum(inc, axis=-1, out=out[..., 1:])
        out[..., 1:] += start
        return cls(grid, out)

    @classmethod
    def constant(cls, grid: TimeGrid, value: float, n_paths: Optional[int] = None) -> 'Path':
        shape = (grid.n_steps + 1,) if n_paths is None else (n_paths, grid.n_steps + 1)
        return cls(grid, np.full(shape, float(value)))

    @property
    def is_batch(self) -> bool:
        return self.values.ndim == 2

    @property
    def n_paths(self) -> int:
        return self.values.shape[0] if self.is_batch else 1

    @property
    def terminal(self) -> np.ndarray:
        return self.values[..., -1]

    @property
    def any_exploded(self) -> bool:
        return bool(self.exploded.any())

    def explosion_index(self) -> np.ndarray:
        """First exploded sample index per path, n_steps + 1 when never exploded."""
        n = self.grid.n_steps + 1
        hit = self.exploded.any(axis=-1)
        first = np.argmax(self.exploded, axis=-1)
        return np.where(hit, first, n)

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=-1)

    def row(self, i: int) -> 'Path':
        if not self.is_batch:
            return self
        return Path(self.grid, self.values[i], self.exploded[i])

    def with_values(self, values, exploded=None) -> 'Path':
        return Path(self.grid, values, self.exploded if exploded is None else exploded)

    def scale(self, c: float) -> 'Path':
        return self.with_values(self.values * c)

    def __add__(self, other: 'Path') -> 'Path':
        check_same_grid(self, other)
        return Path(self.grid, self.values + other.values, self.exploded | other.exploded)

    def __sub__(self, other: 'Path') -> 'Path':
        check_same_grid(self, other)
        return Path(self.grid, self.values - other.values, self.exploded | other.exploded)

    def __mul__(self, other) -> 'Path':
        if isinstance(other, Path):
            check_same_grid(self, other)
            return Path(self.grid, self.values * other.values, self.exploded | other.exploded)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __neg__(self) -> 'Path':
        return self.scale(-1.0)

    def __repr__(self) -> str:
        return 'Path(shape={}, T={}, exploded={})'.format(self.values.shape, self.grid.T,
                                                         self.any_exploded)


def check_same_grid(a: Path, b: Path) -> None:
    if not a.grid.same_as(b.grid):
        raise InvalidArgumentError('paths live on different time grids')
