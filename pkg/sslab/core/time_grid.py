from dataclasses import dataclass
from typing import Optional

import numpy as np

from sslab.exceptions import InvalidArgumentError

DEFAULT_HORIZON = 1.0
DEFAULT_N_STEPS = 4096


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Sampling times 0 = t_0 < ... < t_n = T."""
    T: float
    n_steps: int
    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).view()
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)
        if times.shape != (self.n_steps + 1,):
            raise InvalidArgumentError('times must have n_steps + 1 entries')
        if times[0] != 0.0 or times[-1] != self.T:
            raise InvalidArgumentError('grid must start at 0 and end exactly at T')
        if np.any(np.diff(times) <= 0.0):
            raise InvalidArgumentError('grid times must be strictly increasing')

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def uniform(self) -> bool:
        dt = self.dt
        return bool(np.allclose(dt, dt[0], rtol=1e-12, atol=0.0))

    def index_of(self, t: float) -> int:
        """First grid index with time >= t (n_steps if t > T)."""
        return int(min(np.searchsorted(self.times, t - 1e-12 * self.T), self.n_steps))

    def same_as(self, other: 'TimeGrid') -> bool:
        return self is other or (self.n_steps == other.n_steps
                                 and np.array_equal(self.times, other.times))

    def __repr__(self) -> str:
        return 'TimeGrid(T={}, n_steps={})'.format(self.T, self.n_steps)


def make_grid(T: float, n_steps: int, refine: Optional[float] = None) -> TimeGrid:
    """Build a time grid on [0, T].

    Args:
        T (float): Horizon, > 0.
        n_steps (int): Number of steps, >= 1.
        refine (float, optional): Exponent p >= 1 for a grid refined near 0,
            t_i = T (i / n)^p. Uniform when None.

    Returns:
        TimeGrid: The grid, last time exactly T.
    """
    if not np.isfinite(T) or T <= 0:
        raise InvalidArgumentError('T must be positive, got {}'.format(T))
    if int(n_steps) != n_steps or n_steps < 1:
        raise InvalidArgumentError('n_steps must be a positive integer, got {}'.format(n_steps))
    n_steps = int(n_steps)
    if refine is None:
        times = np.linspace(0.0, T, n_steps + 1)
    else:
        if refine < 1.0:
            raise InvalidArgumentError('refine exponent must be >= 1')
        times = T * (np.arange(n_steps + 1) / n_steps) ** refine
    times[-1] = T
    return TimeGrid(float(T), n_steps, times)
