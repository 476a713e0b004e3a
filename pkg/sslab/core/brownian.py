import numpy as np

from sslab.core.path import Path
from sslab.core.time_grid import TimeGrid
from sslab.utils.random_number_generator import STREAM_DRIVER, RandomSource, as_indices


def brownian_increments(grid: TimeGrid, src: RandomSource, path_index,
                        substream: int = STREAM_DRIVER) -> np.ndarray:
    idx, single = as_indices(path_index)
    z = src.gaussian_block(idx, grid.n_steps, substream)
    inc = z * np.sqrt(grid.dt)
    return inc[0] if single else inc


def sample_brownian(grid: TimeGrid, src: RandomSource, path_index) -> Path:
    """Brownian motion on ``grid``; a batch when ``path_index`` is a sequence."""
    return Path.from_increments(grid, brownian_increments(grid, src, path_index))


def bridge_crossing_probability(distance_a, distance_b, dt):
    """Probability that a Brownian bridge over a step of length ``dt`` touches a barrier.

    ``distance_a``/``distance_b`` are the distances to the barrier at the two
    step ends (positive on the safe side); the bridge crosses with probability
    exp(-2 a b / dt), and surely when either end is already past the barrier.
    """
    a = np.asarray(distance_a, dtype=float)
    b = np.asarray(distance_b, dtype=float)
    safe = (a > 0) & (b > 0)
    with np.errstate(over='ignore', invalid='ignore'):
        p = np.exp(-2.0 * np.where(safe, a * b, 0.0) / dt)
    return np.where(safe, p, 1.0)
