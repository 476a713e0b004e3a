from typing import Iterable, Union

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from sslab.exceptions import InvalidArgumentError

# Disjoint sub-streams per path.
STREAM_BESSEL = (0, 1, 2)
STREAM_BRIDGE = 3
STREAM_REFINE = 4
STREAM_DRIVER = 5

MAX_SEED = 2 ** 64 - 1


class RandomSource:
    """Counter-based random streams keyed on (master_seed, path_index).

    Every (path_index, substream) pair gets its own Philox generator seeded
    through ``SeedSequence(master_seed, spawn_key=(path_index, substream))``,
    so a path's draws never depend on which other paths were simulated, in
    which order, or on how many workers were used.
    """

    def __init__(self, master_seed: int = 0) -> None:
        """
        Parameters:
        master_seed (int): 64-bit master seed.
        """
        if not 0 <= int(master_seed) <= MAX_SEED:
            raise InvalidArgumentError('master_seed must be a 64-bit unsigned integer')
        self.master_seed = int(master_seed)

    def __repr__(self) -> str:
        return 'RandomSource(master_seed={})'.format(self.master_seed)

    def generator(self, path_index: int, substream: int = STREAM_DRIVER) -> Generator:
        if path_index < 0:
            raise InvalidArgumentError('path_index must be nonnegative')
        seq = SeedSequence(self.master_seed, spawn_key=(int(path_index), int(substream)))
        return Generator(Philox(seq))

    def get_gaussian(self, path_index: int, size, substream: int = STREAM_DRIVER) -> np.ndarray:
        """
        Standard normal draws of one path's sub-stream.

        Parameters:
        path_index (int): Path index.
        size (int or tuple): Output shape.
        substream (int): Sub-stream id.

        Returns:
        np.ndarray: Draws.
        """
        return self.generator(path_index, substream).standard_normal(size)

    def get_uniform(self, path_index: int, size, substream: int = STREAM_BRIDGE) -> np.ndarray:
        return self.generator(path_index, substream).random(size)

    def gaussian_block(self, path_indices: Iterable[int], n: int,
                       substream: int = STREAM_DRIVER) -> np.ndarray:
        """Stack ``n`` normals per path, one row per path index."""
        return np.stack([self.get_gaussian(i, n, substream) for i in path_indices])

    def uniform_block(self, path_indices: Iterable[int], n: int,
                      substream: int = STREAM_BRIDGE) -> np.ndarray:
        return np.stack([self.get_uniform(i, n, substream) for i in path_indices])


def as_indices(path_index: Union[int, Iterable[int]]):
    """Normalize a path index or a collection of them.

    Returns:
        tuple: (indices as an int array, True if a single index was given)
    """
    if np.isscalar(path_index):
        return np.array([int(path_index)]), True
    idx = np.asarray(list(path_index), dtype=np.int64)
    return idx, False
