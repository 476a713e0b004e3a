from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Union

import numpy as np

from sslab.core.path import Path
from sslab.core.time_grid import TimeGrid
from sslab.exceptions import ContractViolationError, InvalidArgumentError


class MeasureTag(Enum):
    """Probability measure a bundle of paths is sampled under."""
    REFERENCE = 'P'
    FOLLMER1 = 'P1'
    FOLLMER_BETA = 'Pbeta'
    EXAMPLE_TWO_TILDE = 'P~'


@dataclass(frozen=True, eq=False)
class PathBundle:
    """Batch of named processes sampled on one grid under one measure.

    Attributes:
        measure (MeasureTag): Sampling measure.
        grid (TimeGrid): Common grid.
        processes (dict): name -> batch Path.
        tau (np.ndarray): Stopping time per path, +inf when never triggered.
        sigma (np.ndarray): Explosion time of the density process, +inf when
            it stays finite.
        hit_flags (dict): name -> boolean array, one entry per path.
        density (str): Name of the density process whose explosion defines
            sigma, if any.
        path_indices (np.ndarray): Global path index of each row.
    """
    measure: MeasureTag
    grid: TimeGrid
    processes: Dict[str, Path]
    tau: np.ndarray
    sigma: np.ndarray
    hit_flags: Dict[str, np.ndarray] = field(default_factory=dict)
    density: Optional[str] = None
    path_indices: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.tau)
        if len(self.sigma) != n:
            raise InvalidArgumentError('tau and sigma must have one entry per path')
        for name, p in self.processes.items():
            if not p.grid.same_as(self.grid) or p.n_paths != n:
                raise InvalidArgumentError('process {!r} does not match the bundle'.format(name))
        if self.path_indices is None:
            object.__setattr__(self, 'path_indices', np.arange(n))
        if self.density is not None:
            self._check_density()

    def _check_density(self):
        dens = self.processes[self.density]
        exploded = np.atleast_2d(dens.exploded)
        finite = np.isfinite(self.sigma)
        idx = np.searchsorted(self.grid.times, self.sigma[finite] - 1e-12 * self.grid.T)
        rows = np.flatnonzero(finite)
        if rows.size and not exploded[rows, np.minimum(idx, self.grid.n_steps)].all():
            raise ContractViolationError('density {!r} is finite after its explosion time'
                                         .format(self.density))

    @property
    def n_paths(self) -> int:
        return len(self.tau)

    def __getitem__(self, name: str) -> Path:
        try:
            return self.processes[name]
        except KeyError:
            raise InvalidArgumentError('bundle has no process {!r}; available: {}'
                                       .format(name, sorted(self.processes)))

    def extract(self, extractor: Union[str, Callable[['PathBundle'], np.ndarray]]) -> np.ndarray:
        """Per-path sample of a terminal functional (process name or callable)."""
        if callable(extractor):
            return np.asarray(extractor(self), dtype=float)
        return np.asarray(self[extractor].terminal, dtype=float)

    def hit(self, name: str) -> np.ndarray:
        return np.asarray(self.hit_flags[name], dtype=bool)

    def tau_fired(self) -> np.ndarray:
        return np.isfinite(self.tau)

    def exploded_by(self, t: Optional[float] = None) -> np.ndarray:
        """sigma <= t per path (t = T by default)."""
        t = self.grid.T if t is None else t
        return self.sigma <= t
