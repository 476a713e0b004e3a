"""Simulation under the Follmer measures of the stopped densities.

Under the measure with density Z = X^q exp(-q (q - 1) I / 2) (stopped at tau),
Y = 1/X solves dY = dW* + (1 - q) / Y dt before tau. q = 1 gives the
Follmer measure of Z1, under which Y is a Brownian motion started at 1 and Z1
explodes when Y hits 0. q = beta gives a Bessel process of dimension
3 - 2 beta; L diverges as Y approaches 0, so tau fires first.

After tau the measure change stops for the example-one densities (dY =
dW* + dt / Y) and continues with the unit integrand for the example-two
densities (dY = dW* + (1/Y - 1) dt, Z picking up exp(-dW* + dt / 2)).

All steps use the drift-implicit scheme Y' = (a + sqrt(a^2 + 4 c h)) / 2,
a = Y + dW* + b h, for dY = dW* + (c / Y + b) dt.
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Optional, Sequence

import numpy as np

from sslab.core.brownian import bridge_crossing_probability, brownian_increments
from sslab.core.bundle import MeasureTag, PathBundle
from sslab.core.calculus import time_integral
from sslab.core.path import Path, check_same_grid
from sslab.core.time_grid import TimeGrid
from sslab.exceptions import InsufficientDataError, InvalidArgumentError
from sslab.processes.reciprocal_bessel import PropParams
from sslab.utils.io import CsvOutfile, header_line
from sslab.utils.random_number_generator import STREAM_BRIDGE, STREAM_REFINE, RandomSource
from sslab.utils.statistics import BinomialEstimate, McEstimate, accumulate, binomial_exact

logger = logging.getLogger(__name__)

EXPLOSION_CUTOFF = 1e-6
BETA_EXPLOSION_LEVEL = 1e-100
REFINE_RATIO = 3.0
REFINE_KAPPA = 0.1
MAX_SUBSTEPS = 200000
DEFAULT_CHUNK = 1024
PATH_COLUMNS = ('t', 'value', 'exploded')


@dataclass(frozen=True)
class _DensityDynamics:
    """Density X^power exp(-power (power - 1) I / 2) before tau; after tau the
    measure change uses a unit integrand when ``unit_after_tau``."""
    tag: MeasureTag
    power: float
    unit_after_tau: bool = False

    @property
    def c_pre(self) -> float:
        return 1.0 - self.power

    @property
    def b_post(self) -> float:
        return -1.0 if self.unit_after_tau else 0.0


def girsanov_shift(w: Path, theta: Path) -> Path:
    """W*_t = W_t - int_0^t theta ds (trapezoidal)."""
    check_same_grid(w, theta)
    return w - time_integral(theta)


def path_chunks(n_paths: int, chunk: int = DEFAULT_CHUNK, start: int = 0) -> Iterator[np.ndarray]:
    """Consecutive blocks of global path indices."""
    if n_paths < 1 or chunk < 1:
        raise InvalidArgumentError('n_paths and chunk must be positive')
    for lo in range(start, start + n_paths, chunk):
        yield np.arange(lo, min(lo + chunk, start + n_paths))


def _as_index_array(path_indices) -> np.ndarray:
    if np.isscalar(path_indices):
        return np.arange(int(path_indices))
    idx = np.asarray(list(path_indices), dtype=np.int64)
    if idx.size == 0:
        raise InsufficientDataError('no paths requested')
    return idx


class _Stepper:
    """Step loop shared by every Follmer simulation, vectorized over paths."""

    def __init__(self, grid: TimeGrid, src: RandomSource, idx: np.ndarray, params: PropParams,
                 dyn: _DensityDynamics, cutoff: float, bridge: bool) -> None:
        self.grid = grid
        self.src = src
        self.idx = idx
        self.params = params
        self.dyn = dyn
        self.cutoff = cutoff
        self.bridge = bridge
        self.log_threshold = params.log_threshold
        self.log_explosion = -np.log(BETA_EXPLOSION_LEVEL)
        self._rngs: Dict[int, np.random.Generator] = {}

    def _log_density(self, y, I):
        q = self.dyn.power
        return -q * np.log(y) - 0.5 * q * (q - 1.0) * I

    def _log_L(self, y, I):
        beta = self.params.beta
        return -(beta - 1.0) * np.log(y) - 0.5 * beta * (beta - 1.0) * I

    def _refine_rng(self, row: int) -> np.random.Generator:
        if row not in self._rngs:
            self._rngs[row] = self.src.generator(int(self.idx[row]), STREAM_REFINE)
        return self._rngs[row]

    def run(self) -> PathBundle:
        grid, dyn = self.grid, self.dyn
        m, n = len(self.idx), grid.n_steps
        dt = grid.dt
        dW = brownian_increments(grid, self.src, self.idx)
        check_barrier = dyn.power == 1.0
        U = None
        if check_barrier and self.bridge:
            U = self.src.uniform_block(self.idx, n, STREAM_BRIDGE)

        Y = np.ones((m, n + 1))
        I = np.zeros((m, n + 1))
        log_z = np.zeros((m, n + 1))
        log_l = np.zeros((m, n + 1))
        tau_idx = np.full(m, n + 1)
        sigma_idx = np.full(m, n + 1)
        stopped = np.zeros(m, dtype=bool)
        dead = np.zeros(m, dtype=bool)
        n_refined = 0

        for i in range(n):
            h = dt[i]
            y = Y[:, i]
            c = np.where(stopped, 1.0, dyn.c_pre)
            b = np.where(stopped, dyn.b_post, 0.0)
            with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
                a = y + dW[:, i] + b * h
                disc = a * a + 4.0 * c * h
                y_new = 0.5 * (a + np.sqrt(np.maximum(disc, 0.0)))
                I_new = I[:, i] + np.where(stopped, 0.0, 0.5 * h * (1.0 / y ** 2 + 1.0 / y_new ** 2))
                z_pre = self._log_density(y_new, I_new)
                l_pre = self._log_L(y_new, I_new)
            z_post = log_z[:, i] + (-dW[:, i] + 0.5 * h if dyn.unit_after_tau else 0.0)
            log_z[:, i + 1] = np.where(stopped, z_post, z_pre)
            log_l[:, i + 1] = np.where(stopped, log_l[:, i], l_pre)
            Y[:, i + 1] = y_new
            I[:, i + 1] = I_new

            pre = ~stopped & ~dead
            if check_barrier:
                hit = pre & (y_new <= self.cutoff)
                if U is not None:
                    p = bridge_crossing_probability(y - self.cutoff, y_new - self.cutoff, h)
                    hit |= pre & (U[:, i] < p)
            else:
                hit = pre & ~(log_z[:, i + 1] <= self.log_explosion)
                refine = pre & ((disc < 0) | (a <= 0) | (y < REFINE_RATIO * np.sqrt(h)))
                hit &= ~refine
                for row in np.flatnonzero(refine):
                    n_refined += 1
                    exploded, crossed = self._refine(row, i, Y, I, log_z, log_l, dW[row, i], h)
                    if exploded:
                        hit[row] = True
                    elif crossed:
                        tau_idx[row] = i + 1
                        stopped[row] = True
                pre &= ~refine

            sigma_idx[hit] = i + 1
            dead |= hit
            crossed = pre & ~hit & (log_l[:, i + 1] >= self.log_threshold)
            tau_idx[crossed] = i + 1
            stopped |= crossed

        logger.debug('{}: {} refined steps over {} paths'.format(dyn.tag.value, n_refined, m))
        return self._bundle(Y, I, log_z, log_l, dW, tau_idx, sigma_idx)

    def _refine(self, row, i, Y, I, log_z, log_l, D, h):
        """Sub-step one grid step with Brownian-bridge sub-increments.

        Returns:
            tuple: (exploded, tau crossed during the step)
        """
        dyn = self.dyn
        rng = self._refine_rng(row)
        y, acc_I = Y[row, i], I[row, i]
        lz, ll = log_z[row, i], log_l[row, i]
        r = h
        crossed = False
        for _ in range(MAX_SUBSTEPS):
            if r <= 0.0:
                break
            s = min((REFINE_KAPPA * y) ** 2, r)
            dw = rng.normal(D * s / r, np.sqrt(s * (r - s) / r)) if s < r else D
            c = 1.0 if crossed else dyn.c_pre
            b = dyn.b_post if crossed else 0.0
            a = y + dw + b * s
            disc = a * a + 4.0 * c * s
            if a <= 0.0 or disc < 0.0:
                logger.debug('path {} collapsed at step {}'.format(self.idx[row], i))
                return True, False
            y_new = 0.5 * (a + np.sqrt(disc))
            if crossed:
                if dyn.unit_after_tau:
                    lz += -dw + 0.5 * s
            else:
                acc_I += 0.5 * s * (1.0 / y ** 2 + 1.0 / y_new ** 2)
                lz = self._log_density(y_new, acc_I)
                ll = self._log_L(y_new, acc_I)
                if lz > self.log_explosion:
                    return True, False
                crossed = ll >= self.log_threshold
            y = y_new
            D -= dw
            r -= s
        else:
            logger.warning('path {} step {}: sub-step budget exhausted'.format(self.idx[row], i))
        Y[row, i + 1], I[row, i + 1] = y, acc_I
        log_z[row, i + 1], log_l[row, i + 1] = lz, ll
        return False, crossed

    def _bundle(self, Y, I, log_z, log_l, dW, tau_idx, sigma_idx) -> PathBundle:
        grid = self.grid
        cols = np.arange(grid.n_steps + 1)
        exploded = cols >= sigma_idx[:, None]
        times = np.append(grid.times, np.inf)
        with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
            safe_y = np.where(exploded, 1.0, Y)
            processes = {
                'Y': Path(grid, safe_y, exploded),
                'X': Path(grid, 1.0 / safe_y, exploded),
                'I': Path(grid, np.where(exploded, 0.0, I), exploded),
                'L': Path(grid, np.exp(np.where(exploded, 0.0, log_l)), exploded),
                'Z': Path(grid, np.exp(np.where(exploded, 0.0, log_z)), exploded),
                'W_star': Path.from_increments(grid, dW),
            }
        tau = times[tau_idx]
        sigma = times[sigma_idx]
        flags = {'tau': np.isfinite(tau), 'sigma': np.isfinite(sigma)}
        return PathBundle(self.dyn.tag, grid, processes, tau, sigma, flags, density='Z',
                          path_indices=self.idx)


def _simulate(grid, src, params, path_indices, dyn, cutoff=EXPLOSION_CUTOFF, bridge=True):
    if not params.beta > 1.0:
        raise InvalidArgumentError('beta must exceed 1, got {}'.format(params.beta))
    if not grid.same_as(params.grid):
        raise InvalidArgumentError('grid differs from the parameter grid')
    idx = _as_index_array(path_indices)
    bundle = _Stepper(grid, src, idx, params, dyn, cutoff, bridge).run()
    logger.info('{}: {} paths, tau fired on {}, exploded on {}'
                .format(dyn.tag.value, len(idx), int(bundle.hit('tau').sum()),
                        int(bundle.hit('sigma').sum())))
    return bundle


def simulate_under_follmer1(grid: TimeGrid, src: RandomSource, params: PropParams,
                            path_indices=1, cutoff: float = EXPLOSION_CUTOFF,
                            bridge: bool = True) -> PathBundle:
    """Sample under the Follmer measure of Z1 = X stopped at tau.

    Y = 1/X = 1 + W* until Y hits 0 (that time is sigma when it precedes tau).
    Discrete monitoring of the 0 barrier is corrected by a Brownian-bridge
    crossing draw; Y below ``cutoff`` counts as a hit.

    Args:
        grid (TimeGrid): Sampling grid, the one in ``params``.
        src (RandomSource): Random streams.
        params (PropParams): T, beta and tau threshold.
        path_indices (int or sequence of int): Number of paths, or explicit indices.
        cutoff (float): Explosion cutoff for Y.
        bridge (bool): Apply the bridge crossing correction.

    Returns:
        PathBundle: Tag FOLLMER1, density process ``'Z'``.
    """
    return _simulate(grid, src, params, path_indices,
                     _DensityDynamics(MeasureTag.FOLLMER1, 1.0), cutoff, bridge)


def simulate_under_follmer_beta(grid: TimeGrid, src: RandomSource, params: PropParams,
                                path_indices=1) -> PathBundle:
    """Sample under the Follmer measure of Z^beta stopped at tau.

    Steps where Y is within a few sqrt(dt) of 0 are refined with sub-steps of
    size (0.1 Y)^2; explosion means 1/Z^beta below 1e-100.
    """
    return _simulate(grid, src, params, path_indices,
                     _DensityDynamics(MeasureTag.FOLLMER_BETA, params.beta))


def simulate_example_two_follmer(grid: TimeGrid, src: RandomSource, params: PropParams,
                                 path_indices=1, density: str = 'sup',
                                 cutoff: float = EXPLOSION_CUTOFF) -> PathBundle:
    """Follmer simulation for the example-two deflators.

    Args:
        density (str): ``'sup'`` for Z^sup (beta X then 1, tag EXAMPLE_TWO_TILDE),
            ``'primary'`` for Z (X then 1, tag FOLLMER1).
    """
    if density == 'sup':
        dyn = _DensityDynamics(MeasureTag.EXAMPLE_TWO_TILDE, params.beta, unit_after_tau=True)
    elif density == 'primary':
        dyn = _DensityDynamics(MeasureTag.FOLLMER1, 1.0, unit_after_tau=True)
    else:
        raise InvalidArgumentError("density must be 'sup' or 'primary', got {!r}".format(density))
    return _simulate(grid, src, params, path_indices, dyn, cutoff)


def defect_direct(bundle: PathBundle, name: str = 'Z_primary') -> McEstimate:
    """1 - E[Z_T] from a reference-measure bundle."""
    if bundle.measure is not MeasureTag.REFERENCE:
        raise InvalidArgumentError('defect_direct needs a reference-measure bundle, got {}'
                                   .format(bundle.measure.value))
    if bundle.n_paths == 0:
        raise InsufficientDataError('empty bundle')
    return accumulate(1.0 - bundle.extract(name))


def explosion_proportion(bundle: PathBundle, level: float = 0.99) -> BinomialEstimate:
    """P*(sigma <= T) with its Clopper-Pearson interval."""
    if bundle.measure is MeasureTag.REFERENCE:
        raise InvalidArgumentError('explosion frequencies need a Follmer-measure bundle')
    if bundle.n_paths == 0:
        raise InsufficientDataError('empty bundle')
    return binomial_exact(int(bundle.exploded_by().sum()), bundle.n_paths, level)


def defect_via_explosion(bundle: PathBundle) -> McEstimate:
    """1 - E[Z_T] = P*(sigma <= T) as a Bernoulli mean."""
    if bundle.measure is MeasureTag.REFERENCE:
        raise InvalidArgumentError('defect_via_explosion needs a Follmer-measure bundle')
    if bundle.n_paths == 0:
        raise InsufficientDataError('empty bundle')
    return accumulate(bundle.exploded_by().astype(float))


def cutoff_sensitivity(grid: TimeGrid, src: RandomSource, params: PropParams,
                       cutoffs: Sequence[float], path_indices=1000):
    """Follmer-1 explosion frequency for each explosion cutoff (same random draws)."""
    results = []
    for cutoff in cutoffs:
        bundle = simulate_under_follmer1(grid, src, params, path_indices, cutoff=cutoff)
        est = explosion_proportion(bundle)
        logger.info('cutoff {:g}: defect {:.5f} [{:.5f}, {:.5f}]'
                    .format(cutoff, est.point, est.lower, est.upper))
        results.append((float(cutoff), est))
    return results


def dump_paths(bundle: PathBundle, directory: str, names: Optional[Iterable[str]] = None,
               rows: Optional[Iterable[int]] = None) -> list:
    """Write ``t,value,exploded`` CSVs, one per (process, path)."""
    names = list(bundle.processes) if names is None else list(names)
    rows = range(bundle.n_paths) if rows is None else rows
    written = []
    for row in rows:
        path_index = int(bundle.path_indices[row])
        for name in names:
            p = bundle[name].row(row)
            filename = os.path.join(directory, '{}_{}_{}.csv'.format(
                bundle.measure.name.lower(), name, path_index))
            out = CsvOutfile(filename, PATH_COLUMNS,
                             header_line(measure=bundle.measure.value, process=name,
                                         path_index=path_index, T=bundle.grid.T))
            out.initialize()
            out.write_rows(zip(bundle.grid.times, p.values, p.exploded))
            written.append(filename)
    logger.info('dumped {} path files to {}'.format(len(written), directory))
    return written
