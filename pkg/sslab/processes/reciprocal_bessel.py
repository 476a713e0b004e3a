"""The driving strict local martingale dX = -X^2 dW, X_0 = 1, and its functionals.

X is sampled exactly as 1/|R| with R a 3-dimensional Brownian motion started
at (1, 0, 0). Its scalar driver is the Bessel driver dW = (R/|R|) . dB.

With I = int_0^t X^2 ds, Ito's formula for log X gives
int_0^t X dW = -log X_t - I / 2, so every exponential functional used below
reduces to a power of X times exp(c I):

    L      = X^(beta - 1) exp(-beta (beta - 1) I / 2)
    Z^beta = X^beta       exp(-beta (beta - 1) I / 2)
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm

from sslab.core.brownian import bridge_crossing_probability, brownian_increments
from sslab.core.calculus import time_integral
from sslab.core.path import Path
from sslab.core.time_grid import DEFAULT_N_STEPS, TimeGrid, make_grid
from sslab.exceptions import InvalidArgumentError
from sslab.utils.random_number_generator import STREAM_BESSEL, STREAM_BRIDGE, RandomSource
from sslab.utils.statistics import BinomialEstimate, binomial_exact

logger = logging.getLogger(__name__)

DEFAULT_BETA = 2.0
BARRIER_CHUNK = 2048


def hitting_prob_p(T: float) -> float:
    """p(T) = P(inf_{t <= T} W_t <= -1) = 2 Phi(-1 / sqrt(T))."""
    if not T > 0:
        raise InvalidArgumentError('T must be positive, got {}'.format(T))
    return float(2.0 * norm.cdf(-1.0 / np.sqrt(T)))


def tau_threshold(T: float) -> float:
    """Trigger level 1 + 1/p(T) of the stopping time tau."""
    return 1.0 + 1.0 / hitting_prob_p(T)


@dataclass(frozen=True, eq=False)
class PropParams:
    T: float
    beta: float
    grid: TimeGrid
    threshold: float = field(default=float('nan'))

    def __post_init__(self):
        if not self.beta > 1.0:
            raise InvalidArgumentError('beta must exceed 1, got {}'.format(self.beta))
        if self.grid.T != self.T:
            raise InvalidArgumentError('grid horizon {} differs from T = {}'
                                       .format(self.grid.T, self.T))
        if np.isnan(self.threshold):
            object.__setattr__(self, 'threshold', tau_threshold(self.T))
        if not self.threshold > 2.0:
            raise InvalidArgumentError('threshold must exceed 2, got {}'.format(self.threshold))

    @classmethod
    def create(cls, T: float = 1.0, beta: float = DEFAULT_BETA,
               n_steps: int = DEFAULT_N_STEPS) -> 'PropParams':
        return cls(float(T), float(beta), make_grid(T, n_steps))

    @property
    def log_threshold(self) -> float:
        return float(np.log(self.threshold))


def simulate_X(grid: TimeGrid, src: RandomSource, path_index) -> Tuple[Path, Path]:
    """Exact sample of X = 1/|R| and its driver W.

    Args:
        grid (TimeGrid): Sampling grid.
        src (RandomSource): Random streams; the three coordinates of R use
            disjoint sub-streams.
        path_index (int or sequence of int): One path or a batch.

    Returns:
        tuple: (X, W) as Paths.
    """
    dB = [brownian_increments(grid, src, path_index, substream=s) for s in STREAM_BESSEL]
    r = [np.zeros(dB[0].shape[:-1] + (grid.n_steps + 1,)) for _ in range(3)]
    for coord, inc in zip(r, dB):
        np.cumsum(inc, axis=-1, out=coord[..., 1:])
    r[0] += 1.0
    radius = np.sqrt(r[0] ** 2 + r[1] ** 2 + r[2] ** 2)
    dW = sum(coord[..., :-1] * inc for coord, inc in zip(r, dB)) / radius[..., :-1]
    del dB, r
    X = Path(grid, 1.0 / radius)
    W = Path.from_increments(grid, dW)
    return X, W


def x_squared_integral(X: Path) -> Path:
    """I_t = int_0^t X^2 ds by the trapezoidal rule."""
    return time_integral(X * X)


def log_identity_integral(X: Path, I: Optional[Path] = None) -> Path:
    """int_0^t X dW computed as -log X_t - I_t / 2."""
    if I is None:
        I = x_squared_integral(X)
    return X.with_values(-np.log(X.values) - 0.5 * I.values)


def likelihood_ratio_L(X: Path, beta: float, I: Optional[Path] = None) -> Path:
    """L = E(-beta X . W) / E(-X . W).

    L_t = exp(-(beta - 1) int X dW - (beta^2 - 1) I_t / 2) with the stochastic
    integral taken from the log-X identity.
    """
    if not beta > 1.0:
        raise InvalidArgumentError('beta must exceed 1, got {}'.format(beta))
    if I is None:
        I = x_squared_integral(X)
    J = log_identity_integral(X, I)
    return X.with_values(np.exp(-(beta - 1.0) * J.values - 0.5 * (beta ** 2 - 1.0) * I.values))


def likelihood_ratio_closed_form(X: Path, beta: float, I: Optional[Path] = None) -> Path:
    """L_t = X_t^(beta - 1) exp(-beta (beta - 1) I_t / 2)."""
    if I is None:
        I = x_squared_integral(X)
    return X.with_values(np.exp(log_power_density(np.log(X.values), I.values, beta, beta - 1.0)))


def log_power_density(log_x, I, beta: float, power: float):
    """log of X^power exp(-beta (beta - 1) I / 2)."""
    return power * log_x - 0.5 * beta * (beta - 1.0) * I


def stopping_index(L: Path, threshold: float) -> np.ndarray:
    """First grid index with L >= threshold, n_steps + 1 when L never gets there."""
    if not threshold > 1.0:
        raise InvalidArgumentError('threshold must exceed 1, got {}'.format(threshold))
    hit = np.where(L.exploded, False, L.values >= threshold)
    first = np.argmax(hit, axis=-1)
    return np.where(hit.any(axis=-1), first, L.grid.n_steps + 1)


def stopping_tau(L: Path, threshold: float):
    """tau = first grid time with L >= threshold, +inf otherwise (array for batches)."""
    idx = stopping_index(L, threshold)
    times = np.append(L.grid.times, np.inf)
    tau = times[idx]
    return float(tau) if np.ndim(tau) == 0 else tau


def stop_at(values: np.ndarray, index: np.ndarray) -> np.ndarray:
    """Freeze each row after its stopping index."""
    values = np.asarray(values, dtype=float)
    rows = np.atleast_2d(values)
    idx = np.minimum(np.atleast_1d(index), rows.shape[-1] - 1)[:, None]
    frozen = np.take_along_axis(rows, idx, axis=-1)
    out = np.where(np.arange(rows.shape[-1]) > idx, frozen, rows)
    return out.reshape(values.shape)


def barrier_hit_probability(T: float, n_steps: int, src: RandomSource, n_paths: int,
                            bridge: bool = True, barrier: float = -1.0) -> BinomialEstimate:
    """Monte Carlo estimate of P(inf_{t <= T} W_t <= barrier).

    Discrete monitoring plus, when ``bridge`` is set, a Brownian-bridge
    crossing draw per step from the path's bridge sub-stream.
    """
    grid = make_grid(T, n_steps)
    hits = 0
    for start in range(0, n_paths, BARRIER_CHUNK):
        idx = np.arange(start, min(start + BARRIER_CHUNK, n_paths))
        inc = brownian_increments(grid, src, idx)
        W = np.zeros((len(idx), n_steps + 1))
        np.cumsum(inc, axis=-1, out=W[:, 1:])
        dist = W - barrier
        hit = (dist <= 0).any(axis=-1)
        if bridge:
            p = bridge_crossing_probability(dist[:, :-1], dist[:, 1:], grid.dt)
            u = src.uniform_block(idx, n_steps, STREAM_BRIDGE)
            hit |= (u < p).any(axis=-1)
        hits += int(hit.sum())
    logger.info('barrier {} over T = {}: {} hits in {} paths'.format(barrier, T, hits, n_paths))
    return binomial_exact(hits, n_paths)
