"""Pathwise stochastic calculus on a time grid.

All integrals are left-point (predictable) sums; everything works on single
paths and on batches alike.
"""
from typing import Optional

import numpy as np

from sslab.exceptions import InvalidArgumentError
from sslab.core.path import Path, check_same_grid


def _cumulate(increments: np.ndarray) -> np.ndarray:
    out = np.zeros(increments.shape[:-1] + (increments.shape[-1] + 1,))
    np.cumsum(increments, axis=-1, out=out[..., 1:])
    return out


def _step_exploded(*paths: Path) -> np.ndarray:
    mask = paths[0].exploded
    for p in paths[1:]:
        mask = mask | p.exploded
    return mask


def ito_integral(integrand: Path, integrator: Path) -> Path:
    """Left-point integral sum_i h(t_i) (x(t_{i+1}) - x(t_i)), zero at t = 0."""
    check_same_grid(integrand, integrator)
    mask = _step_exploded(integrand, integrator)
    h = np.where(integrand.exploded, 0.0, integrand.values)[..., :-1]
    dx = np.diff(np.where(integrator.exploded, 0.0, integrator.values), axis=-1)
    inc = np.where(mask[..., 1:], 0.0, h * dx)
    return Path(integrand.grid, _cumulate(inc), mask)


def covariation(x: Path, y: Path) -> Path:
    check_same_grid(x, y)
    mask = _step_exploded(x, y)
    dx = np.diff(np.where(x.exploded, 0.0, x.values), axis=-1)
    dy = np.diff(np.where(y.exploded, 0.0, y.values), axis=-1)
    inc = np.where(mask[..., 1:], 0.0, dx * dy)
    return Path(x.grid, _cumulate(inc), mask)


def quadratic_variation(x: Path) -> Path:
    """Cumulative sum of squared increments."""
    return covariation(x, x)


def time_integral(f: Path) -> Path:
    """Trapezoidal integral of f against dt."""
    values = np.where(f.exploded, 0.0, f.values)
    inc = 0.5 * (values[..., :-1] + values[..., 1:]) * f.grid.dt
    inc = np.where(f.exploded[..., 1:], 0.0, inc)
    return Path(f.grid, _cumulate(inc), f.exploded)


def stochastic_exponential(m: Path, qv: Optional[Path] = None) -> Path:
    """E(m) = exp(m - m_0 - qv / 2).

    Args:
        m (Path): Continuous-valued path with m(0) = 0.
        qv (Path, optional): Quadratic variation of m when known in closed
            form; the realized quadratic variation is used otherwise.

    Returns:
        Path: Strictly positive at every finite sample, 1 at t = 0; explosion
        flags of ``m`` (and ``qv``) carry over.
    """
    start = m.values[..., 0]
    if np.any(np.abs(start) > 1e-12):
        raise InvalidArgumentError('stochastic_exponential needs m(0) = 0')
    if qv is None:
        qv = quadratic_variation(m)
    else:
        check_same_grid(m, qv)
    mask = m.exploded | qv.exploded
    exponent = np.where(mask, 0.0, m.values - 0.5 * qv.values)
    return Path(m.grid, np.exp(exponent), mask)
