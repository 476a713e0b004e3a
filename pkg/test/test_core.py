import numpy as np
import pytest
from scipy import stats

from sslab.core.brownian import bridge_crossing_probability, brownian_increments, sample_brownian
from sslab.core.bundle import MeasureTag, PathBundle
from sslab.core.calculus import (covariation, ito_integral, quadratic_variation,
                                 stochastic_exponential, time_integral)
from sslab.core.path import Path
from sslab.core.strategy import Strategy, wealth_process
from sslab.core.time_grid import make_grid
from sslab.exceptions import ContractViolationError, InvalidArgumentError
from sslab.processes.reciprocal_bessel import simulate_X
from sslab.utils.random_number_generator import (STREAM_BESSEL, STREAM_BRIDGE, STREAM_DRIVER,
                                                 STREAM_REFINE, RandomSource)


@pytest.fixture
def grid():
    return make_grid(1.0, 64)


def test_grid_ends_exactly_at_T():
    g = make_grid(0.3, 7)
    assert g.times[0] == 0.0 and g.times[-1] == 0.3
    assert g.uniform
    refined = make_grid(2.0, 10, refine=2.0)
    assert refined.times[-1] == 2.0 and not refined.uniform
    assert g.index_of(0.3) == 7


@pytest.mark.parametrize('T, n', [(0.0, 4), (-1.0, 4), (1.0, 0), (1.0, 2.5)])
def test_grid_rejects_bad_arguments(T, n):
    with pytest.raises(InvalidArgumentError):
        make_grid(T, n)


def test_explosion_flag_is_absorbing(grid):
    values = np.ones(grid.n_steps + 1)
    exploded = np.zeros(grid.n_steps + 1, dtype=bool)
    exploded[10] = True
    p = Path(grid, values, exploded)
    assert p.exploded[10:].all() and not p.exploded[:10].any()
    assert np.isnan(p.values[-1])
    assert p.explosion_index() == 10


def test_path_shape_is_checked(grid):
    with pytest.raises(InvalidArgumentError):
        Path(grid, np.zeros(grid.n_steps))
    with pytest.raises(InvalidArgumentError):
        Path(grid, np.zeros(grid.n_steps + 1)) + Path(make_grid(1.0, 32), np.zeros(33))


def test_ito_integral_of_deterministic_paths(grid):
    t = Path(grid, grid.times)
    one = Path.constant(grid, 1.0)
    assert ito_integral(one, t).terminal == pytest.approx(1.0)
    # left-point sum of t dt
    expected = np.sum(grid.times[:-1] * grid.dt)
    assert ito_integral(t, t).terminal == pytest.approx(expected)
    assert time_integral(t).terminal == pytest.approx(0.5)


def test_quadratic_variation_of_brownian_motion():
    g = make_grid(1.0, 4096)
    W = sample_brownian(g, RandomSource(3), range(200))
    qv = quadratic_variation(W).terminal
    assert np.mean(qv) == pytest.approx(1.0, abs=0.01)
    assert np.allclose(covariation(W, W).values, quadratic_variation(W).values)


def test_brownian_rows_depend_only_on_index():
    g = make_grid(1.0, 16)
    src = RandomSource(11)
    batch = sample_brownian(g, src, [4, 8])
    single = sample_brownian(g, src, 8)
    assert np.array_equal(batch.values[1], single.values)


def test_stochastic_exponential_of_linear_path(grid):
    m = Path(grid, 2.0 * grid.times)
    qv = Path(grid, grid.times)
    e = stochastic_exponential(m, qv)
    assert e.values[0] == 1.0
    assert e.terminal == pytest.approx(np.exp(1.5))
    with pytest.raises(InvalidArgumentError):
        stochastic_exponential(m.with_values(m.values + 1.0))


def test_bridge_crossing_probability():
    assert bridge_crossing_probability(-0.1, 1.0, 0.01) == 1.0
    assert bridge_crossing_probability(0.1, 0.1, 0.01) == pytest.approx(np.exp(-2.0))


def test_wealth_process_and_short_sale_ban(grid):
    S = Path(grid, 1.0 + grid.times)
    H = Strategy(Path.constant(grid, 2.0), label='hold2')
    assert wealth_process(1.0, H, S).terminal == pytest.approx(3.0)
    short = Strategy(Path.constant(grid, -1.0), label='short')
    with pytest.raises(ContractViolationError):
        wealth_process(1.0, short, S)
    unconstrained = Strategy(Path.constant(grid, -1.0), constrained=False)
    assert wealth_process(1.0, unconstrained, S).terminal == pytest.approx(0.0)
    steep = Path(grid, 1.0 + 2.0 * grid.times)
    with pytest.raises(ContractViolationError):
        wealth_process(1.0, unconstrained, steep)
    assert wealth_process(1.0, unconstrained, steep, check_floor=False).terminal == \
        pytest.approx(-1.0)
    with pytest.raises(InvalidArgumentError):
        Strategy(Path.constant(grid, 1.0), floor=-1.0)


def test_bundle_checks_density_explosion(grid):
    values = np.ones((2, grid.n_steps + 1))
    exploded = np.zeros_like(values, dtype=bool)
    exploded[0, 32:] = True
    Z = Path(grid, values, exploded)
    sigma = np.array([grid.times[32], np.inf])
    bundle = PathBundle(MeasureTag.FOLLMER1, grid, {'Z': Z}, np.full(2, np.inf), sigma,
                        density='Z')
    assert bundle.exploded_by().tolist() == [True, False]
    assert bundle.extract('Z')[1] == 1.0
    with pytest.raises(ContractViolationError):
        PathBundle(MeasureTag.FOLLMER1, grid, {'Z': Z}, np.full(2, np.inf),
                   np.array([np.inf, 0.25]), density='Z')
    with pytest.raises(InvalidArgumentError):
        bundle['missing']


def test_driver_stream_is_disjoint_from_bessel_streams(grid):
    ids = list(STREAM_BESSEL) + [STREAM_BRIDGE, STREAM_REFINE, STREAM_DRIVER]
    assert len(set(ids)) == len(ids)
    src = RandomSource(5)
    driver = brownian_increments(grid, src, [3])
    for s in STREAM_BESSEL:
        assert not np.allclose(driver, brownian_increments(grid, src, [3], substream=s))


def test_ito_isometry():
    g = make_grid(1.0, 64)
    W = sample_brownian(g, RandomSource(12), range(4000))
    J = ito_integral(W, W).terminal
    t = Path(g, g.times)
    energy = ito_integral(W * W, t).terminal
    diff = J ** 2 - energy
    assert abs(np.mean(diff)) < 4.0 * np.std(diff) / np.sqrt(len(diff))
    assert np.mean(energy) == pytest.approx(np.sum(g.times[:-1] * g.dt), rel=0.05)


def test_integral_of_brownian_motion_against_itself():
    g = make_grid(1.0, 4096)
    W = sample_brownian(g, RandomSource(13), range(200))
    J = ito_integral(W, W)
    exact = 0.5 * (W.values ** 2 - quadratic_variation(W).values)
    assert np.allclose(J.values, exact, atol=1e-12)
    assert np.max(np.abs(J.terminal - 0.5 * (W.terminal ** 2 - 1.0))) < 0.06


def test_product_of_stochastic_exponentials(grid):
    src = RandomSource(14)
    W1 = sample_brownian(grid, src, range(50))
    W2 = Path.from_increments(grid, brownian_increments(grid, src, range(50, 100)))
    M = W1
    N = W1.scale(0.5) + W2
    product = (stochastic_exponential(M, quadratic_variation(M)).values
               * stochastic_exponential(N, quadratic_variation(N)).values)
    combined = stochastic_exponential(M + N + covariation(M, N), quadratic_variation(M + N))
    assert np.allclose(product, combined.values, rtol=1e-10)


def test_bessel_driver_is_a_brownian_motion():
    g = make_grid(1.0, 4096)
    _, W = simulate_X(g, RandomSource(15), range(200))
    qv = quadratic_variation(W).terminal
    assert np.mean(qv) == pytest.approx(1.0, rel=0.01)
    z = (W.increments() / np.sqrt(g.dt)).ravel()
    assert stats.kstest(z, 'norm').pvalue > 1e-3
    assert abs(np.corrcoef(z[:-1], z[1:])[0, 1]) < 0.01
