import numpy as np
import pytest

from sslab.arbitrage.deflators import deflator_check, log_wealth_bound_check
from sslab.arbitrage.drift_tests import (POSITIVE_TSTAT, DriftTestReport, Verdict, bin_indices,
                                         conditional_supermartingale_test,
                                         local_martingale_drift_test, supermartingale_test,
                                         window_drift_statistics, window_drift_test)
from sslab.arbitrage.strategies import (StrategyFamily, constant_fraction_log_wealth,
                                        constant_fraction_wealth, fraction_family)
from sslab.core.brownian import sample_brownian
from sslab.core.bundle import MeasureTag, PathBundle
from sslab.core.path import Path
from sslab.core.time_grid import make_grid
from sslab.exceptions import InsufficientDataError, InvalidArgumentError
from sslab.experiments.catalog import default_config
from sslab.experiments.example_experiments import window_drift
from sslab.processes.reciprocal_bessel import PropParams
from sslab.processes.scenarios import build_example_two
from sslab.utils.random_number_generator import RandomSource
from sslab.utils.statistics import McEstimate, accumulate

N_PATHS = 1200
STRICT = 1e-6
POWER_PATHS = default_config('example1').n_paths
REPLICATIONS = 100


def make_bundle(**processes) -> PathBundle:
    first = next(iter(processes.values()))
    n = first.n_paths
    return PathBundle(MeasureTag.REFERENCE, first.grid, processes, np.full(n, np.inf),
                      np.full(n, np.inf))


@pytest.fixture(scope='module')
def brownian():
    grid = make_grid(1.0, 64)
    return sample_brownian(grid, RandomSource(0), range(N_PATHS))


def test_bin_edges_partition_grid():
    grid = make_grid(1.0, 100)
    idx = bin_indices(grid, 16)
    assert idx[0] == 0 and idx[-1] == 100 and len(idx) == 17
    with pytest.raises(InvalidArgumentError):
        bin_indices(grid, 101)


def test_drift_verdicts(brownian):
    grid = brownian.grid
    up = brownian.with_values(brownian.values + 5.0 * grid.times)
    down = brownian.with_values(brownian.values - 5.0 * grid.times)
    bundle = make_bundle(W=brownian, up=up, down=down)
    rising = supermartingale_test(bundle, 'up', significance=STRICT)
    assert not rising.passed
    assert rising.positive_bins() == list(range(16))
    assert supermartingale_test(bundle, 'down', significance=STRICT).passed
    flat = local_martingale_drift_test(bundle, 'W', significance=STRICT)
    assert flat.passed and all(v is Verdict.ZERO for v in flat.verdicts)
    assert rising.trend().intercept > 0


def test_report_merge_is_exact(brownian):
    bundle = make_bundle(W=brownian)
    head = make_bundle(W=Path(brownian.grid, brownian.values[:600]))
    tail = make_bundle(W=Path(brownian.grid, brownian.values[600:]))
    whole = supermartingale_test(bundle, 'W')
    merged = supermartingale_test(head, 'W', min_paths=600).merge(
        supermartingale_test(tail, 'W', min_paths=600))
    assert np.allclose(merged.means, whole.means, atol=1e-14)
    assert len(whole.rows()) == 16


def test_drift_test_needs_paths(brownian):
    small = make_bundle(W=Path(brownian.grid, brownian.values[:10]))
    with pytest.raises(InsufficientDataError):
        supermartingale_test(small, 'W')


def test_conditional_test_on_decreasing_process(brownian):
    down = brownian.with_values(brownian.values - 5.0 * brownian.grid.times)
    report = conditional_supermartingale_test(make_bundle(V=down), 'V', n_levels=3,
                                              significance=STRICT)
    assert len(report.reports) == 3
    assert report.passed


def test_constant_fraction_wealth():
    grid = make_grid(1.0, 4)
    S = Path(grid, [1.0, 2.0, 1.0, 2.0, 4.0])
    assert constant_fraction_wealth(S, 1.0).values.tolist() == S.values.tolist()
    assert np.all(constant_fraction_wealth(S, 0.0).values == 1.0)
    half = constant_fraction_wealth(S, 0.5).terminal
    assert half == pytest.approx(1.5 * 0.75 * 1.5 * 1.5)


def test_log_wealth_of_full_fraction_is_log_price():
    params = PropParams.create(1.0, 2.0, 64)
    scenario = build_example_two(params, RandomSource(1), range(20))
    theta = scenario.integrand()
    full = constant_fraction_log_wealth(scenario.S, theta, 1.0)
    assert np.allclose(full.values, np.log(scenario.S.values))
    assert np.all(constant_fraction_log_wealth(scenario.S, theta, 0.0).values == 0.0)


def test_log_wealth_bound_holds_with_equality_at_one():
    params = PropParams.create(1.0, 2.0, 64)
    bundle = build_example_two(params, RandomSource(2), range(50)).to_bundle()

    def log_price(b):
        return np.log(b['S'].terminal)

    report = log_wealth_bound_check('Z_primary', log_price, bundle, 1e-12, log_scale=True)
    assert abs(report.estimate.mean) < 1e-12
    assert report.passed and report.excluded == 0


def test_strategy_family_sign_rules():
    with pytest.raises(InvalidArgumentError):
        StrategyFamily((-0.5, 1.0))
    family = fraction_family((-0.5, 1.0))
    assert not family.constrained
    assert len(StrategyFamily(switch_times=(0.5,), thresholds=(2.0,))) == 7
    with pytest.raises(InvalidArgumentError):
        StrategyFamily(thresholds=(0.0,))


def test_deflator_check_on_falling_price():
    grid = make_grid(1.0, 32)
    S = Path(grid, np.tile(np.exp(-grid.times), (N_PATHS, 1)))
    Y = Path.constant(grid, 1.0, N_PATHS)
    bundle = make_bundle(S=S, Y=Y)
    family = StrategyFamily((0.0, 0.5, 1.0), switch_times=(0.5,), thresholds=(2.0,))
    report = deflator_check('Y', 'S', family, bundle)
    assert report.passed
    assert len(report.reports) == len(family)
    assert report.failed_strategies() == []


def drifting_brownian(drift, n_paths, seed, n_steps=16):
    grid = make_grid(1.0, n_steps)
    dt = grid.dt
    rng = np.random.default_rng(seed)
    increments = rng.standard_normal((n_paths, n_steps)) * np.sqrt(dt) + drift * dt
    return Path.from_increments(grid, increments)


@pytest.mark.slow
@pytest.mark.parametrize('drift', [0.05, 0.1])
def test_small_drift_is_detected(drift):
    detected = 0
    for seed in range(REPLICATIONS):
        path = drifting_brownian(drift, POWER_PATHS, seed)
        report = supermartingale_test(make_bundle(V=path), 'V', n_bins=16)
        detected += not report.passed
    assert detected >= 0.99 * REPLICATIONS


@pytest.mark.slow
def test_driftless_paths_are_rarely_rejected():
    rejected = 0
    for seed in range(REPLICATIONS):
        path = drifting_brownian(0.0, POWER_PATHS, 1000 + seed)
        rejected += not supermartingale_test(make_bundle(V=path), 'V', n_bins=16).passed
    # 17 one-sided tests at 0.1% each
    assert rejected <= 10


@pytest.mark.parametrize('low, high', [(-1.0, 0.0), (0.0, 0.05), (0.05, 0.5), (0.5, 5.0)])
def test_verdicts_monotone_in_drift(brownian, low, high):
    grid = brownian.grid

    def report(drift):
        V = brownian.with_values(brownian.values + drift * grid.times)
        return supermartingale_test(make_bundle(V=V), 'V', significance=0.01)

    weak, strong = report(low), report(high)
    assert np.all(strong.tstats > weak.tstats)
    assert set(weak.positive_bins()) <= set(strong.positive_bins())
    assert weak.passed or not strong.passed
    assert strong.pooled().mean > weak.pooled().mean


def test_pooled_verdict_catches_spread_drift():
    grid = make_grid(1.0, 4)
    estimates = [McEstimate.from_summary(0.02, 0.01, 1000) for _ in range(4)]
    report = DriftTestReport.from_estimates('supermartingale', 'V', grid.times, estimates,
                                            significance=0.01)
    assert report.positive_bins() == []
    assert report.pooled_verdict is Verdict.POSITIVE
    assert not report.passed


def test_window_drift_statistics():
    grid = make_grid(1.0, 8)
    doubling = 2.0 ** np.arange(9)
    S = Path(grid, np.stack([doubling, np.ones(9)]))
    edges, estimates = window_drift_statistics(S, [2, 0], [9, 4], n_bins=2)
    assert edges.tolist() == [0.0, 0.5, 1.0]
    assert estimates[0].n == 6 and estimates[0].mean == pytest.approx(2.0 / 6.0)
    assert estimates[1].n == 4 and estimates[1].mean == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        window_drift_statistics(S - Path.constant(grid, 1.0, 2), 0, 8)


def test_coalesced_bins_reach_the_minimum_count():
    grid = make_grid(1.0, 6)
    samples = [[], [1.0], [1.0, 2.0, 3.0], [], [2.0, 4.0], [5.0]]
    report = DriftTestReport.from_estimates('window_drift', 'S', grid.times,
                                            [accumulate(s) for s in samples])
    merged = report.coalesced(3)
    assert merged.edges.tolist() == [grid.times[0], grid.times[3], grid.times[6]]
    assert [e.n for e in merged.estimates] == [4, 3]
    assert merged.estimates[1].mean == pytest.approx(11.0 / 3.0)
    whole = report.coalesced(100)
    assert whole.n_bins == 1 and whole.estimates[0].n == 7
    assert not whole.strictly_positive(min_count=100)
    assert merged.strictly_positive(min_tstat=1.0)
    # empty leading bins get no verdict
    assert np.isnan(report.tstats[0]) and report.verdicts[0] is Verdict.ZERO


def test_windows_split_the_steps_of_example_two():
    params = PropParams.create(1.0, 2.0, 64)
    scenario = build_example_two(params, RandomSource(8), range(400))
    S = scenario.to_bundle()['S']
    before = window_drift_test(S, 0, scenario.tau_index)
    after = window_drift_test(S, scenario.tau_index, params.grid.n_steps)
    total = sum(e.n for e in before.estimates) + sum(e.n for e in after.estimates)
    assert total == 400 * 64
    fired = np.isfinite(scenario.tau)
    assert sum(e.n for e in after.estimates) == int(np.sum(64 - scenario.tau_index[fired]))


@pytest.mark.slow
def test_example_two_price_rises_after_tau():
    params = PropParams.create(1.0, 2.0, 128)
    scenario = build_example_two(params, RandomSource(42), range(4000))
    S = scenario.to_bundle()['S']
    after = window_drift(window_drift_test(S, scenario.tau_index, params.grid.n_steps),
                         36.0, params.grid)
    assert after.strictly_positive(POSITIVE_TSTAT)
    before = window_drift(window_drift_test(S, 0, scenario.tau_index), 36.0, params.grid)
    assert before.n_bins == 16
    assert before.strictly_positive(POSITIVE_TSTAT)
