import numpy as np
import pytest

from sslab.core.bundle import MeasureTag
from sslab.core.path import Path
from sslab.core.time_grid import make_grid
from sslab.exceptions import InvalidArgumentError
from sslab.experiments.follmer_experiments import defect_lower_bound
from sslab.monte_carlo.follmer import (defect_direct, defect_via_explosion, dump_paths,
                                       explosion_proportion, girsanov_shift, path_chunks,
                                       simulate_example_two_follmer, simulate_under_follmer1,
                                       simulate_under_follmer_beta)
from sslab.processes.reciprocal_bessel import PropParams, hitting_prob_p, simulate_X
from sslab.processes.scenarios import build_example_one
from sslab.utils.io import read_csv
from sslab.utils.random_number_generator import RandomSource
from sslab.utils.statistics import accumulate


@pytest.fixture
def params():
    return PropParams.create(1.0, 2.0, 256)


def test_defect_lower_bound_constant():
    assert defect_lower_bound(1.0) == pytest.approx(0.076432, abs=1e-6)


def test_path_chunks_cover_range():
    blocks = list(path_chunks(10, 4, start=5))
    assert [b.tolist() for b in blocks] == [[5, 6, 7, 8], [9, 10, 11, 12], [13, 14]]
    with pytest.raises(InvalidArgumentError):
        list(path_chunks(0))


def test_follmer_one_price_is_shifted_brownian_motion(params):
    bundle = simulate_under_follmer1(params.grid, RandomSource(0), params, range(200))
    assert bundle.measure is MeasureTag.FOLLMER1
    quiet = ~bundle.hit('tau') & ~bundle.hit('sigma')
    Y = bundle['Y'].values[quiet]
    W = bundle['W_star'].values[quiet]
    assert np.allclose(Y, 1.0 + W, atol=1e-12)


def test_follmer_one_explodes(params):
    bundle = simulate_under_follmer1(params.grid, RandomSource(1), params, range(2000))
    est = explosion_proportion(bundle)
    assert est.successes > 0
    assert bundle['Z'].exploded[bundle.exploded_by()].any(axis=-1).all()
    via = defect_via_explosion(bundle)
    assert via.mean == pytest.approx(est.point)


def test_follmer_beta_never_explodes(params):
    bundle = simulate_under_follmer_beta(params.grid, RandomSource(2), params, range(1000))
    assert bundle.measure is MeasureTag.FOLLMER_BETA
    assert explosion_proportion(bundle).successes == 0
    assert np.all(np.isfinite(bundle['Z'].terminal))


@pytest.mark.slow
def test_defect_estimators_agree(params):
    src = RandomSource(3)
    direct = defect_direct(build_example_one(params, src, range(4000)).to_bundle())
    via = defect_via_explosion(simulate_under_follmer1(params.grid, src, params,
                                                       range(4000, 8000)))
    assert abs(direct.mean - via.mean) < 4.0 * np.hypot(direct.stderr, via.stderr)
    assert direct.mean > defect_lower_bound(1.0) - 4.0 * direct.stderr


def test_example_two_follmer_densities(params):
    sup = simulate_example_two_follmer(params.grid, RandomSource(4), params, 50)
    assert sup.measure is MeasureTag.EXAMPLE_TWO_TILDE
    primary = simulate_example_two_follmer(params.grid, RandomSource(4), params, 50,
                                           density='primary')
    assert primary.measure is MeasureTag.FOLLMER1
    with pytest.raises(InvalidArgumentError):
        simulate_example_two_follmer(params.grid, RandomSource(4), params, 5, density='other')


def test_estimators_check_measure(params):
    src = RandomSource(5)
    follmer = simulate_under_follmer1(params.grid, src, params, 10)
    with pytest.raises(InvalidArgumentError):
        defect_direct(follmer)
    reference = build_example_one(params, src, range(10)).to_bundle()
    with pytest.raises(InvalidArgumentError):
        explosion_proportion(reference)
    with pytest.raises(InvalidArgumentError):
        defect_via_explosion(reference)


def test_dump_paths(tmp_path, params):
    bundle = simulate_under_follmer1(params.grid, RandomSource(6), params, [3, 9])
    written = dump_paths(bundle, str(tmp_path), ['Y'], rows=[1])
    assert len(written) == 1 and written[0].endswith('follmer1_Y_9.csv')
    header, rows = read_csv(written[0])
    assert header.startswith('#') and len(rows) == 257


def test_girsanov_shift_removes_constant_drift():
    grid = make_grid(1.0, 64)
    drifted = Path(grid, np.tile(2.0 * grid.times, (3, 1)))
    shifted = girsanov_shift(drifted, Path.constant(grid, 2.0, 3))
    assert np.allclose(shifted.values, 0.0, atol=1e-12)


def frozen_after_tau(bundle, name):
    rows = np.flatnonzero(bundle.hit('tau') & ~bundle.hit('sigma'))
    idx = np.searchsorted(bundle.grid.times, bundle.tau[rows])
    values = bundle[name].values
    return rows, all(np.all(values[r, k:] == values[r, k]) for r, k in zip(rows, idx))


@pytest.mark.parametrize('simulate', [simulate_under_follmer1, simulate_under_follmer_beta])
def test_density_and_likelihood_freeze_after_tau(params, simulate):
    bundle = simulate(params.grid, RandomSource(7), params, range(1000))
    for name in ('Z', 'L', 'I'):
        rows, frozen = frozen_after_tau(bundle, name)
        assert rows.size > 0
        assert frozen, name
    # the price keeps moving
    rows, frozen = frozen_after_tau(bundle, 'Y')
    assert not frozen


def test_bridge_correction_only_adds_explosions(params):
    src = RandomSource(8)
    corrected = simulate_under_follmer1(params.grid, src, params, range(2000))
    plain = simulate_under_follmer1(params.grid, src, params, range(2000), bridge=False)
    assert np.array_equal(corrected['W_star'].values, plain['W_star'].values)
    hit, missed = corrected.exploded_by(), plain.exploded_by()
    assert hit.sum() >= missed.sum()
    assert np.all(hit[missed])


@pytest.mark.slow
def test_defect_grows_with_horizon():
    defects = []
    for T in (0.25, 1.0, 4.0):
        params = PropParams.create(T, 2.0, 256)
        X, _ = simulate_X(params.grid, RandomSource(9), range(4000))
        est = accumulate(1.0 - X.terminal)
        assert abs(est.mean - hitting_prob_p(T)) < 4.0 * est.stderr
        stopped = defect_direct(build_example_one(params, RandomSource(10),
                                                  range(4000)).to_bundle())
        assert stopped.mean > defect_lower_bound(T) - 4.0 * stopped.stderr
        defects.append(est)
    for lower, higher in zip(defects[:-1], defects[1:]):
        assert higher.ci(0.99)[0] > lower.ci(0.99)[1]
