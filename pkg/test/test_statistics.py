import numpy as np
import pytest

from sslab.exceptions import InvalidArgumentError
from sslab.utils.io import header_line, parse_header, read_csv, write_csv
from sslab.utils.random_number_generator import RandomSource
from sslab.utils.statistics import (McEstimate, accumulate, binomial_exact, drift_regression,
                                    merge, merge_all, one_sided_test, two_sided_test,
                                    verify_equality, verify_strict, verify_upper_bound)


def test_accumulate_matches_numpy():
    x = np.random.default_rng(0).normal(2.0, 3.0, 5000)
    est = accumulate(x)
    assert est.n == 5000
    assert est.mean == pytest.approx(x.mean(), rel=1e-12)
    assert est.variance == pytest.approx(x.var(ddof=1), rel=1e-10)
    assert est.stderr == pytest.approx(x.std(ddof=1) / np.sqrt(5000), rel=1e-10)


def test_merge_is_exact():
    x = np.random.default_rng(1).exponential(size=3001)
    whole = accumulate(x)
    parts = merge_all([accumulate(x[:1000]), accumulate(x[1000:1001]), accumulate(x[1001:])])
    assert parts.n == whole.n
    assert parts.mean == pytest.approx(whole.mean, rel=1e-12)
    assert parts.m2 == pytest.approx(whole.m2, rel=1e-10)
    assert merge(McEstimate(), whole) == whole


def test_single_sample_has_no_stderr():
    est = accumulate([1.0])
    assert not est.stderr_defined
    assert np.isnan(est.stderr)
    with pytest.raises(InvalidArgumentError):
        two_sided_test(est, 0.0)


def test_from_summary_roundtrip():
    est = McEstimate.from_summary(0.5, 0.01, 400)
    assert est.stderr == pytest.approx(0.01)
    with pytest.raises(InvalidArgumentError):
        McEstimate.from_summary(0.5, 0.01, 1)


def test_zero_variance_tests():
    est = accumulate(np.ones(10))
    verdict = one_sided_test(est, 1.0, '<')
    assert verdict.inconclusive and not verdict.reject
    assert one_sided_test(est, 2.0, '<').reject
    with pytest.raises(InvalidArgumentError):
        one_sided_test(est, 1.0, '!=')


def test_verify_strict_and_equality():
    est = McEstimate.from_summary(0.9, 0.001, 10000)
    assert verify_strict(est, 1.0, '<').passed
    assert not verify_strict(est, 0.9, '<').passed
    assert verify_equality(est, 0.9).passed
    assert not verify_equality(est, 0.95).passed
    wide = McEstimate.from_summary(0.9, 0.1, 100)
    check = verify_equality(wide, 0.9)
    assert not check.passed and 'half-width' in check.detail
    assert verify_upper_bound(est, 0.91).passed


def test_clopper_pearson_zero_successes():
    est = binomial_exact(0, 100000, 0.99)
    assert est.lower == 0.0
    assert est.upper == pytest.approx(1.0 - 0.01 ** (1.0 / 100000), rel=1e-8)
    assert est.upper < 1e-4


def test_clopper_pearson_contains_point():
    est = binomial_exact(37, 200, 0.95)
    assert est.lower < est.point < est.upper
    full = binomial_exact(10, 10)
    assert full.upper == 1.0
    with pytest.raises(InvalidArgumentError):
        binomial_exact(3, 2)


def test_drift_regression_recovers_line():
    x = np.linspace(0.0, 1.0, 8)
    trend = drift_regression(x, 2.0 - 3.0 * x, np.zeros(8))
    assert trend.intercept == pytest.approx(2.0)
    assert trend.slope == pytest.approx(-3.0)


def test_random_source_is_order_independent():
    src = RandomSource(7)
    block = src.gaussian_block([5, 2, 9], 16)
    assert np.array_equal(block[1], src.get_gaussian(2, 16))
    assert not np.array_equal(src.get_gaussian(2, 16), src.get_gaussian(2, 16, substream=3))
    with pytest.raises(InvalidArgumentError):
        RandomSource(-1)


def test_csv_header_line(tmp_path):
    header = header_line(experiment='prop51', seed=3, config={'T': 1.0})
    filename = write_csv(str(tmp_path / 'a' / 'out.csv'), ('x', 'ok'), [(0.5, True)], header)
    first, rows = read_csv(filename)
    assert first.startswith('#')
    items = parse_header(first)
    assert items['experiment'] == 'prop51' and items['seed'] == '3'
    assert rows == [{'x': '0.5', 'ok': 'true'}]
