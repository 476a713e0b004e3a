"""Monte Carlo statistics: mergeable accumulators, intervals and tests.

Every headline claim of the lab is reduced to one of two checks on an
estimate:

- strict inequality: the two-sided interval at ``level`` excludes the boundary;
- equality: the interval contains the value and its half-width is below a
  resolution.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from sklearn.linear_model import LinearRegression

from sslab.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.99
DEFAULT_TEST_SIGNIFICANCE = 0.001
DEFAULT_RESOLUTION = 0.01


@dataclass(frozen=True)
class McEstimate:
    """Mean/variance accumulator of a Monte Carlo sample.

    ``m2`` is the sum of squared deviations from the mean, so two estimates
    merge exactly (Chan et al. pairwise update).
    """
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @property
    def stderr_defined(self) -> bool:
        return self.n >= 2

    @property
    def variance(self) -> float:
        if not self.stderr_defined:
            return float('nan')
        return max(self.m2, 0.0) / (self.n - 1)

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))

    @property
    def stderr(self) -> float:
        if not self.stderr_defined:
            return float('nan')
        return float(np.sqrt(self.variance / self.n))

    def half_width(self, level: float = DEFAULT_LEVEL) -> float:
        return float(stats.norm.ppf(0.5 + level / 2.0) * self.stderr)

    def ci(self, level: float = DEFAULT_LEVEL) -> Tuple[float, float]:
        """Symmetric normal confidence interval."""
        h = self.half_width(level)
        return self.mean - h, self.mean + h

    @classmethod
    def from_summary(cls, mean: float, stderr: float, n: int) -> 'McEstimate':
        """Rebuild an estimate from a reported mean, stderr and sample count."""
        if n < 2:
            raise InvalidArgumentError('n must be >= 2 to carry a stderr')
        return cls(int(n), float(mean), float(stderr) ** 2 * n * (n - 1))

    def merge(self, other: 'McEstimate') -> 'McEstimate':
        return merge(self, other)

    def scaled(self, factor: float, shift: float = 0.0) -> 'McEstimate':
        """Estimate of ``factor * value + shift``."""
        return McEstimate(self.n, factor * self.mean + shift, factor * factor * self.m2)


def accumulate(values) -> McEstimate:
    """Accumulate a sample into an McEstimate.

    Two-pass mean and squared deviations; ``np.sum`` uses pairwise summation,
    which keeps the rounding error at O(log n).
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    n = int(x.size)
    if n == 0:
        return McEstimate()
    mean = float(np.sum(x) / n)
    dev = x - mean
    m2 = float(np.sum(dev * dev))
    return McEstimate(n, mean, m2)


def merge(a: McEstimate, b: McEstimate) -> McEstimate:
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * b.n / n
    m2 = a.m2 + b.m2 + delta * delta * a.n * b.n / n
    return McEstimate(n, mean, m2)


def merge_all(estimates: Sequence[McEstimate]) -> McEstimate:
    total = McEstimate()
    for est in estimates:
        total = merge(total, est)
    return total


@dataclass(frozen=True)
class TestVerdict:
    """Outcome of a z-test against a null value."""
    z: float
    reject: bool
    inconclusive: bool = False
    p_value: float = float('nan')

    __test__ = False


def _z_score(est: McEstimate, null: float) -> Optional[float]:
    if not est.stderr_defined:
        raise InvalidArgumentError('stderr undefined for n = {}'.format(est.n))
    diff = est.mean - null
    if est.stderr == 0.0:
        if diff == 0.0:
            return None
        return float(np.copysign(np.inf, diff))
    return diff / est.stderr


def one_sided_test(est: McEstimate, null: float, direction: str,
                   significance: float = DEFAULT_TEST_SIGNIFICANCE) -> TestVerdict:
    """One-sided z-test.

    Args:
        est (McEstimate): Sample estimate.
        null (float): Null value.
        direction (str): ``'<'`` tests mean < null, ``'>'`` tests mean > null.
        significance (float): Test level, 0.1% by default.

    Returns:
        TestVerdict: z-score, rejection flag and p-value.
    """
    if direction not in ('<', '>'):
        raise InvalidArgumentError("direction must be '<' or '>', got {!r}".format(direction))
    z = _z_score(est, null)
    if z is None:
        return TestVerdict(z=0.0, reject=False, inconclusive=True, p_value=1.0)
    if direction == '<':
        p = float(stats.norm.cdf(z))
    else:
        p = float(stats.norm.sf(z))
    return TestVerdict(z=z, reject=p < significance, p_value=p)


def two_sided_test(est: McEstimate, null: float,
                   significance: float = DEFAULT_TEST_SIGNIFICANCE) -> TestVerdict:
    z = _z_score(est, null)
    if z is None:
        return TestVerdict(z=0.0, reject=False, inconclusive=True, p_value=1.0)
    p = float(2.0 * stats.norm.sf(abs(z)))
    return TestVerdict(z=z, reject=p < significance, p_value=p)


@dataclass(frozen=True)
class BinomialEstimate:
    successes: int
    trials: int
    level: float
    lower: float
    upper: float

    @property
    def point(self) -> float:
        return self.successes / self.trials if self.trials else float('nan')

    def as_estimate(self) -> McEstimate:
        """Same proportion as a Bernoulli McEstimate, for z-test combination."""
        p = self.point
        return McEstimate(self.trials, p, p * (1.0 - p) * self.trials)


def binomial_exact(successes: int, trials: int, level: float = DEFAULT_LEVEL) -> BinomialEstimate:
    """Clopper-Pearson interval.

    The all-failure and all-success cases get a one-sided bound at ``level``,
    e.g. zero hits in n trials gives upper = 1 - (1 - level)^(1/n).
    """
    if trials <= 0 or successes < 0 or successes > trials:
        raise InvalidArgumentError('need 0 <= successes <= trials, trials > 0; got {}/{}'
                                   .format(successes, trials))
    alpha = 1.0 - level
    if successes == 0:
        lower = 0.0
        upper = float(stats.beta.ppf(level, 1, trials))
    elif successes == trials:
        lower = float(stats.beta.ppf(alpha, trials, 1))
        upper = 1.0
    else:
        lower = float(stats.beta.ppf(alpha / 2.0, successes, trials - successes + 1))
        upper = float(stats.beta.ppf(1.0 - alpha / 2.0, successes + 1, trials - successes))
    return BinomialEstimate(successes, trials, level, lower, upper)


@dataclass(frozen=True)
class ClaimCheck:
    """A verified (or refuted) population-level claim."""
    claim: str
    passed: bool
    estimate: float
    ci: Tuple[float, float]
    detail: str = ''


def verify_strict(est: McEstimate, boundary: float, direction: str,
                  level: float = DEFAULT_LEVEL, claim: str = '') -> ClaimCheck:
    """Strict inequality: the interval lies entirely on one side of ``boundary``."""
    lo, hi = est.ci(level)
    if direction == '<':
        passed = hi < boundary
    elif direction == '>':
        passed = lo > boundary
    else:
        raise InvalidArgumentError("direction must be '<' or '>'")
    return ClaimCheck(claim or 'mean {} {}'.format(direction, boundary), bool(passed), est.mean,
                      (lo, hi))


def verify_equality(est: McEstimate, value: float, level: float = DEFAULT_LEVEL,
                    resolution: float = DEFAULT_RESOLUTION, claim: str = '') -> ClaimCheck:
    """Equality: the interval contains ``value`` and is narrower than ``resolution``."""
    lo, hi = est.ci(level)
    half = (hi - lo) / 2.0
    passed = lo <= value <= hi and half < resolution
    detail = '' if half < resolution else 'half-width {:.4g} >= {}'.format(half, resolution)
    return ClaimCheck(claim or 'mean == {}'.format(value), bool(passed), est.mean, (lo, hi),
                      detail)


def verify_upper_bound(est: McEstimate, bound: float, level: float = DEFAULT_LEVEL,
                       claim: str = '') -> ClaimCheck:
    """Weak inequality: the upper interval end does not exceed ``bound``."""
    lo, hi = est.ci(level)
    return ClaimCheck(claim or 'mean <= {}'.format(bound), bool(hi <= bound), est.mean, (lo, hi))


@dataclass(frozen=True)
class DriftTrend:
    intercept: float
    slope: float
    n_bins: int = field(default=0)


def drift_regression(midpoints, means, stderrs) -> DriftTrend:
    """Weighted linear fit of per-bin mean increments against bin midpoints.

    Bins with zero or undefined stderr get unit weight, so a noiseless
    process still yields its exact trend.
    """
    x = np.asarray(midpoints, dtype=float).reshape(-1, 1)
    y = np.asarray(means, dtype=float)
    se = np.asarray(stderrs, dtype=float)
    weights = np.ones_like(y)
    ok = np.isfinite(se) & (se > 0)
    if ok.all():
        weights = 1.0 / se ** 2
    if len(y) < 2:
        return DriftTrend(float(y[0]) if len(y) else 0.0, 0.0, len(y))
    model = LinearRegression().fit(x, y, sample_weight=weights)
    return DriftTrend(float(model.intercept_), float(model.coef_[0]), len(y))
