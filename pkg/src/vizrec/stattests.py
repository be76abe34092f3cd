"""Classical-testing baseline: chi-squared goodness of fit, Bonferroni
correction, the noncentral distance test, and the minimum-sample-size
calculator.

The central chi-squared CDF uses the regularized lower incomplete gamma
function (series / continued fraction split at x = a+1); the noncentral
CDF is a Poisson-weighted mixture of central CDFs truncated when the
remaining Poisson mass drops below 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_EPS = 1e-16
_MAX_ITER = 10_000


def _gamma_p_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x), series form (x < a+1)."""
    term = 1.0 / a
    total = term
    k = a
    for _ in range(_MAX_ITER):
        k += 1.0
        term *= x / k
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x), Lentz continued fraction
    (x >= a+1).  Accurate for tiny tail probabilities."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_cdf(x: float, dof: float) -> float:
    if x <= 0:
        return 0.0
    a, xh = dof / 2.0, x / 2.0
    if xh < a + 1.0:
        return _gamma_p_series(a, xh)
    return 1.0 - _gamma_q_cf(a, xh)


def chi2_sf(x: float, dof: float) -> float:
    if x <= 0:
        return 1.0
    a, xh = dof / 2.0, x / 2.0
    if xh < a + 1.0:
        return 1.0 - _gamma_p_series(a, xh)
    return _gamma_q_cf(a, xh)


def chi2_isf(q: float, dof: float, tol: float = 1e-10) -> float:
    """Upper-tail quantile by bisection: x with sf(x) = q."""
    if not 0 < q < 1:
        raise ValueError("q must be in (0,1)")
    lo, hi = 0.0, max(dof, 1.0)
    while chi2_sf(hi, dof) > q:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("quantile bracket failed")
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if chi2_sf(mid, dof) > q:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def noncentral_chi2_cdf(x: float, dof: float, noncentrality: float, tail_tol: float = 1e-12) -> float:
    """CDF of the noncentral chi-squared via the Poisson mixture
    sum_j Pois(j; lambda/2) * CDF_central(x; dof + 2j)."""
    if noncentrality < 0:
        raise ValueError("noncentrality must be >= 0")
    if x <= 0:
        return 0.0
    if noncentrality == 0:
        return chi2_cdf(x, dof)
    half = noncentrality / 2.0
    total = 0.0
    weight_sum = 0.0
    log_half = math.log(half)
    for j in range(_MAX_ITER):
        logw = -half + j * log_half - math.lgamma(j + 1)
        w = math.exp(logw)
        weight_sum += w
        total += w * chi2_cdf(x, dof + 2 * j)
        if 1.0 - weight_sum < tail_tol:
            break
    return min(1.0, total)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    dof: int
    p_value: float
    reject: bool
    alpha: float
    warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.alpha,
            "warnings": list(self.warnings),
        }


def bonferroni(alpha: float, m: int) -> float:
    """Per-test level alpha/M over M pre-registered hypotheses."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0,1)")
    if m < 1:
        raise ValueError("M must be >= 1")
    return alpha / m


def chi_squared_gof(reference_pmf, observed_counts, alpha: float) -> TestResult:
    """Goodness-of-fit test of observed counts against a reference pmf."""
    p = [float(v) for v in reference_pmf]
    obs = [float(v) for v in observed_counts]
    if len(p) != len(obs):
        raise ValueError("reference pmf and counts have different lengths")
    m = sum(obs)
    if m < 1:
        raise ValueError("total count must be >= 1")
    if abs(sum(p) - 1.0) > 1e-9:
        raise ValueError("reference pmf does not sum to 1")
    warnings: list[str] = []
    stat = 0.0
    for pk, ok in zip(p, obs):
        expected = m * pk
        if pk == 0.0:
            if ok > 0:
                raise ValueError("observed mass in a zero-probability reference bin")
            continue
        if expected < 5.0:
            warnings.append(f"expected count {expected:.3g} < 5")
        stat += (ok - expected) ** 2 / expected
    dof = len(p) - 1
    pval = chi2_sf(stat, dof)
    return TestResult(stat, dof, pval, pval < alpha, alpha, tuple(warnings))


def modified_chi2_test(
    reference_pmf, observed_pmf, m: int, eps_chi2: float, alpha: float
) -> TestResult:
    """Test whether the chi-squared distance exceeds eps_chi2.

    The statistic m * sum((p_k - p_hat_k)^2 / p_k) is compared against a
    noncentral chi-squared with K-1 dof and noncentrality m * eps_chi2;
    rejection means the distance significantly exceeds the threshold.
    """
    p = [float(v) for v in reference_pmf]
    q = [float(v) for v in observed_pmf]
    if len(p) != len(q):
        raise ValueError("pmfs have different lengths")
    if any(pk <= 0 for pk in p):
        raise ValueError("reference pmf must be strictly positive")
    if eps_chi2 < 0:
        raise ValueError("eps_chi2 must be >= 0")
    if m < 1:
        raise ValueError("support m must be >= 1")
    dist = sum((pk - qk) ** 2 / pk for pk, qk in zip(p, q))
    stat = m * dist
    dof = len(p) - 1
    pval = 1.0 - noncentral_chi2_cdf(stat, dof, m * eps_chi2)
    return TestResult(stat, dof, pval, pval < alpha, alpha)


def min_samples_chi2(d_chi2: float, k: int, alpha: float) -> int:
    """Smallest support m whose deterministic statistic m*d_chi2 rejects at
    level alpha (perfect-estimator reading of the chi-squared distance)."""
    if d_chi2 <= 0:
        raise ValueError("d_chi2 must be positive")
    if k < 2:
        raise ValueError("K must be >= 2")
    quantile = chi2_isf(alpha, k - 1)
    return math.ceil(quantile / d_chi2)
