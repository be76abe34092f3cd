"""Oracles: scipy.stats for distribution functions (test-only dependency)
and Monte Carlo for the noncentral case."""

import math

import numpy as np
import pytest
from scipy import stats

from vizrec.stattests import (
    bonferroni,
    chi2_cdf,
    chi2_isf,
    chi2_sf,
    chi_squared_gof,
    min_samples_chi2,
    modified_chi2_test,
    noncentral_chi2_cdf,
)


@pytest.mark.parametrize("dof", [1, 2, 5, 9, 30])
@pytest.mark.parametrize("x", [0.01, 0.5, 2.0, 10.0, 50.0])
def test_chi2_cdf_against_scipy(dof, x):
    assert chi2_cdf(x, dof) == pytest.approx(stats.chi2.cdf(x, dof), rel=1e-9, abs=1e-12)
    assert chi2_sf(x, dof) == pytest.approx(stats.chi2.sf(x, dof), rel=1e-9, abs=1e-12)


def test_chi2_sf_deep_tail():
    # the continued fraction must stay accurate far past the mean
    assert chi2_sf(300.0, 9) == pytest.approx(stats.chi2.sf(300.0, 9), rel=1e-8)


@pytest.mark.parametrize("q", [0.5, 0.05, 1e-4, 5e-8])
@pytest.mark.parametrize("dof", [1, 4, 9])
def test_chi2_isf_against_scipy(q, dof):
    assert chi2_isf(q, dof) == pytest.approx(stats.chi2.isf(q, dof), rel=1e-7)


@pytest.mark.parametrize("dof,lam", [(1, 0.5), (4, 2.0), (9, 10.0), (20, 50.0)])
@pytest.mark.parametrize("x", [1.0, 10.0, 40.0, 120.0])
def test_noncentral_cdf_against_scipy(dof, lam, x):
    assert noncentral_chi2_cdf(x, dof, lam) == pytest.approx(
        stats.ncx2.cdf(x, dof, lam), rel=1e-8, abs=1e-12
    )


def test_noncentral_reduces_to_central():
    for x in (0.5, 3.0, 12.0):
        assert noncentral_chi2_cdf(x, 5, 0.0) == pytest.approx(chi2_cdf(x, 5), rel=1e-10)


def test_noncentral_cdf_monte_carlo():
    rng = np.random.default_rng(42)
    n = 200_000
    dof, lam, x = 9, 12.0, 25.0
    draws = stats.ncx2.rvs(dof, lam, size=n, random_state=rng)
    est = (draws <= x).mean()
    se = math.sqrt(est * (1 - est) / n)
    assert abs(noncentral_chi2_cdf(x, dof, lam) - est) < 3 * se


def test_bonferroni_anchor():
    assert bonferroni(0.05, 1967) == pytest.approx(2.542e-5, rel=1e-3)
    assert math.floor(0.05 / 2.54e-5) in (1967, 1968, 1969)
    with pytest.raises(ValueError):
        bonferroni(0.05, 0)


def test_gof_rejects_obvious_shift():
    p = [0.5, 0.5]
    res = chi_squared_gof(p, [90, 10], alpha=0.05)
    assert res.reject and res.dof == 1
    assert res.p_value == pytest.approx(stats.chisquare([90, 10], [50, 50]).pvalue, rel=1e-8)


def test_gof_accepts_matching_counts():
    res = chi_squared_gof([0.25, 0.75], [25, 75], alpha=0.05)
    assert not res.reject and res.p_value == pytest.approx(1.0)


def test_gof_zero_reference_bin_with_mass_rejected():
    with pytest.raises(ValueError):
        chi_squared_gof([1.0, 0.0], [5, 5], alpha=0.05)


def test_gof_small_expected_counts_warn():
    res = chi_squared_gof([0.5, 0.5], [3, 5], alpha=0.05)
    assert res.warnings


def test_modified_chi2_needs_large_distance():
    p = (0.5, 0.5)
    close = (0.52, 0.48)
    far = (0.9, 0.1)
    eps = 0.01
    assert not modified_chi2_test(p, close, 500, eps, 0.05).reject
    assert modified_chi2_test(p, far, 500, eps, 0.05).reject


def test_modified_chi2_calibration():
    # under H0 (true chi2 distance == eps) rejections should be rare
    rng = np.random.default_rng(7)
    p = np.array([0.5, 0.5])
    m = 2000
    rejections = 0
    trials = 300
    for _ in range(trials):
        phat = rng.multinomial(m, p) / m
        d = float(((p - phat) ** 2 / p).sum())
        res = modified_chi2_test(tuple(p), tuple(phat), m, d + 1e-3, 0.05)
        rejections += res.reject
    assert rejections / trials <= 0.08


def test_min_samples_chi2_anchor():
    # K=2, alpha=5e-8, d=0.1: ceil(isf(alpha, 1) / 0.1)
    oracle = math.ceil(stats.chi2.isf(5e-8, 1) / 0.1)
    got = min_samples_chi2(0.1, 2, 5e-8)
    assert abs(got - oracle) <= 2
    assert abs(got - 298) <= 2


def test_min_samples_monotone_in_distance():
    assert min_samples_chi2(0.01, 5, 0.05) > min_samples_chi2(0.1, 5, 0.05)
