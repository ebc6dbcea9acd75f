import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from scorepower.family import Family, FamilyKind

# log pmf and kappa derivatives frozen from 40-digit mpmath evaluation of the
# gamma-function form of the negative binomial
NB_ORACLE = [
    # y, mu, kappa, log pmf, d/dkappa, d2/dkappa2
    (0, 2.5, 0.8, -1.3732653608351370843, 0.67491503437725468976, -0.81923203038758118761),
    (7, 2.5, 0.8, -3.6052237226307660719, 0.035584678008358776214, -0.6142096400607630876),
    (40, 3.0, 1e-6, -69.375483678131805318, 664.47980260736153235, -20196.785296152329211),
    (150, 60.0, 2.0, -6.7212316167656066198, -0.17268833014331576788, -0.0098164198439141545526),
]


@pytest.mark.parametrize("y,mu,kappa,lp,d1,d2", NB_ORACLE)
def test_negbin_log_pmf_matches_high_precision(y, mu, kappa, lp, d1, d2):
    fam = Family.negbin(kappa)
    assert fam.log_pmf(y, mu) == pytest.approx(lp, rel=1e-12, abs=1e-12)
    g1, g2 = fam.kappa_derivatives(np.array([y]), np.array([mu]), kappa)
    assert g1[0] == pytest.approx(d1, rel=1e-8)
    assert g2[0] == pytest.approx(d2, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(y=st.integers(0, 300), mu=st.floats(0.01, 80), kappa=st.floats(1e-4, 8))
def test_negbin_log_pmf_agrees_with_scipy(y, mu, kappa):
    ref = stats.nbinom.logpmf(y, 1 / kappa, 1 / (1 + kappa * mu))
    assert Family.negbin(kappa).log_pmf(y, mu) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_zero_dispersion_is_poisson():
    y = np.arange(30)
    mu = np.full(30, 4.2)
    nb = Family.negbin(0.0).log_pmf(y, mu)
    np.testing.assert_allclose(nb, stats.poisson.logpmf(y, 4.2), rtol=1e-12)
    np.testing.assert_allclose(Family.poisson().log_pmf(y, mu), nb, rtol=1e-12)


def test_bernoulli_log_pmf():
    fam = Family.bernoulli()
    np.testing.assert_allclose(fam.log_pmf([0, 1], [0.3, 0.3]), [math.log(0.7), math.log(0.3)])
    assert fam.support_max() == 1 and fam.is_binary


def test_pmf_sums_to_one():
    fam = Family.negbin(1.3)
    ys = np.arange(2000)
    assert fam.pmf(ys, np.full(ys.size, 5.0)).sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("fam", [Family.bernoulli(), Family.poisson(), Family.negbin(0.7)])
def test_eta_derivatives_match_finite_differences(fam):
    y = np.array([0.0, 1.0]) if fam.is_binary else np.array([0.0, 3.0, 11.0])
    eta = 0.4
    h = 1e-5

    def lp(e):
        return fam.log_pmf(y, fam.mean(np.full(y.size, e)))

    mu = fam.mean(np.full(y.size, eta))
    d1 = (lp(eta + h) - lp(eta - h)) / (2 * h)
    d2 = (lp(eta + h) - 2 * lp(eta) + lp(eta - h)) / h**2
    k = fam.dispersion or 0.0
    np.testing.assert_allclose(fam.eta_score(y, mu, k), d1, rtol=1e-7, atol=1e-8)
    np.testing.assert_allclose(fam.eta_hessian(y, mu, k), d2, rtol=1e-4, atol=1e-5)


def test_eta_weight_is_expected_negative_hessian():
    fam = Family.negbin(0.9)
    mu = 3.3
    ys = np.arange(400.0)
    p = fam.pmf(ys, np.full(ys.size, mu))
    expected = -np.sum(p * fam.eta_hessian(ys, mu, 0.9))
    assert fam.eta_weight(mu, 0.9) == pytest.approx(expected, rel=1e-12)


def test_mixed_eta_kappa_derivative():
    fam = Family.negbin(0.6)
    y, mu, k, h = np.array([5.0]), np.array([2.0]), 0.6, 1e-6
    d1p, _ = fam.kappa_derivatives(y, mu * math.exp(h), k)
    d1m, _ = fam.kappa_derivatives(y, mu * math.exp(-h), k)
    assert fam.eta_kappa_hessian(y, mu, k)[0] == pytest.approx(((d1p - d1m) / (2 * h))[0], rel=1e-6)


def test_invalid_outcomes_rejected():
    with pytest.raises(ValueError):
        Family.negbin(1.0).log_pmf([1.5], [1.0])
    with pytest.raises(ValueError):
        Family.poisson().log_pmf([-1], [1.0])
    with pytest.raises(ValueError):
        Family.bernoulli().log_pmf([2], [0.5])
    with pytest.raises(ValueError):
        Family.negbin(1.0).log_pmf([1], [0.0])


def test_family_kinds():
    assert Family.negbin(1.0).kind is FamilyKind.NEGBIN_LOG
    assert Family.negbin(1.0).has_dispersion
    assert not Family.poisson().has_dispersion
    assert Family.negbin(1.0).with_dispersion(2.0).dispersion == 2.0
