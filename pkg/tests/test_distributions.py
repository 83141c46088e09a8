import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from dpdgauss import (
    MixtureSpec,
    RngStream,
    chisq_cdf,
    chisq_quantile,
    chisq_sf,
    get_preset,
    mvnormal_model,
    sample_contaminated_exponential,
    sample_model_normal,
    sample_poisson,
)
from dpdgauss.distributions import gammainc_lower, gammainc_upper, sample_exponential, stream_id_for

ALPHAS = (0.01, 0.05, 0.1, 0.5)


def _ks_crit_1pct(n):
    return 1.62762 / math.sqrt(n)


def test_quantile_examples():
    assert chisq_quantile(1, 0.05) == pytest.approx(3.84146, abs=5e-6)
    assert chisq_quantile(2, 0.05) == pytest.approx(5.991465, abs=1e-5)
    assert chisq_quantile(1, 0.5) == pytest.approx(0.4549364, abs=1e-6)


def test_cdf_examples():
    assert chisq_cdf(0.0, 3) == 0.0
    # df = 2 has the closed form 1 - exp(-x/2)
    assert chisq_cdf(5.991465, 2) == pytest.approx(-math.expm1(-5.991465 / 2), abs=1e-15)
    assert chisq_cdf(chisq_quantile(2, 0.05), 2) == pytest.approx(0.95, abs=1e-12)
    assert chisq_cdf(1e6, 1, 4.0) == 1.0


@pytest.mark.parametrize("df", range(1, 11))
def test_roundtrip_and_scipy(df):
    for alpha in ALPHAS:
        q = chisq_quantile(df, alpha)
        assert abs(chisq_cdf(q, df) - (1 - alpha)) < 1e-9
        assert q == pytest.approx(stats.chi2.isf(alpha, df), rel=1e-10)


@given(st.floats(0.0, 200.0), st.integers(1, 30), st.floats(0.0, 80.0))
def test_noncentral_against_scipy(x, df, nc):
    expected = stats.ncx2.cdf(x, df, nc) if nc > 0 else stats.chi2.cdf(x, df)
    assert chisq_cdf(x, df, nc) == pytest.approx(expected, abs=1e-10)
    assert chisq_cdf(x, df, nc) + chisq_sf(x, df, nc) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.0, 300.0), st.integers(1, 20))
def test_noncentral_zero_equals_central(x, df):
    assert abs(chisq_cdf(x, df, 0.0) - chisq_cdf(x, df)) < 1e-12


@given(st.floats(0.05, 60.0), st.floats(0.0, 150.0))
def test_incomplete_gamma_against_scipy(a, x):
    assert gammainc_lower(a, x) == pytest.approx(special.gammainc(a, x), abs=1e-13)
    assert gammainc_upper(a, x) == pytest.approx(special.gammaincc(a, x), abs=1e-13)


def test_sf_tail_precision():
    # survival values far below the cdf rounding floor
    assert chisq_sf(150.0, 1) == pytest.approx(stats.chi2.sf(150.0, 1), rel=1e-9)


def test_stream_determinism():
    a = sample_model_normal(get_preset("normal1d"), [0.0, 1.0], 1000, RngStream(5, 9))
    b = sample_model_normal(get_preset("normal1d"), [0.0, 1.0], 1000, RngStream(5, 9))
    assert a.tobytes() == b.tobytes()
    c = sample_model_normal(get_preset("normal1d"), [0.0, 1.0], 1000, RngStream(5, 10))
    assert a.tobytes() != c.tobytes()
    assert sample_poisson(4.0, 500, RngStream(1, 2)).tobytes() == sample_poisson(4.0, 500, RngStream(1, 2)).tobytes()
    assert stream_id_for("t", 1, 0.5) == stream_id_for("t", 1, 0.5)
    assert stream_id_for("t", 1, 0.5) != stream_id_for("t", 1.0, 0.5)
    assert RngStream(3, 4).child("x") == RngStream(3, 4).child("x")


def test_mixture_means():
    for eps, mean, tol in ((0.0, 2.0, 0.01), (1.0, 4.0, 0.02), (0.2, 2.4, 0.02)):
        y = sample_contaminated_exponential(MixtureSpec(2.0, eps), 10 ** 6, RngStream(11, int(eps * 10)))
        assert y.shape == (10 ** 6, 1)
        assert abs(y.mean() - mean) < tol


def test_mixture_validation():
    with pytest.raises(ValueError):
        MixtureSpec(2.0, 1.5)
    with pytest.raises(ValueError):
        MixtureSpec(-1.0, 0.1)


def test_model_normal_moments():
    y = sample_model_normal(mvnormal_model(1), [0.0, 1.0], 10 ** 6, RngStream(12, 0))
    assert abs(y.mean()) < 0.004 and abs(y.var() - 1) < 0.01
    y = sample_model_normal(get_preset("exponential"), [2.0], 10 ** 6, RngStream(12, 1))
    assert y.mean() == pytest.approx(2.0, rel=0.01) and y.var() == pytest.approx(4.0, rel=0.01)
    model = mvnormal_model(2)
    theta = [1.0, -1.0, 2.0, 0.6, 1.0]
    y = sample_model_normal(model, theta, 10 ** 5, RngStream(12, 2))
    np.testing.assert_allclose(np.cov(y, rowvar=False), [[2.0, 0.6], [0.6, 1.0]], atol=0.04)


def test_poisson_moments():
    y = sample_poisson(4.0, 10 ** 6, RngStream(13, 0))
    assert abs(y.mean() - 4) < 0.01 and abs(y.var() - 4) < 0.03
    assert np.all(y == np.floor(y)) and y.min() >= 0
    z = sample_poisson(0.001, 10 ** 5, RngStream(13, 1))
    assert np.mean(z == 0) == pytest.approx(math.exp(-0.001), abs=0.0005)
    big = sample_poisson(80.0, 10 ** 5, RngStream(13, 2))
    assert abs(big.mean() - 80) < 0.2


def test_ks_exponential_and_mixture():
    n = 10 ** 5
    y = sample_exponential(2.0, n, RngStream(14, 0))[:, 0]
    assert stats.kstest(y, stats.expon(scale=2.0).cdf).statistic < _ks_crit_1pct(n)
    spec = MixtureSpec(2.0, 0.15)
    y = sample_contaminated_exponential(spec, n, RngStream(14, 1))[:, 0]
    assert stats.kstest(y, spec.cdf).statistic < _ks_crit_1pct(n)


def test_ks_model_normal():
    n = 10 ** 5
    y = sample_model_normal(get_preset("exponential"), [3.0], n, RngStream(15, 0))[:, 0]
    assert stats.kstest(y, stats.norm(3.0, 3.0).cdf).statistic < _ks_crit_1pct(n)


@pytest.mark.parametrize("theta", [0.7, 4.0, 25.0, 50.0])
def test_poisson_distribution(theta):
    # discrete analogue of the KS check: max CDF gap on the support
    n = 10 ** 5
    y = sample_poisson(theta, n, RngStream(16, int(theta * 10)))[:, 0]
    ks = np.arange(0, int(theta + 10 * math.sqrt(theta) + 10))
    emp = np.searchsorted(np.sort(y), ks, side="right") / n
    assert np.max(np.abs(emp - stats.poisson.cdf(ks, theta))) < _ks_crit_1pct(n)
