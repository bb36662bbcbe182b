import numpy as np
import pytest
import scipy.special as sps

from selfsim.specfun import digamma, log_gamma, log_gamma_stirling, trigamma


def test_log_gamma_anchor_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5) == pytest.approx(0.5723649429247001, abs=1e-13)  # ln sqrt(pi)
    assert log_gamma(5.0) == pytest.approx(np.log(24.0), abs=1e-13)


def test_log_gamma_against_scipy_wide_range():
    x = np.geomspace(0.1, 200.0, 400)
    rel = np.abs(log_gamma(x) - sps.gammaln(x)) / np.maximum(np.abs(sps.gammaln(x)), 1.0)
    assert rel.max() < 1e-12


def test_log_gamma_against_stirling_route():
    x = np.geomspace(0.1, 200.0, 113)
    rel = np.abs(log_gamma(x) - log_gamma_stirling(x)) / np.maximum(np.abs(log_gamma(x)), 1.0)
    assert rel.max() < 1e-12


def test_gamma_recurrence_log_spaced():
    x = np.geomspace(0.2, 150.0, 200)
    lhs = log_gamma(x + 1.0)
    rhs = np.log(x) + log_gamma(x)
    assert np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1.0)) < 1e-12


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        log_gamma(0.0)
    with pytest.raises(ValueError):
        log_gamma(-2.0)


def test_digamma_trigamma_against_scipy():
    x = np.geomspace(0.1, 150.0, 300)
    assert np.max(np.abs(digamma(x) - sps.digamma(x))) < 1e-12 * np.max(np.abs(sps.digamma(x)) + 1)
    assert np.max(np.abs(trigamma(x) - sps.polygamma(1, x)) / sps.polygamma(1, x)) < 1e-11


def test_digamma_is_log_gamma_derivative():
    x = np.linspace(0.7, 40.0, 50)
    h = 1e-6
    fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h)
    assert np.max(np.abs(fd - digamma(x))) < 1e-7
