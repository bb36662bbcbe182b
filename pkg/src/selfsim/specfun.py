"""Log-Gamma, digamma and trigamma for positive real arguments.

``log_gamma`` uses a Lanczos rational approximation (g = 7, 9 terms); the
Stirling/Bernoulli asymptotic series is kept as an independent cross-check
route, and digamma/trigamma are computed by upward recurrence into the
asymptotic regime.  Relative accuracy is ~1e-14 on [0.1, 200].
"""
from __future__ import annotations

import numpy as np

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)

# Bernoulli numbers B_2, B_4, ..., B_16
_BERNOULLI = np.array([
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0,
])


def _check_positive(x: np.ndarray, name: str):
    if np.any(~(x > 0.0)):
        raise ValueError(f"{name} requires a strictly positive argument")


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    _check_positive(x, "log_gamma")
    z = x - 1.0
    series = np.full_like(z, _LANCZOS_COEF[0])
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        series = series + c / (z + i)
    t = z + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(series)
    return out if out.ndim else float(out)


def log_gamma_stirling(x, terms: int = 8):
    """ln Gamma(x) by the Bernoulli asymptotic series, shifted to x >= 12.

    Independent of the Lanczos route; used for cross-validation.
    """
    x = np.asarray(x, dtype=float)
    _check_positive(x, "log_gamma_stirling")
    xs = np.atleast_1d(x.astype(float))
    shift = np.zeros_like(xs)
    while np.any(xs < 12.0):
        mask = xs < 12.0
        shift[mask] += np.log(xs[mask])
        xs[mask] += 1.0
    out = (xs - 0.5) * np.log(xs) - xs + _HALF_LOG_2PI
    for k in range(1, terms + 1):
        out += _BERNOULLI[k - 1] / (2 * k * (2 * k - 1) * xs ** (2 * k - 1))
    out -= shift
    return out.reshape(np.shape(x)) if np.shape(x) else float(out[0])


def digamma(x):
    """d/dx ln Gamma(x) for x > 0 (recurrence into the asymptotic regime)."""
    x = np.asarray(x, dtype=float)
    _check_positive(x, "digamma")
    xs = np.atleast_1d(x.astype(float))
    acc = np.zeros_like(xs)
    while np.any(xs < 10.0):
        mask = xs < 10.0
        acc[mask] -= 1.0 / xs[mask]
        xs[mask] += 1.0
    inv2 = 1.0 / xs**2
    out = np.log(xs) - 0.5 / xs
    term = inv2.copy()
    for k in range(1, len(_BERNOULLI) + 1):
        out -= _BERNOULLI[k - 1] / (2 * k) * term
        term *= inv2
    out += acc
    return out.reshape(np.shape(x)) if np.shape(x) else float(out[0])


def trigamma(x):
    """Second derivative of ln Gamma for x > 0."""
    x = np.asarray(x, dtype=float)
    _check_positive(x, "trigamma")
    xs = np.atleast_1d(x.astype(float))
    acc = np.zeros_like(xs)
    while np.any(xs < 10.0):
        mask = xs < 10.0
        acc[mask] += 1.0 / xs[mask] ** 2
        xs[mask] += 1.0
    inv = 1.0 / xs
    inv2 = inv * inv
    out = inv + 0.5 * inv2
    term = inv2 * inv
    for k in range(1, len(_BERNOULLI) + 1):
        out += _BERNOULLI[k - 1] * term
        term *= inv2
    out += acc
    return out.reshape(np.shape(x)) if np.shape(x) else float(out[0])
