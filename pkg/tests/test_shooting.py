import numpy as np
import pytest

from selfsim.core import constant_profile, make_params, singular_profile
from selfsim.fixtures import (A_STAR_REFERENCE, REGRESSION_LABELS,
                              SHOOTING_BRACKETS, SUBCRITICAL_SCAN,
                              supercritical_scan_grid)
from selfsim.shooting import (DECAYING, GROWING, INCONCLUSIVE_CONSTANT,
                              SIGN_CHANGING, ShootingError, classify,
                              find_brackets, integrate_radial, ode_residual,
                              scan_initial_values, shoot)

P37 = make_params(3, 7.0, require_supercritical=True)


@pytest.fixture(scope="module")
def profile37():
    a_lo, a_hi = SHOOTING_BRACKETS[(3, 7.0)]
    return shoot(P37, a_lo, a_hi)


def test_constant_start_is_inconclusive_constant():
    traj = integrate_radial(make_params(3, 3.0), (0.5) ** 0.5, tol=1e-10)
    assert classify(traj) == INCONCLUSIVE_CONSTANT
    assert traj.departure == 0


def test_zero_start_stays_zero():
    traj = integrate_radial(make_params(3, 3.0), 0.0, tol=1e-10)
    assert np.max(np.abs(traj.w)) == 0.0


def test_regression_label_midrange_height():
    a = 1.5 * P37.kappa
    traj = integrate_radial(P37, a, tol=1e-12)
    assert classify(traj) == REGRESSION_LABELS[(3, 7.0, "a=1.5kappa")]
    assert traj.departure == -1


def test_departure_flip_across_recorded_bracket():
    a_lo, a_hi = SHOOTING_BRACKETS[(3, 7.0)]
    lo = integrate_radial(P37, a_lo, tol=1e-12)
    hi = integrate_radial(P37, a_hi, tol=1e-12)
    assert classify(lo) == SIGN_CHANGING and lo.departure == -1
    assert classify(hi) == GROWING and hi.departure == +1


def test_shoot_finds_decaying_profile(profile37):
    prof = profile37
    assert prof.classification == DECAYING
    assert prof.meta["ode_residual"] <= 1e-7
    assert np.all(prof.values > 0)
    assert prof.meta["a"] == pytest.approx(A_STAR_REFERENCE[(3, 7.0)], abs=5e-9)
    assert prof.decay_coeff == pytest.approx(0.6255, abs=5e-3)


def test_shoot_is_deterministic(profile37):
    a_lo, a_hi = SHOOTING_BRACKETS[(3, 7.0)]
    again = shoot(P37, a_lo, a_hi)
    assert again.meta["a"] == profile37.meta["a"]
    assert np.array_equal(again.values, profile37.values)


def test_shoot_requires_departure_flip():
    with pytest.raises(ShootingError, match="no bracket"):
        shoot(P37, 1.0, 1.2)


def test_taylor_start_insensitivity():
    a = 1.5 * P37.kappa
    t1 = integrate_radial(P37, a, tol=1e-12, eps=1e-6)
    t2 = integrate_radial(P37, a, tol=1e-12, eps=5e-7)
    w1, w2 = t1.sample(1.0)[0], t2.sample(1.0)[0]
    assert abs(w1 - w2) < 1e-9


def test_ode_residual_constant_and_singular():
    params = make_params(7, 3.0)
    assert ode_residual(constant_profile(params, "+")) < 1e-12
    sing = singular_profile(params, grid=np.geomspace(0.1, 20.0, 4000))
    assert ode_residual(sing) < 1e-9


def test_ode_residual_perturbed_constant_first_order():
    # w = kappa + d: first order residual d (p kappa^{p-1} - 1/(p-1)) = d for any p,
    # exact value |f(kappa+d)| with f(w) = -w/(p-1) + w^p
    d = 0.01
    for p in (3.0, 7.0, 2.5):
        params = make_params(3, p)
        prof = constant_profile(params, "+")
        prof = type(prof)(kind="tabulated", params=params, grid=prof.grid,
                          values=prof.values + d, derivs=prof.derivs)
        w = params.kappa + d
        exact = abs(-w / (p - 1.0) + w**p)
        res = ode_residual(prof)
        assert res == pytest.approx(exact, rel=1e-10)
        assert res == pytest.approx(d, rel=0.06)


def test_supercritical_scan_has_exactly_one_bracket():
    grid = supercritical_scan_grid(P37.kappa)
    brackets = find_brackets(P37, grid, tol=1e-10)
    assert len(brackets) == 1
    a_lo, a_hi = brackets[0]
    assert a_lo < A_STAR_REFERENCE[(3, 7.0)] < a_hi


def test_subcritical_scan_finds_no_profile():
    params = make_params(3, 2.0)
    grid = SUBCRITICAL_SCAN[(3, 2.0)]
    rows = scan_initial_values(params, grid, tol=1e-10)
    assert all(label == SIGN_CHANGING for _, label, _ in rows)
    assert find_brackets(params, grid, tol=1e-10) == []
