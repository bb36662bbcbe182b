import math

import numpy as np
import pytest

from selfsim.core import constant_profile, make_params, singular_profile
from selfsim.fixtures import reference_profile
from selfsim.functionals import (EntropySearch, constant_f_closed_form,
                                 density, energy, entropy, f_functional,
                                 identities)

P33 = make_params(3, 3.0)
P37 = make_params(3, 7.0, require_supercritical=True)
P73 = make_params(7, 3.0, require_supercritical=True)


@pytest.fixture(scope="module")
def wshoot():
    return reference_profile(3, 7.0)


def test_energy_of_kappa_p3_exact():
    # E(kappa) = (1/2 - 1/(p+1)) kappa^{p+1}; p=3: (1/4)(1/4) = 0.0625
    rep = energy(constant_profile(P33, "+"))
    assert rep.energy == pytest.approx(0.0625, abs=1e-12)
    assert rep.energy_shortcut == pytest.approx(0.0625, abs=1e-12)
    assert not rep.flags


def test_energy_of_kappa_p7():
    # oracle: (3/8) * 6^{-4/3} = 0.03439507550931901 (mpmath)
    rep = energy(constant_profile(P37, "+"))
    assert rep.energy == pytest.approx(0.034395075509319, abs=1e-10)


def test_energy_of_zero():
    rep = energy(constant_profile(P33, "0"))
    assert rep.energy == 0.0


def test_energy_terms_sum():
    rep = energy(constant_profile(P37, "+"))
    assert rep.energy == pytest.approx(rep.grad_term + rep.mass_term
                                       - rep.potential_term, abs=1e-15)


def test_energy_of_singular_profile_is_gamma_value():
    # (7,3): E = 1/15, both forms (the profile is stationary)
    rep = energy(singular_profile(P73))
    assert rep.energy == pytest.approx(1.0 / 15.0, rel=1e-9)
    assert rep.energy_shortcut == pytest.approx(1.0 / 15.0, rel=1e-9)
    assert not rep.flags


def test_energy_of_shooting_profile(wshoot):
    rep = energy(wshoot)
    # frozen from the development bisection at rtol 1e-13 (scipy.quad oracle)
    assert rep.energy == pytest.approx(0.0443175848, rel=1e-6)
    assert abs(rep.energy - rep.energy_shortcut) / rep.energy < 1e-4
    assert rep.energy > energy(constant_profile(P37, "+")).energy


def test_f_equals_energy_at_origin():
    for prof in (constant_profile(P33, "+"), constant_profile(P37, "+"),
                 singular_profile(P73)):
        e = energy(prof).energy
        f = f_functional(prof, 0.0, -1.0)
        assert f == pytest.approx(e, rel=1e-10)


def test_f_of_constant_closed_form():
    # g(a) = kappa^2 a^{2/(p-1)} / (2(p-1)) - kappa^{p+1} a^{(p+1)/(p-1)}/(p+1)
    prof = constant_profile(P33, "+")
    for x0 in (0.0, 1.0, 3.0):
        assert f_functional(prof, x0, -1.0) == pytest.approx(0.0625, abs=1e-11)
    # p=3, t0=-2: g(2) = 2/8 - 4/16 = 0
    for x0 in (0.0, 2.0):
        assert f_functional(prof, x0, -2.0) == pytest.approx(0.0, abs=1e-12)
    for t0 in (-0.3, -1.7, -5.0):
        assert f_functional(prof, 1.3, t0) == pytest.approx(
            constant_f_closed_form(prof, t0), abs=1e-12)


def test_f_rejects_nonnegative_t0():
    prof = constant_profile(P33, "+")
    with pytest.raises(ValueError):
        f_functional(prof, 0.0, 0.0)


def test_entropy_of_constants():
    res = entropy(constant_profile(P33, "+"))
    assert res.lam == pytest.approx(0.0625, abs=1e-9)
    assert abs(res.x0_norm) <= 1e-4 and abs(math.log(-res.t0)) <= 1e-4
    assert res.ring_margin_t > 0.0
    assert abs(res.ring_margin_x) < 1e-10  # flat spatial direction
    res0 = entropy(constant_profile(P33, "0"))
    assert res0.lam == pytest.approx(0.0, abs=1e-12)


def test_entropy_of_shooting_profile(wshoot):
    res = entropy(wshoot)
    e = energy(wshoot).energy
    assert res.lam == pytest.approx(e, rel=1e-8)
    assert abs(res.x0_norm) <= 1e-4
    assert abs(math.log(-res.t0)) <= 1e-4
    assert res.ring_margin_t > 0 and res.ring_margin_x > 0
    assert not res.flags


def test_entropy_rejects_singular():
    with pytest.raises(ValueError):
        entropy(singular_profile(P73))


def test_entropy_never_below_sampled_f(wshoot):
    res = entropy(wshoot)
    assert all(v <= res.lam + 1e-8 for (_, _, v) in res.trace)


def test_identities_kappa_all_zero():
    rep = identities(constant_profile(P33, "+"))
    assert abs(rep.pohozaev_residual) < 1e-13
    assert abs(rep.mass_balance_residual) < 1e-13
    assert abs(rep.moment_balance_residual) < 1e-13
    assert rep.direction_residual == 0.0


def test_identities_singular_profile():
    rep = identities(singular_profile(P73))
    assert abs(rep.mass_balance_residual) < 1e-6
    assert abs(rep.pohozaev_residual) < 1e-6
    assert abs(rep.moment_balance_residual) < 1e-6


def test_identities_shooting_profile(wshoot):
    rep = identities(wshoot)
    assert abs(rep.pohozaev_residual) < 1e-5
    assert abs(rep.mass_balance_residual) < 1e-5
    assert abs(rep.moment_balance_residual) < 1e-5


def test_density_at_origin_is_energy(wshoot):
    res = density(wshoot, 0.0)
    assert res.theta == pytest.approx(energy(wshoot).energy, rel=1e-9)
    assert res.monotone


def test_density_constant_is_energy_any_offset():
    prof = constant_profile(P33, "+")
    res = density(prof, 2.0)
    assert res.theta == pytest.approx(0.0625, abs=1e-10)


def test_density_decays_with_offset(wshoot):
    e = energy(wshoot).energy
    th1 = density(wshoot, 1.0)
    th3 = density(wshoot, 3.0)
    assert th1.monotone and th3.monotone
    assert th1.theta <= e + 1e-8
    assert th3.theta < th1.theta
    assert th3.theta < 0.05 * e


def test_density_monotone_path_many_offsets(wshoot):
    rng = np.random.default_rng(7)
    for x0 in rng.uniform(0.2, 4.0, size=8):
        assert density(wshoot, float(x0)).monotone


def test_density_rejects_bad_sequence(wshoot):
    with pytest.raises(ValueError):
        density(wshoot, 1.0, s_values=np.array([-1.0, -2.0, -0.5, -0.25]))


def test_energy_flags_inconsistent_solution_claim():
    # a homogeneous profile with the wrong coefficient is not stationary, so
    # the stationary shortcut disagrees with the three-term energy
    from selfsim.core import RadialProfile, KIND_SINGULAR
    sp = singular_profile(P73)
    bad = RadialProfile(kind=KIND_SINGULAR, params=P73, grid=sp.grid,
                        values=1.5 * sp.values, derivs=1.5 * sp.derivs,
                        decay_coeff=1.5 * sp.decay_coeff)
    rep = energy(bad)
    assert rep.flags and "disagree" in rep.flags[0]


def test_density_flags_nonmonotone_path_for_non_solution():
    # a small off-center ring: the recentering sweep raises F while crossing
    # the ring, which the monotone-for-solutions property forbids
    from selfsim.core import RadialProfile, KIND_TABULATED, default_grid
    grid = default_grid()
    vals = 0.05 * np.exp(-((grid - 5.0) / 0.7) ** 2)
    prof = RadialProfile(kind=KIND_TABULATED, params=P33, grid=grid,
                         values=vals,
                         derivs=np.gradient(vals, grid, edge_order=2),
                         meta={"axis_value": vals[0]})
    res = density(prof, 1.0)
    assert not res.monotone
    assert any("not monotone" in f for f in res.flags)
