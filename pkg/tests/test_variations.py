import numpy as np
import pytest

from selfsim.core import constant_profile, make_params, singular_profile
from selfsim.fixtures import reference_profile
from selfsim.variations import (Variation, first_variation, gaussian_bump,
                                general_second_variation_fd, lambda_field,
                                random_variations, second_variation)

P33 = make_params(3, 3.0)
P37 = make_params(3, 7.0, require_supercritical=True)
P73 = make_params(7, 3.0, require_supercritical=True)


@pytest.fixture(scope="module")
def wshoot():
    return reference_profile(3, 7.0)


def test_first_variation_vanishes_at_solutions(wshoot):
    for prof in (constant_profile(P33, "+"), constant_profile(P37, "+"), wshoot):
        for var in random_variations(10, seed=3):
            scale = max(abs(var.h), abs(var.y0), 1.0)
            assert abs(first_variation(prof, var)) < 1e-6 * scale


def test_first_variation_zero_profile_zero_phi():
    prof = constant_profile(P33, "0")
    var = Variation(h=0.7, y0=1.1)
    assert first_variation(prof, var) == pytest.approx(0.0, abs=1e-14)


def test_first_variation_matches_fd_on_non_solution():
    # w = 1.1 kappa is not stationary; compare against a centered difference
    # of F along the same path
    from selfsim.core import RadialProfile, KIND_TABULATED, default_grid
    from selfsim.functionals import f_functional
    grid = default_grid()
    w0 = 1.1 * P33.kappa
    prof = RadialProfile(kind=KIND_TABULATED, params=P33, grid=grid,
                         values=np.full_like(grid, w0),
                         derivs=np.zeros_like(grid),
                         meta={"axis_value": w0})
    var = gaussian_bump(0.8, 1.0, 1.2)
    var.h = 0.4

    def F(s):
        vals = np.full_like(grid, w0) + s * var.phi(grid)
        pert = RadialProfile(kind=KIND_TABULATED, params=P33, grid=grid,
                             values=vals, derivs=s * var.dphi(grid),
                             meta={"axis_value": vals[0]})
        return f_functional(pert, 0.0, -1.0 + s * var.h)

    d = 1e-4
    fd = (F(d) - F(-d)) / (2 * d)
    an = first_variation(prof, var)
    assert an == pytest.approx(fd, rel=1e-6)


def test_second_variation_kappa_dilation_only():
    # phi = 0, h = 1: value is -kappa^2/(p-1)^2 = -0.125 at p = 3
    prof = constant_profile(P33, "+")
    val = second_variation(prof, Variation(h=1.0))
    assert val == pytest.approx(-0.125, abs=1e-12)


def test_second_variation_kappa_constant_phi():
    # phi = 1, h = y0 = 0: 1/(p-1) - p/(p-1) = -1 for any p
    one = Variation(phi=lambda r: np.ones_like(r), dphi=lambda r: np.zeros_like(r))
    for params in (P33, P37):
        prof = constant_profile(params, "+")
        assert second_variation(prof, one) == pytest.approx(-1.0, abs=1e-10)


def test_second_variation_translation_term_nonpositive(wshoot):
    val = second_variation(wshoot, Variation(y0=1.0))
    assert val < 0.0


def test_second_variation_rejects_non_solutions():
    from selfsim.core import RadialProfile, KIND_TABULATED, default_grid
    grid = default_grid()
    prof = RadialProfile(kind=KIND_TABULATED, params=P33, grid=grid,
                         values=np.full_like(grid, 1.1 * P33.kappa),
                         derivs=np.zeros_like(grid))
    with pytest.raises(ValueError):
        second_variation(prof, Variation(h=1.0))


def test_fd_matches_closed_form_kappa_dilation():
    prof = constant_profile(P33, "+")
    fd = general_second_variation_fd(prof, Variation(h=1.0), delta=1e-3)
    assert fd == pytest.approx(-0.125, abs=1e-5)


def test_fd_richardson_consistency():
    # use a variation with visible fourth derivative so truncation dominates
    prof = constant_profile(P33, "+")
    var = gaussian_bump(0.8, 1.2, 1.0)
    var.h = 0.8
    sv = second_variation(prof, var)
    e1 = general_second_variation_fd(prof, var, delta=2e-3) - sv
    e2 = general_second_variation_fd(prof, var, delta=1e-3) - sv
    # halving delta shrinks the O(delta^2) error by about 4 (noise floor guard)
    assert abs(e2) < abs(e1) / 2.0 + 5e-8


def test_fd_agrees_with_closed_form_random_batch(wshoot):
    # the acceptance-level oracle: 20 seeded random variations on kappa and
    # on the shooting profile
    for prof in (constant_profile(P37, "+"), wshoot):
        scale_ref = abs(second_variation(
            prof, Variation(phi=lambda r: np.ones_like(r),
                            dphi=lambda r: np.zeros_like(r))))
        for var in random_variations(20, seed=42):
            sv = second_variation(prof, var)
            fd = general_second_variation_fd(prof, var, delta=2.5e-4)
            scale = max(abs(sv), 0.05 * scale_ref)
            assert abs(sv - fd) / scale < 1e-4


def test_fd_insensitive_to_second_order_path_data_at_solutions(wshoot):
    # h2, y02 enter only through the vanishing first variation
    var = gaussian_bump(0.5, 1.0, 1.0)
    var.h, var.y0 = 0.4, 0.8
    base = general_second_variation_fd(wshoot, var, delta=1e-3)
    var.h2, var.y02 = 0.7, -0.9
    perturbed = general_second_variation_fd(wshoot, var, delta=1e-3)
    assert perturbed == pytest.approx(base, rel=1e-4, abs=1e-7)


def test_stability_report_orthogonality_certificates(wshoot):
    from selfsim.spectrum import build_sector, eigen_smallest
    from selfsim.variations import stability_report
    op0 = build_sector(wshoot, 0, resolution=6000)
    e0 = eigen_smallest(op0, 1, refine=True, profile=wshoot)
    rep = stability_report(wshoot, e0)
    assert rep.verdict == "unstable"
    assert rep.lambda_1 < -1.0
    assert abs(rep.orthogonality_scale) <= 1e-6
    assert rep.orthogonality_translation == 0.0
    assert rep.second_variation_value < 0.0
    # destabilizing value sits at or below lambda_1 (up to quadrature error)
    assert rep.second_variation_value <= rep.lambda_1 + 1e-2


def test_lambda_field_kappa():
    lam, sign_change = lambda_field(constant_profile(P33, "+"))
    assert np.allclose(lam, 2 * P33.kappa / (P33.p - 1.0))
    assert not sign_change


def test_lambda_field_singular_identically_zero():
    lam, sign_change = lambda_field(singular_profile(P73))
    assert np.max(np.abs(lam)) < 1e-12
    assert not sign_change


def test_lambda_field_shooting_changes_sign(wshoot):
    lam, sign_change = lambda_field(wshoot)
    assert sign_change
