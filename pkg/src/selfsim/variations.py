"""First and second variation of the recentering functional, the scaling
field, and stability diagnostics.

Variations move three knobs at once: the profile (w + s phi with radial
phi), the recentering point x(s) with x'(0) = y0, and the recentering time
t(s) = -1 + s h + s^2 h2 / 2 with t'(0) = h.  At stationary profiles the
second variation collapses to the closed form

    Q(phi,phi) + h <Lam(w), phi> - <phi, dw.y0> - 1/2 int (dw.y0)^2 rho
    - h^2/4 int Lam(w)^2 rho,

with Q the linearized quadratic form and Lam(w) = 2w/(p-1) + r w' the
scaling field; the y0 pairings reduce through the first angular moment
(<(e.y)^2> = 1/n) since radial phi carries no l=1 component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import RadialProfile
from .quadrature import (QuadratureRule, _angular_factor, _gl_panels,
                         _sphere_area, weighted_integral)
from .functionals import default_rule
from .shooting import ode_residual


@dataclass
class Variation:
    """Radial test function with derivative, plus path data (h, y0, ...)."""

    phi: Callable = lambda r: np.zeros_like(r)
    dphi: Callable = lambda r: np.zeros_like(r)
    h: float = 0.0
    y0: float = 0.0
    h2: float = 0.0
    y02: float = 0.0


def gaussian_bump(c: float, r0: float, sigma: float) -> Variation:
    """Smooth localized test function c exp(-(r-r0)^2/sigma^2)."""
    def phi(r):
        return c * np.exp(-((r - r0) / sigma) ** 2)

    def dphi(r):
        return -2.0 * (r - r0) / sigma**2 * phi(r)

    return Variation(phi=phi, dphi=dphi)


def random_variations(count: int, seed: int = 0, with_path: bool = True) -> list:
    """Seeded batch of bump variations with randomized path data."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.uniform(0.2, 1.5) * rng.choice([-1.0, 1.0])
        r0 = rng.uniform(0.0, 4.0)
        sigma = rng.uniform(0.5, 2.0)
        v = gaussian_bump(c, r0, sigma)
        if with_path:
            v.h = rng.uniform(-1.0, 1.0)
            v.y0 = rng.uniform(-1.5, 1.5)
            v.h2 = rng.uniform(-0.5, 0.5)
            v.y02 = rng.uniform(-0.5, 0.5)
        out.append(v)
    return out


def lambda_field(profile: RadialProfile):
    """Scaling field 2w/(p-1) + r w' on the profile grid, with a sign flag."""
    r = profile.grid
    lam = 2.0 * profile.values / (profile.params.p - 1.0) + r * profile.derivs
    scale = np.abs(lam).max()
    tol = 1e-9 * max(scale, np.abs(profile.values).max())
    changes_sign = bool(np.any(lam > tol) and np.any(lam < -tol))
    return lam, changes_sign


def _lambda_call(profile: RadialProfile):
    p = profile.params.p
    return lambda r: 2.0 * profile.value(r) / (p - 1.0) + r * profile.deriv(r)


def first_variation(profile: RadialProfile, var: Variation,
                    rule: Optional[QuadratureRule] = None) -> float:
    """d/ds F at s=0 through the canonical point (x0=0, t0=-1), term by term."""
    if rule is None:
        rule = default_rule(profile)
    params = profile.params
    n, p = params.n, params.p
    w, dw = profile.value, profile.deriv
    phi, dphi = var.phi, var.dphi
    h = var.h

    grad2 = weighted_integral(rule, lambda r: dw(r) ** 2)
    pot = weighted_integral(rule, lambda r: np.abs(w(r)) ** (p + 1.0))
    mass = weighted_integral(rule, lambda r: w(r) ** 2)
    cross_grad = weighted_integral(rule, lambda r: dw(r) * dphi(r))
    cross_pot = weighted_integral(rule, lambda r: np.abs(w(r)) ** (p - 1.0) * w(r) * phi(r))
    cross_mass = weighted_integral(rule, lambda r: w(r) * phi(r))
    # moment kernel nh/2 + (y.y0)/2 - h|y|^2/4; odd part drops on radial pairs
    mom = lambda f: h * (0.5 * n * weighted_integral(rule, f)
                         - 0.25 * weighted_integral(rule, lambda r: r**2 * f(r)))
    out = (-(p + 1.0) / (2.0 * (p - 1.0)) * h * grad2
           + h / (p - 1.0) * pot
           - h / (p - 1.0) ** 2 * mass
           + cross_grad - cross_pot + cross_mass / (p - 1.0)
           + 0.5 * mom(lambda r: dw(r) ** 2)
           - mom(lambda r: np.abs(w(r)) ** (p + 1.0)) / (p + 1.0)
           + 0.5 * mom(lambda r: w(r) ** 2) / (p - 1.0))
    return float(out)


def second_variation(profile: RadialProfile, var: Variation,
                     rule: Optional[QuadratureRule] = None,
                     residual_tol: float = 1e-6) -> float:
    """Closed-form second variation, valid only at stationary profiles."""
    res = profile.meta.get("ode_residual")
    if res is None:
        res = ode_residual(profile)
        profile.meta["ode_residual"] = res
    if not profile.is_solution or res > residual_tol:
        raise ValueError(
            f"second_variation needs a stationary profile "
            f"(residual {res:.2e}, solution status {profile.is_solution})")
    if rule is None:
        rule = default_rule(profile)
    params = profile.params
    n, p = params.n, params.p
    w, dw = profile.value, profile.deriv
    phi, dphi = var.phi, var.dphi
    lam = _lambda_call(profile)

    q_form = (weighted_integral(rule, lambda r: dphi(r) ** 2)
              + weighted_integral(rule, lambda r: phi(r) ** 2) / (p - 1.0)
              - p * weighted_integral(rule,
                                      lambda r: np.abs(w(r)) ** (p - 1.0) * phi(r) ** 2))
    cross_scale = weighted_integral(rule, lambda r: lam(r) * phi(r))
    lam2 = weighted_integral(rule, lambda r: lam(r) ** 2)
    grad2 = weighted_integral(rule, lambda r: dw(r) ** 2)
    # <phi, dw . y0> vanishes for radial phi; the square averages (e.y)^2 = 1/n
    out = (q_form + var.h * cross_scale
           - 0.5 * var.y0 ** 2 / n * grad2
           - 0.25 * var.h ** 2 * lam2)
    return float(out)


def general_second_variation_fd(profile: RadialProfile, var: Variation,
                                delta: float = 1e-3,
                                rule: Optional[QuadratureRule] = None) -> float:
    """Centered second difference of s -> F_{x(s),t(s)}(w + s phi).

    Path: |x(s)| = |s y0 + s^2 y02 / 2|, t(s) = -1 + s h + s^2 h2 / 2.
    Serves as the model-free oracle for the closed-form second variation.
    All three evaluations share one radial node set so that quadrature error
    cancels in the difference instead of being amplified by 1/delta^2.
    """
    if not 1e-5 <= delta <= 1e-2:
        raise ValueError("delta outside the supported window [1e-5, 1e-2]")
    params = profile.params
    n, p = params.n, params.p
    if n < 2:
        raise ValueError("offset variations need n >= 2")

    def b_of(s):
        return abs(s * var.y0 + 0.5 * s * s * var.y02)

    def t_of(s):
        return -1.0 + s * var.h + 0.5 * s * s * var.h2

    svals = (-delta, 0.0, delta)
    a_max = max(-t_of(s) for s in svals)
    b_max = max(b_of(s) for s in svals)
    r_hi = b_max + 18.0 * math.sqrt(a_max)
    # graded panels: fine near the axis (profile core), uniform outside
    edges = np.concatenate([[0.0], np.geomspace(0.01, 1.0, 12),
                            np.linspace(1.0, r_hi, 28)[1:]])
    nodes, gw = _gl_panels(edges, 24)
    wv, dwv = profile.value(nodes), profile.deriv(nodes)
    ph, dph = var.phi(nodes), var.dphi(nodes)
    geo = nodes ** (n - 1)
    coef_ang = _sphere_area(n - 1)

    def F(s: float) -> float:
        b, a = b_of(s), -t_of(s)
        c = nodes * b / (2.0 * a)
        S = _angular_factor(n, c)
        base = ((4.0 * math.pi * a) ** (-n / 2.0) * coef_ang * gw * geo
                * np.exp(-(nodes - b) ** 2 / (4.0 * a)) * S)
        W, DW = wv + s * ph, dwv + s * dph
        grad2 = float(np.dot(base, DW**2))
        pot = float(np.dot(base, np.abs(W) ** (p + 1.0)))
        mass = float(np.dot(base, W**2))
        s_main = a ** ((p + 1.0) / (p - 1.0))
        s_mass = a ** (2.0 / (p - 1.0))
        return (0.5 * s_main * grad2 - s_main * pot / (p + 1.0)
                + s_mass * mass / (2.0 * (p - 1.0)))

    return (F(delta) - 2.0 * F(0.0) + F(-delta)) / delta**2


@dataclass
class StabilityReport:
    verdict: str
    lambda_1: float
    margin: float
    second_variation_value: float = math.nan
    orthogonality_scale: float = math.nan
    orthogonality_translation: float = math.nan
    details: dict = field(default_factory=dict)


def stability_report(profile: RadialProfile, eig0, eig1=None,
                     rule: Optional[QuadratureRule] = None,
                     tol: float = 1e-6) -> StabilityReport:
    """Stability verdict from the radial ground state.

    Nonconstant profiles with lambda_1 < -1 (beyond tol) get the
    destabilizing direction f with the orthogonality certificates
    <f, Lam(w)> = 0 and <f, w' (l=1)> = 0 and the resulting negative second
    variation.  The positive constant is stable modulo translations after
    removing the mean mode with the optimal time reparametrization; zero is
    stable outright.
    """
    if rule is None:
        rule = default_rule(profile)
    params = profile.params
    p = params.p
    lam1 = float(eig0.lambdas[0])

    if profile.is_constant and profile.constant_value == 0.0:
        return StabilityReport(verdict="stable", lambda_1=lam1,
                               margin=lam1 - 0.0,
                               details={"reason": "quadratic form bounded below "
                                                  "by 1/(p-1) > 0"})
    if profile.is_constant:
        # mean-adjusted test functions: optimal h cancels the mean mode and
        # the remaining quadratic form is nonnegative on the orthogonal part
        kap = params.kappa
        details = {"optimal_h_per_unit_mean": (p - 1.0) / kap,
                   "residual_form_lower_bound": 0.0}
        return StabilityReport(verdict="stable_modulo_translations",
                               lambda_1=lam1, margin=abs(lam1 + 1.0),
                               details=details)

    if lam1 > -1.0 - tol:
        return StabilityReport(verdict="marginal", lambda_1=lam1,
                               margin=lam1 + 1.0)

    f = eig0.funcs[0]
    lam_call = _lambda_call(profile)
    ortho_scale = weighted_integral(rule, lambda r: f(r) * lam_call(r))
    # f is radial (l=0) and dw.y0 lives in the l=1 sector: exactly orthogonal
    ortho_trans = 0.0
    var = Variation(phi=f, dphi=f.derivative(), h=0.3, y0=0.7)
    sv = second_variation(profile, var, rule=rule)
    return StabilityReport(verdict="unstable", lambda_1=lam1,
                           margin=-(lam1 + 1.0),
                           second_variation_value=sv,
                           orthogonality_scale=float(ortho_scale),
                           orthogonality_translation=ortho_trans,
                           details={"direction": "radial ground state"})
