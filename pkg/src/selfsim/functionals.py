"""Weighted energy, recentering functional, entropy, integral identities and
the parabolic density of radial profiles.

For a profile w the weighted energy is

    E(w) = 1/2 int |grad w|^2 rho + 1/(2(p-1)) int w^2 rho
           - 1/(p+1) int |w|^{p+1} rho,

and the recentering functional F_{x0,t0} evaluates the same three terms
against the kernel G(y-x0, t0) with prefactors (-t0)^{(p+1)/(p-1)} on the
gradient/potential terms and (-t0)^{2/(p-1)} on the mass term.  The entropy
is the supremum of F over recentering parameters; for stationary profiles it
is attained at x0 = 0, t0 = -1 and equals E.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import KIND_SINGULAR, RadialProfile
from .quadrature import (QuadratureRule, composite_rule, offset_integral_many,
                         weighted_integral)


@dataclass
class FunctionalReport:
    energy: float
    grad_term: float
    mass_term: float
    potential_term: float
    energy_shortcut: float              # (1/2 - 1/(p+1)) int |w|^{p+1} rho
    pohozaev_residual: float = math.nan
    mass_balance_residual: float = math.nan   # multiply by w rho, integrate
    moment_balance_residual: float = math.nan  # |y|^2-weighted balance
    direction_residual: float = math.nan       # odd first-moment balance
    scale: float = math.nan
    flags: list = field(default_factory=list)


@dataclass
class EntropyResult:
    lam: float
    x0_norm: float
    t0: float
    trace: list
    ring_margin_t: float = math.nan
    ring_margin_x: float = math.nan
    ring_eps: float = 0.5
    flags: list = field(default_factory=list)


def default_rule(profile: RadialProfile, N: int = 1600) -> QuadratureRule:
    """Composite log rule; resolves singular tails and sharp shooting cores."""
    return composite_rule(profile.params.n, N=N)


def _core_integrals(profile: RadialProfile, rule: QuadratureRule):
    p = profile.params.p
    grad2 = weighted_integral(rule, lambda r: profile.deriv(r) ** 2)
    mass = weighted_integral(rule, lambda r: profile.value(r) ** 2)
    pot = weighted_integral(rule, lambda r: np.abs(profile.value(r)) ** (p + 1.0))
    return grad2, mass, pot


def energy(profile: RadialProfile, rule: Optional[QuadratureRule] = None,
           consistency_tol: float = 1e-4) -> FunctionalReport:
    """Three-term weighted energy, plus the stationary shortcut form.

    The shortcut (1/2 - 1/(p+1)) int |w|^{p+1} rho is only valid for
    stationary profiles; a disagreement beyond consistency_tol on a profile
    claiming to solve the equation is flagged (not fatal).
    """
    if rule is None:
        rule = default_rule(profile)
    p = profile.params.p
    grad2, mass, pot = _core_integrals(profile, rule)
    e3 = 0.5 * grad2 + mass / (2.0 * (p - 1.0)) - pot / (p + 1.0)
    e_short = (0.5 - 1.0 / (p + 1.0)) * pot
    report = FunctionalReport(energy=e3, grad_term=0.5 * grad2,
                              mass_term=mass / (2.0 * (p - 1.0)),
                              potential_term=pot / (p + 1.0),
                              energy_shortcut=e_short,
                              scale=max(abs(e3), abs(e_short), 1e-300))
    if profile.is_solution:
        rel = abs(e3 - e_short) / report.scale
        if rel > consistency_tol:
            report.flags.append(f"energy forms disagree by {rel:.2e} "
                                f"on a profile claiming solution status")
    return report


def f_functional(profile: RadialProfile, x0_norm: float, t0: float,
                 rule: Optional[QuadratureRule] = None) -> float:
    """Recentered functional F_{x0,t0}(w) for t0 < 0."""
    if not t0 < 0.0:
        raise ValueError(f"F functional needs t0 < 0, got {t0}")
    if rule is None:
        rule = default_rule(profile)
    p = profile.params.p
    a = -t0
    grad2, pot, mass = offset_integral_many(
        [lambda r: profile.deriv(r) ** 2,
         lambda r: np.abs(profile.value(r)) ** (p + 1.0),
         lambda r: profile.value(r) ** 2],
        x0_norm, t0, profile.params.n, rule_r=rule)
    s_main = a ** ((p + 1.0) / (p - 1.0))
    s_mass = a ** (2.0 / (p - 1.0))
    return 0.5 * s_main * grad2 - s_main * pot / (p + 1.0) \
        + s_mass * mass / (2.0 * (p - 1.0))


def constant_f_closed_form(profile: RadialProfile, t0: float) -> float:
    """F of a constant profile: kernel mass is 1, so only prefactors remain."""
    p = profile.params.p
    c = abs(profile.constant_value)
    a = -t0
    return a ** (2.0 / (p - 1.0)) * c**2 / (2.0 * (p - 1.0)) \
        - a ** ((p + 1.0) / (p - 1.0)) * c ** (p + 1.0) / (p + 1.0)


@dataclass
class EntropySearch:
    x0_max: float = 10.0
    log_a_min: float = -6.0
    log_a_max: float = 6.0
    coarse_x0: int = 13
    coarse_log_a: int = 13
    refine_tol: float = 1e-5
    ring_eps: float = 0.5
    tie_tol: float = 1e-10


def entropy(profile: RadialProfile, search: Optional[EntropySearch] = None,
            rule: Optional[QuadratureRule] = None) -> EntropyResult:
    """Supremum of F over (x0_norm, log(-t0)) by coarse grid + golden refine.

    Not defined for the singular profile (unbounded).  Ties in the x0
    direction (constants are recentering-invariant in space) break toward
    x0 = 0 so the reported argmax is canonical.
    """
    if profile.kind == KIND_SINGULAR:
        raise ValueError("entropy is defined for bounded profiles only")
    if search is None:
        search = EntropySearch()
    if rule is None:
        rule = default_rule(profile)

    def F(b, la):
        return f_functional(profile, b, -math.exp(la), rule=rule)

    xs = np.linspace(0.0, search.x0_max, search.coarse_x0)
    las = np.linspace(search.log_a_min, search.log_a_max, search.coarse_log_a)
    trace = []
    best = (-math.inf, 0.0, 0.0)
    for b in xs:
        for la in las:
            val = F(b, la)
            trace.append((b, la, val))
            # strict improvement beyond the tie tolerance keeps the smallest
            # (b, |la|) among equal maxima
            if val > best[0] + search.tie_tol * max(1.0, abs(best[0])):
                best = (val, b, la)
    _, b, la = best

    def refine(fun, lo, hi, x, span, iters=40):
        phi = (math.sqrt(5.0) - 1.0) / 2.0
        a_, b_ = max(lo, x - span), min(hi, x + span)
        c_ = b_ - phi * (b_ - a_)
        d_ = a_ + phi * (b_ - a_)
        fc, fd = fun(c_), fun(d_)
        for _ in range(iters):
            if b_ - a_ < search.refine_tol:
                break
            if fc > fd:
                b_, d_, fd = d_, c_, fc
                c_ = b_ - phi * (b_ - a_)
                fc = fun(c_)
            else:
                a_, c_, fc = c_, d_, fd
                d_ = a_ + phi * (b_ - a_)
                fd = fun(d_)
        return 0.5 * (a_ + b_)

    span_x = search.x0_max / (search.coarse_x0 - 1)
    span_la = (search.log_a_max - search.log_a_min) / (search.coarse_log_a - 1)
    for _ in range(2):
        b = refine(lambda t: F(t, la), 0.0, search.x0_max, b, span_x)
        la = refine(lambda t: F(b, t), search.log_a_min, search.log_a_max, la, span_la)
    lam = F(b, la)
    # canonical snap for the degenerate spatial direction
    if F(0.0, la) >= lam - search.tie_tol * max(1.0, abs(lam)):
        b = 0.0
        lam = max(lam, F(0.0, la))
    if F(b, 0.0) >= lam - search.tie_tol * max(1.0, abs(lam)):
        la = 0.0
        lam = max(lam, F(b, 0.0))

    result = EntropyResult(lam=lam, x0_norm=b, t0=-math.exp(la), trace=trace,
                           ring_eps=search.ring_eps)
    result.ring_margin_t = lam - max(F(b, la + search.ring_eps),
                                     F(b, la - search.ring_eps))
    result.ring_margin_x = lam - F(b + search.ring_eps, la)
    edge_x = search.x0_max * (1.0 - 1.0 / (len(xs) - 1))
    if b > edge_x or abs(la) > search.log_a_max * 0.95:
        result.flags.append("unconverged sup: maximizer near search boundary")
    return result


def identities(profile: RadialProfile,
               rule: Optional[QuadratureRule] = None) -> FunctionalReport:
    """Residuals of the four stationary integral identities.

    All residuals are reported relative to the largest constituent integral.
    The odd-moment (direction) identity vanishes termwise for radial
    profiles; it is still assembled from its three moments.
    """
    if rule is None:
        rule = default_rule(profile)
    params = profile.params
    n, p = params.n, params.p
    grad2, mass, pot = _core_integrals(profile, rule)
    y2grad2 = weighted_integral(rule, lambda r: r**2 * profile.deriv(r) ** 2)
    y2mass = weighted_integral(rule, lambda r: r**2 * profile.value(r) ** 2)
    y2pot = weighted_integral(rule, lambda r: r**2 * np.abs(profile.value(r)) ** (p + 1.0))
    scale = max(grad2, mass, pot, y2grad2, y2mass, y2pot, 1e-300)

    pohozaev = (n / (p + 1.0) + (2.0 - n) / 2.0) * grad2 \
        + 0.5 * (0.5 - 1.0 / (p + 1.0)) * y2grad2
    mass_balance = grad2 - pot + mass / (p - 1.0)
    moment_balance = ((2.0 - n) / 2.0 * grad2 - n / (2.0 * (p - 1.0)) * mass
                      + n / (p + 1.0) * pot + 0.25 * y2grad2
                      + y2mass / (4.0 * (p - 1.0)) - y2pot / (2.0 * (p + 1.0)))
    # first angular moment of y.e vanishes identically on radial profiles
    odd_moment = 0.0
    direction = 0.5 * grad2 * odd_moment - pot * odd_moment / (p + 1.0) \
        + mass * odd_moment / (2.0 * (p - 1.0))

    e3 = 0.5 * grad2 + mass / (2.0 * (p - 1.0)) - pot / (p + 1.0)
    return FunctionalReport(
        energy=e3, grad_term=0.5 * grad2, mass_term=mass / (2.0 * (p - 1.0)),
        potential_term=pot / (p + 1.0),
        energy_shortcut=(0.5 - 1.0 / (p + 1.0)) * pot,
        pohozaev_residual=pohozaev / scale,
        mass_balance_residual=mass_balance / scale,
        moment_balance_residual=moment_balance / scale,
        direction_residual=direction / scale,
        scale=scale)


@dataclass
class DensityResult:
    theta: float
    values: np.ndarray
    s_values: np.ndarray
    monotone: bool
    flags: list = field(default_factory=list)


def density(profile: RadialProfile, x0_norm: float,
            s_values: Optional[np.ndarray] = None,
            rule: Optional[QuadratureRule] = None,
            monotone_slack: float = 1e-8) -> DensityResult:
    """Parabolic density at spatial offset x0 via the recentering limit.

    Evaluates F_{x0/sqrt(-s), -1} along a decreasing |s| sequence
    (default s_k = -2^{-k}) and extrapolates the limit; the sequence must be
    nonincreasing toward s -> 0 up to monotone_slack.
    """
    if s_values is None:
        s_values = -np.power(2.0, -np.arange(0, 11, dtype=float))
    s_values = np.asarray(s_values, dtype=float)
    if len(s_values) < 4 or np.any(s_values >= 0) or np.any(np.diff(-s_values) >= 0):
        raise ValueError("need a decreasing-|s| sequence of at least 4 negative s")
    if rule is None:
        rule = default_rule(profile)
    vals = np.array([f_functional(profile, x0_norm / math.sqrt(-s), -1.0, rule=rule)
                     for s in s_values])
    flags = []
    monotone = bool(np.all(np.diff(vals) <= monotone_slack))
    if not monotone:
        flags.append("recentered energies not monotone along the rescaling path")
    # Aitken extrapolation when the tail differences still move
    d1, d2 = vals[-2] - vals[-3], vals[-1] - vals[-2]
    if abs(d2 - d1) > 1e-14 and abs(d2) > 1e-14:
        theta = vals[-1] + d2 * d2 / (d1 - d2) if abs(d1 - d2) > 1e-30 else vals[-1]
        # keep the extrapolation conservative: never above the last value
        theta = min(theta, vals[-1]) if x0_norm != 0 else vals[-1]
    else:
        theta = vals[-1]
    return DensityResult(theta=float(theta), values=vals, s_values=s_values,
                         monotone=monotone, flags=flags)
