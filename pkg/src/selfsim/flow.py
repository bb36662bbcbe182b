"""Time stepping for the rescaled reaction-diffusion flow

    dw/dtau = w'' + ((n-1)/r - r/2) w' - w/(p-1) + |w|^{p-1} w

with blow-up detection, Lyapunov-energy monitoring and the eigenfunction
perturbation experiment.

The stepper is a Strang splitting: the reaction -w/(p-1) + |w|^{p-1} w is
advanced exactly through the substitution v = |w|^{1-p} (v' = v - (p-1)),
and the diffusion-drift part is a Crank-Nicolson solve of the conservative
flux form (1/m)(m w')' with m = r^{n-1} e^{-r^2/4}.  Spatially constant
states therefore reproduce the exact scalar solution, and the constant
equilibrium is preserved to rounding under the no-flux boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .core import Parameters, RadialProfile
from .numerics import fornberg_weights

OUTCOME_BLEWUP = "blew_up"
OUTCOME_CONVERGED = "converged_to_profile"
OUTCOME_MAXTIME = "reached_max_time"

BC_NOFLUX = "noflux"
BC_DIRICHLET = "dirichlet"


@dataclass
class FlowConfig:
    n_points: int = 800
    r_max: float = 20.0
    bc: str = BC_NOFLUX
    dt_max: float = 0.01
    dt_min: float = 1e-13
    blowup_cap_mult: float = 1e3       # in units of kappa
    conv_tol: float = 1e-7
    energy_slack: float = 1e-7
    reaction_safety: float = 0.25      # fraction of scalar time-to-blow-up
    positivity_monitor: bool = False
    diag_r_frac: float = 0.6           # dtau diagnostics mask beyond this
                                       # fraction of r_max under Dirichlet


@dataclass
class FlowState:
    params: Parameters
    cfg: FlowConfig
    tau: float
    r: np.ndarray
    w: np.ndarray
    dt: float
    history: list = field(default_factory=list)   # recent (tau, w) snapshots
    machinery: dict = field(default_factory=dict)
    exhausted: bool = False


@dataclass
class FlowReport:
    outcome: str
    tau_end: float
    tau1: Optional[float]
    series: dict
    final_w: np.ndarray
    r: np.ndarray
    blowup_location: Optional[float] = None
    type1_indicator: Optional[float] = None
    min_dtau_w: Optional[float] = None
    criterion_exceeded: bool = False   # weighted average went above kappa
    bc: str = BC_NOFLUX
    flags: list = field(default_factory=list)


def _build_machinery(params: Parameters, cfg: FlowConfig) -> dict:
    n = params.n
    N = cfg.n_points
    h = cfg.r_max / N
    r = np.arange(N + 1) * h
    faces = np.concatenate([[0.0], (np.arange(N) + 0.5) * h, [cfg.r_max]])
    m_face = faces ** (n - 1) * np.exp(-faces**2 / 4.0)
    m_face[0] = 0.0
    if cfg.bc == BC_NOFLUX:
        m_face[-1] = 0.0
    V = np.empty(N + 1)
    for i in range(N + 1):
        a_, b_ = max(0.0, r[i] - h / 2), min(cfg.r_max, r[i] + h / 2)
        xs = np.linspace(a_, b_, 17)
        V[i] = np.trapezoid(xs ** (n - 1) * np.exp(-xs**2 / 4.0), xs)
    quad_w = V / V.sum()
    low = m_face[1:-1] / h**2
    mbar = V / h
    return {"r": r, "h": h, "low": low, "mbar": mbar, "quad_w": quad_w,
            "outer_flux": m_face[-1] / h**2}


def _apply_diffusion(mach: dict, w: np.ndarray, bc: str) -> np.ndarray:
    out = np.zeros_like(w)
    flux = mach["low"] * (w[1:] - w[:-1])
    out[:-1] += flux
    out[1:] -= flux
    if bc == BC_DIRICHLET:
        out[-1] -= mach["outer_flux"] * w[-1] * 2.0  # ghost value 0 at r_max+h/2
    return out / mach["mbar"]


def _cn_banded(mach: dict, dt: float, bc: str) -> np.ndarray:
    N = len(mach["mbar"]) - 1
    low, mbar = mach["low"], mach["mbar"]
    diag = np.zeros(N + 1)
    diag[:-1] += low
    diag[1:] += low
    if bc == BC_DIRICHLET:
        diag[-1] += 2.0 * mach["outer_flux"]
    ab = np.zeros((3, N + 1))
    ab[1] = 1.0 + 0.5 * dt * diag / mbar
    ab[0, 1:] = -0.5 * dt * low / mbar[:-1]
    ab[2, :-1] = -0.5 * dt * low / mbar[1:]
    return ab


def _react_exact(w: np.ndarray, dt: float, p: float) -> Optional[np.ndarray]:
    """Exact reaction flow via v = |w|^{1-p}; None if it blows inside dt."""
    out = np.zeros_like(w)
    nz = w != 0.0
    v = np.abs(w[nz]) ** (1.0 - p)
    v_new = (p - 1.0) + (v - (p - 1.0)) * math.exp(dt)
    if np.any(v_new <= 0.0):
        return None
    out[nz] = np.sign(w[nz]) * v_new ** (-1.0 / (p - 1.0))
    return out


def init_flow(initial: RadialProfile, cfg: Optional[FlowConfig] = None,
              eigenfunction: Optional[Callable] = None,
              amplitude: float = 0.0) -> FlowState:
    """State at tau = 0 from a profile, optionally plus amplitude * f."""
    if cfg is None:
        cfg = FlowConfig(bc=BC_NOFLUX if initial.is_constant else BC_DIRICHLET)
    mach = _build_machinery(initial.params, cfg)
    r = mach["r"]
    w = initial.value(r).copy()
    if eigenfunction is not None and amplitude != 0.0:
        w = w + amplitude * np.asarray(eigenfunction(r), dtype=float)
    if cfg.positivity_monitor and np.any(w < 0):
        raise ValueError("positivity monitor enabled but initial data is negative")
    state = FlowState(params=initial.params, cfg=cfg, tau=0.0, r=r, w=w,
                      dt=cfg.dt_max, machinery=mach)
    state.history.append((0.0, w.copy()))
    return state


def energy_of_state(state: FlowState, w: Optional[np.ndarray] = None) -> float:
    """Discrete Lyapunov energy of the grid function."""
    if w is None:
        w = state.w
    p = state.params.p
    dw = np.gradient(w, state.r, edge_order=2)
    qw = state.machinery["quad_w"]
    return float(np.dot(qw, 0.5 * dw**2 + w**2 / (2.0 * (p - 1.0))
                        - np.abs(w) ** (p + 1.0) / (p + 1.0)))


def weighted_average(state: FlowState, w: Optional[np.ndarray] = None) -> float:
    if w is None:
        w = state.w
    return float(np.dot(state.machinery["quad_w"], w))


def blowup_criterion(state: FlowState) -> float:
    """Weighted average minus kappa; positive certifies finite-time blow-up."""
    return weighted_average(state) - state.params.kappa


def _try_step(state: FlowState, dt: float) -> Optional[np.ndarray]:
    p = state.params.p
    w1 = _react_exact(state.w, 0.5 * dt, p)
    if w1 is None:
        return None
    rhs = w1 + 0.5 * dt * _apply_diffusion(state.machinery, w1, state.cfg.bc)
    w2 = solve_banded((1, 1), _cn_banded(state.machinery, dt, state.cfg.bc), rhs)
    return _react_exact(w2, 0.5 * dt, p)


def step(state: FlowState, enforce_energy: bool = True) -> FlowState:
    """One adaptive step; halves dt on in-step blow-up or energy increase."""
    p = state.params.p
    kap = state.params.kappa
    sup = float(np.abs(state.w).max())
    dt = state.cfg.dt_max
    if sup > 0.0:
        v_sup = sup ** (1.0 - p)
        dt = min(dt, state.cfg.reaction_safety * v_sup / (p - 1.0))
    e_before = energy_of_state(state) if enforce_energy else 0.0
    while dt >= state.cfg.dt_min:
        w_new = _try_step(state, dt)
        if w_new is not None and np.all(np.isfinite(w_new)):
            if not enforce_energy or \
                    energy_of_state(state, w_new) <= e_before + state.cfg.energy_slack:
                state.w = w_new
                state.tau += dt
                state.dt = dt
                state.history.append((state.tau, w_new.copy()))
                if len(state.history) > 3:
                    state.history.pop(0)
                return state
        dt *= 0.5
    state.exhausted = True
    return state


def dtau_estimate(state: FlowState) -> Optional[np.ndarray]:
    """Backward-difference time derivative from the stored snapshots.

    Under the Dirichlet boundary the outer zone is masked: clamping a slowly
    decaying tail at r_max creates a boundary layer relaxing at the 1/h^2
    rate that hugs the boundary (the drift characteristics point outward)
    and carries Gaussian weight ~ e^{-r_max^2/4}; it is a truncation
    artifact, not free dynamics.
    """
    if len(state.history) < 3:
        return None
    taus = np.array([t for t, _ in state.history[-3:]])
    ws = [w for _, w in state.history[-3:]]
    wts = fornberg_weights(taus[-1], taus, 1)[1]
    out = wts[0] * ws[0] + wts[1] * ws[1] + wts[2] * ws[2]
    if state.cfg.bc == BC_DIRICHLET:
        keep = state.r <= state.cfg.diag_r_frac * state.cfg.r_max
        out = out[keep]
    return out


def run(state: FlowState, tau_max: float, max_steps: int = 200000) -> FlowReport:
    """Step until blow-up, convergence, or tau_max; collects diagnostics."""
    params, cfg = state.params, state.cfg
    p, kap = params.p, params.kappa
    cap = cfg.blowup_cap_mult * kap
    cols = {k: [] for k in ("tau", "sup_norm", "weighted_avg", "energy",
                            "dt", "min_dtau_w")}
    criterion_exceeded = False
    min_dtau_overall = math.inf
    outcome, tau1 = OUTCOME_MAXTIME, None

    reaction_ratio = math.inf   # a-posteriori min of dtau_w / w^p (w > 0)

    def record():
        nonlocal criterion_exceeded, min_dtau_overall, reaction_ratio
        cols["tau"].append(state.tau)
        cols["sup_norm"].append(float(np.abs(state.w).max()))
        avg = weighted_average(state)
        cols["weighted_avg"].append(avg)
        cols["energy"].append(energy_of_state(state))
        cols["dt"].append(state.dt)
        dtau = dtau_estimate(state)
        mval = float(dtau.min()) if dtau is not None else math.nan
        cols["min_dtau_w"].append(mval)
        if not math.isnan(mval):
            min_dtau_overall = min(min_dtau_overall, mval)
            w_free = state.w[:len(dtau)]
            pos = w_free > 1e-8
            if np.any(pos):
                ratio = float(np.min(dtau[pos] / w_free[pos] ** p))
                reaction_ratio = min(reaction_ratio, ratio)
        if avg > kap + 1e-12:
            criterion_exceeded = True

    flags = []
    record()
    for _ in range(max_steps):
        if state.tau >= tau_max:
            break
        step(state)
        record()
        if state.exhausted:
            if np.abs(state.w).max() > 10.0 * kap:
                outcome = OUTCOME_BLEWUP
            else:
                flags.append("step size exhausted without clear growth")
            break
        if np.abs(state.w).max() > cap:
            outcome = OUTCOME_BLEWUP
            break
        dtau = dtau_estimate(state)
        if cfg.conv_tol > 0.0 and dtau is not None \
                and np.abs(dtau).max() < cfg.conv_tol \
                and state.dt >= 0.5 * cfg.dt_max:
            outcome = OUTCOME_CONVERGED
            break
    else:
        flags.append("step budget exhausted")

    if outcome == OUTCOME_BLEWUP:
        tau1 = _extrapolate_blowup_time(cols, p)

    report = FlowReport(outcome=outcome, tau_end=state.tau, tau1=tau1,
                        series={k: np.array(v) for k, v in cols.items()},
                        final_w=state.w.copy(), r=state.r,
                        criterion_exceeded=criterion_exceeded,
                        min_dtau_w=None if math.isinf(min_dtau_overall)
                        else min_dtau_overall,
                        bc=cfg.bc, flags=flags)
    report.series["reaction_ratio_min"] = np.array(
        [reaction_ratio if not math.isinf(reaction_ratio) else math.nan])
    if outcome == OUTCOME_BLEWUP:
        report.blowup_location = float(state.r[int(np.argmax(np.abs(state.w)))])
        sup = report.series["sup_norm"]
        taus = report.series["tau"]
        if tau1 is not None and tau1 > taus[-1]:
            report.type1_indicator = float(
                np.max((tau1 - taus) ** (1.0 / (p - 1.0)) * sup))
    return report


def _extrapolate_blowup_time(cols: dict, p: float) -> Optional[float]:
    """Linear fit of sup_norm^{1-p} against tau over the trailing samples."""
    taus = np.asarray(cols["tau"], dtype=float)
    sups = np.asarray(cols["sup_norm"], dtype=float)
    keep = sups > 0
    taus, sups = taus[keep], sups[keep]
    if len(taus) < 3:
        return None
    v = sups ** (1.0 - p)
    k = min(8, len(taus))
    A = np.vstack([taus[-k:], np.ones(k)]).T
    slope, icpt = np.linalg.lstsq(A, v[-k:], rcond=None)[0]
    if slope >= 0.0:
        return None
    return float(-icpt / slope)


@dataclass
class FlowSummary:
    outcome: str
    tau1: Optional[float]
    min_dtau_w: Optional[float]
    type1_indicator: Optional[float]
    blowup_location: Optional[float]
    outer_sup: float
    energy_monotone: bool
    max_energy_increase: float


def flow_diagnostics(report: FlowReport, energy_slack: float = 1e-7) -> FlowSummary:
    """Post-run summary: monotonicity, type-I data, compactness check."""
    e = report.series["energy"]
    increases = np.diff(e)
    max_inc = float(increases.max()) if len(increases) else 0.0
    outer = report.r >= 0.5 * report.r[-1]
    outer_sup = float(np.abs(report.final_w[outer]).max())
    return FlowSummary(outcome=report.outcome, tau1=report.tau1,
                       min_dtau_w=report.min_dtau_w,
                       type1_indicator=report.type1_indicator,
                       blowup_location=report.blowup_location,
                       outer_sup=outer_sup,
                       energy_monotone=bool(max_inc <= energy_slack),
                       max_energy_increase=max_inc)


@dataclass
class PerturbationReport:
    s_values: list
    entropies: dict
    base_entropy: float
    margins: dict
    flow_outcome: Optional[str] = None
    flow_tau1: Optional[float] = None
    energy_plateau: Optional[float] = None
    kappa_energy: float = math.nan
    flags: list = field(default_factory=list)


def entropy_perturbation_experiment(profile: RadialProfile,
                                    s_values=(0.01, -0.01, 0.05, -0.05),
                                    run_flow_for: Optional[float] = 0.05,
                                    eig_resolution: int = 4000,
                                    flow_cfg: Optional[FlowConfig] = None,
                                    normalization: str = "sup"
                                    ) -> PerturbationReport:
    """Entropy drop along the ground-state direction, plus the blow-up run.

    Computes the entropy of w + s f for each s (f the radial ground state)
    and records strict-drop margins; for s = run_flow_for > 0 the flow is run
    from the perturbed data and its outcome recorded together with the final
    resolved Lyapunov energy against the constant's energy.

    normalization: "sup" rescales the direction to unit sup norm so s is a
    direct amplitude relative to the profile (the ground state of a strongly
    unstable profile is sharply concentrated, so unit-L2 perturbations at
    finite s can leave the small-perturbation regime entirely); "l2" keeps
    the eigenfunction's unit weighted-L2 normalization.
    """
    from .core import KIND_TABULATED
    from .functionals import energy, entropy
    from .spectrum import first_eigenfunction

    params = profile.params
    lam1, f_raw, _ = first_eigenfunction(profile, resolution=eig_resolution)
    if normalization == "sup":
        probe = np.linspace(0.0, 20.0, 4001)
        scale = float(np.abs(f_raw(probe)).max())
    elif normalization == "l2":
        scale = 1.0
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    df_raw = f_raw.derivative()
    f = lambda r: f_raw(r) / scale
    df = lambda r: df_raw(r) / scale
    base = entropy(profile)
    entropies, margins, search_flags = {}, {}, []
    for s in s_values:
        grid = np.unique(np.concatenate([np.geomspace(1e-6, 19.9, 1200),
                                         profile.grid]))
        grid = grid[grid <= 19.9]
        vals = profile.value(grid) + s * f(grid)
        ders = profile.deriv(grid) + s * df(grid)
        pert = RadialProfile(kind=KIND_TABULATED, params=params, grid=grid,
                             values=vals, derivs=ders,
                             decay_coeff=profile.decay_coeff,
                             meta={"axis_value": float(vals[0])})
        res = entropy(pert)
        entropies[s] = res.lam
        margins[s] = base.lam - res.lam
        search_flags += [f"s={s}: {msg}" for msg in res.flags]
    report = PerturbationReport(s_values=list(s_values), entropies=entropies,
                                base_entropy=base.lam, margins=margins,
                                flags=search_flags)
    from .core import constant_profile
    report.kappa_energy = energy(constant_profile(params, "+")).energy
    if run_flow_for is not None:
        cfg = flow_cfg or FlowConfig(bc=BC_DIRICHLET)
        state = init_flow(profile, cfg, eigenfunction=f,
                          amplitude=float(run_flow_for))
        flow_rep = run(state, tau_max=20.0)
        report.flow_outcome = flow_rep.outcome
        report.flow_tau1 = flow_rep.tau1
        report.energy_plateau = float(flow_rep.series["energy"][-1])
        if flow_rep.outcome != OUTCOME_BLEWUP:
            report.flags.append("perturbed flow did not blow up")
    return report
