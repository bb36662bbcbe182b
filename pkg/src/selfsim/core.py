"""Problem parameters and canonical radial profiles.

Everything downstream works with the rescaled stationary equation

    w'' + ((n-1)/r - r/2) w' - w/(p-1) + |w|^{p-1} w = 0,   r > 0,

whose constant solutions are 0 and +-kappa with kappa = (1/(p-1))^{1/(p-1)},
and which additionally admits the homogeneous singular solution
w = beta^{1/(p-1)} r^{-2/(p-1)} with beta = (2/(p-1)) (n-2-2/(p-1)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import BPoly, CubicHermiteSpline


class ParameterError(ValueError):
    """Raised for inadmissible (n, p, m) combinations."""


def sobolev_critical(n: int) -> float:
    """Critical exponent (n+2)/(n-2); infinite for n <= 2."""
    if n <= 2:
        return np.inf
    return (n + 2.0) / (n - 2.0)


@dataclass(frozen=True)
class Parameters:
    """Dimension n, nonlinearity exponent p and optional sup bound m."""

    n: int
    p: float
    m: Optional[float] = None
    require_supercritical: bool = False

    @property
    def kappa(self) -> float:
        return (1.0 / (self.p - 1.0)) ** (1.0 / (self.p - 1.0))

    @property
    def decay_power(self) -> float:
        """Spatial decay rate 2/(p-1) of self-similar tails."""
        return 2.0 / (self.p - 1.0)

    @property
    def beta(self) -> float:
        """Coefficient of the homogeneous singular solution (may be <= 0)."""
        return self.decay_power * (self.n - 2.0 - self.decay_power)

    @property
    def is_supercritical(self) -> bool:
        return self.p > sobolev_critical(self.n)


def make_params(n: int, p: float, m: Optional[float] = None,
                require_supercritical: bool = False) -> Parameters:
    """Validate and build a Parameters value.

    Raises ParameterError if p <= 1, n < 1, p is not supercritical while the
    flag demands it, or m is present but not above kappa.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    n = int(n)
    if not p > 1.0:
        raise ParameterError(f"exponent p must exceed 1, got {p}")
    params = Parameters(n=n, p=float(p), m=m,
                        require_supercritical=require_supercritical)
    if require_supercritical and not params.is_supercritical:
        raise ParameterError(
            f"p={p} is not above the critical exponent {sobolev_critical(n)} for n={n}")
    if m is not None and not m > params.kappa:
        raise ParameterError(f"sup bound m={m} must exceed kappa={params.kappa}")
    return params


def kappa(params: Parameters) -> float:
    """The positive constant equilibrium (1/(p-1))^{1/(p-1)}."""
    return params.kappa


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

KIND_ZERO = "constant_zero"
KIND_KAPPA = "constant_kappa"
KIND_SINGULAR = "singular_homogeneous"
KIND_SHOOTING = "shooting"
KIND_TABULATED = "tabulated"


def default_grid(r_min: float = 1e-6, r_max: float = 20.0,
                 n_points: int = 800) -> np.ndarray:
    """Geometric-graded grid on [r_min, r_max].

    The Gaussian weight makes r > 20 numerically negligible for the
    dimensions handled here (n <= 12).
    """
    return np.geomspace(r_min, r_max, n_points)


@dataclass
class RadialProfile:
    """A radial candidate function with values and first derivatives.

    Derivatives are carried explicitly (never re-differenced from values) so
    functional evaluation is quadrature-limited.  ``value``/``deriv`` accept
    arbitrary radii: constants and the singular solution evaluate in closed
    form, sampled kinds interpolate with a cubic Hermite spline and follow
    their fitted power-law tail beyond the stored grid.
    """

    kind: str
    params: Parameters
    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    decay_coeff: Optional[float] = None
    classification: Optional[str] = None
    second_derivs: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)
    _spline: object = field(default=None, repr=False)
    _dspline: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.derivs = np.asarray(self.derivs, dtype=float)
        if self.grid.ndim != 1 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("profile grid must be strictly increasing")
        if self.kind != KIND_SINGULAR and not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    # -- closed-form data ---------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return self.kind in (KIND_ZERO, KIND_KAPPA)

    @property
    def constant_value(self) -> float:
        if not self.is_constant:
            raise ValueError("not a constant profile")
        return float(self.values[0])

    @property
    def is_solution(self) -> bool:
        """Whether the profile claims to solve the stationary equation."""
        return self.kind in (KIND_ZERO, KIND_KAPPA, KIND_SINGULAR, KIND_SHOOTING)

    # -- evaluation ----------------------------------------------------------
    def _ensure_spline(self):
        if self._spline is None:
            if self.second_derivs is not None:
                # quintic Hermite: C^2, keeps panel quadrature smooth in the
                # recentering offset
                data = np.column_stack([self.values, self.derivs,
                                        self.second_derivs])
                self._spline = BPoly.from_derivatives(self.grid, data)
            else:
                self._spline = CubicHermiteSpline(self.grid, self.values,
                                                  self.derivs)
            self._dspline = self._spline.derivative()

    def value(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.is_constant:
            return np.full_like(r, self.constant_value)
        q = self.params.decay_power
        if self.kind == KIND_SINGULAR:
            return self.decay_coeff * np.maximum(r, 1e-300) ** (-q)
        self._ensure_spline()
        r0, r1 = self.grid[0], self.grid[-1]
        out = np.asarray(self._spline(np.clip(r, r0, r1)), dtype=float)
        if self.decay_coeff is not None:
            tail = r > r1
            out = np.where(tail, self.decay_coeff * np.maximum(r, r1) ** (-q), out)
        # below the stored grid: quadratic continuation from the axis value
        head = r < r0
        if np.any(head):
            w0 = self.meta.get("axis_value", self.values[0])
            curv = 2.0 * (self.values[0] - w0) / r0**2 if r0 > 0 else 0.0
            out = np.where(head, w0 + 0.5 * curv * r**2, out)
        return out

    def deriv(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.is_constant:
            return np.zeros_like(r)
        q = self.params.decay_power
        if self.kind == KIND_SINGULAR:
            return -q * self.decay_coeff * np.maximum(r, 1e-300) ** (-q - 1.0)
        self._ensure_spline()
        r0, r1 = self.grid[0], self.grid[-1]
        out = np.asarray(self._dspline(np.clip(r, r0, r1)), dtype=float)
        if self.decay_coeff is not None:
            tail = r > r1
            out = np.where(tail, -q * self.decay_coeff * np.maximum(r, r1) ** (-q - 1.0), out)
        head = r < r0
        if np.any(head):
            w0 = self.meta.get("axis_value", self.values[0])
            curv = 2.0 * (self.values[0] - w0) / r0**2 if r0 > 0 else 0.0
            out = np.where(head, curv * r, out)
        return out


def constant_profile(params: Parameters, sign: int | str = "+",
                     grid: Optional[np.ndarray] = None) -> RadialProfile:
    """Constant solution 0 or +-kappa sampled on the requested grid."""
    sign_map = {"+": 1, "-": -1, "0": 0, 1: 1, -1: -1, 0: 0}
    if sign not in sign_map:
        raise ValueError(f"sign must be one of +, -, 0, got {sign!r}")
    s = sign_map[sign]
    if grid is None:
        grid = default_grid()
    level = s * params.kappa if s else 0.0
    kind = KIND_KAPPA if s else KIND_ZERO
    return RadialProfile(kind=kind, params=params, grid=grid,
                         values=np.full(grid.shape, level),
                         derivs=np.zeros(grid.shape),
                         decay_coeff=None,
                         meta={"sign": s, "axis_value": level})


def singular_profile(params: Parameters,
                     grid: Optional[np.ndarray] = None) -> RadialProfile:
    """Homogeneous singular solution beta^{1/(p-1)} r^{-2/(p-1)} (r=0 excluded)."""
    if params.n < 3 or params.beta <= 0.0:
        raise ParameterError(
            f"singular solution needs n >= 3 and n-2-2/(p-1) > 0; "
            f"got n={params.n}, p={params.p} (beta={params.beta:.6g})")
    if grid is None:
        grid = default_grid(r_min=1e-3)
    if grid[0] <= 0.0:
        raise ValueError("singular profile grid must exclude r = 0")
    coeff = params.beta ** (1.0 / (params.p - 1.0))
    q = params.decay_power
    return RadialProfile(kind=KIND_SINGULAR, params=params, grid=grid,
                         values=coeff * grid ** (-q),
                         derivs=-q * coeff * grid ** (-q - 1.0),
                         decay_coeff=coeff)


def tabulated_profile(params: Parameters, grid: np.ndarray, values: np.ndarray,
                      derivs: np.ndarray, decay_coeff: Optional[float] = None,
                      meta: Optional[dict] = None) -> RadialProfile:
    return RadialProfile(kind=KIND_TABULATED, params=params, grid=grid,
                         values=values, derivs=derivs, decay_coeff=decay_coeff,
                         meta=meta or {})
