"""Closed-form wave analysis for the unit-speed alignment model.

All operations work on (density, angle) states, where the angle is taken
between the velocity direction and the propagation axis.  They provide the
characteristic speeds and linearized eigenvectors, the anisotropic Mach
number, the conservative-form variables and shock curves of the 1D system,
and the mass-equation Rankine-Hugoniot shock speed.  These are pure
functions used as oracles by tests and scenario diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import ModelParams
from .errors import DomainError
from .pressure import BACKGROUND, PressureModel


@dataclass(frozen=True)
class AngleState:
    """Density plus angle of the velocity direction to the x-axis (radians)."""

    rho: float
    theta: float

    def __post_init__(self):
        if not -math.pi < self.theta <= math.pi:
            raise DomainError(f"theta must lie in (-pi, pi], got {self.theta}")

    @property
    def u(self) -> float:
        """Velocity projection on the propagation direction, cos(theta)."""
        return math.cos(self.theta)


def _check_rho(state: AngleState, params: ModelParams):
    if not 0.0 < state.rho < params.rho_star:
        raise DomainError(f"need 0 < rho < rho_star, got rho={state.rho}")


@dataclass(frozen=True)
class WaveDecomposition:
    """Characteristic speeds and eigenvector slopes of the linearized system.

    du_drho_* is the ratio du/drho along the eigenvector of each family
    (finite also at contact waves, where it vanishes).  `saturated` flags
    states so close to congestion that the speeds overflow; the speeds are
    then reported as -inf/+inf.
    """

    xi_minus: float
    xi_plus: float
    du_drho_minus: float
    du_drho_plus: float
    discriminant: float
    saturated: bool = False


def soh_char_speeds(state: AngleState, params: ModelParams,
                    pressure: PressureModel) -> WaveDecomposition:
    """Characteristic speeds (1/2)((1+c) u -/+ sqrt(R)) and eigenvector slopes.

    R = (1-c)^2 u^2 + 4 lam p_eps'(rho) (1 - u^2); the pressure-derivative
    term carries no 1/rho factor (it is rho * lambda_bar for the matrix
    below, which is what makes the system hyperbolic).
    """
    _check_rho(state, params)
    c, lam = params.c, params.lam
    u = state.u
    dp = pressure.dp_eps(state.rho)
    disc = (1.0 - c) ** 2 * u * u + 4.0 * lam * dp * (1.0 - u * u)
    root = math.sqrt(disc) if math.isfinite(disc) else math.inf
    if not math.isfinite(root):
        return WaveDecomposition(-math.inf, math.inf, math.nan, math.nan,
                                 math.inf, saturated=True)
    xi_m = 0.5 * ((1.0 + c) * u - root)
    xi_p = 0.5 * ((1.0 + c) * u + root)
    # first linearized equation: (u - xi) drho + rho du = 0
    du_m = (xi_m - u) / state.rho
    du_p = (xi_p - u) / state.rho
    return WaveDecomposition(xi_m, xi_p, du_m, du_p, disc)


def matrix_A(state: AngleState, params: ModelParams,
             pressure: PressureModel) -> np.ndarray:
    """Coefficient matrix of the quasilinear (rho, u) system.

    [[u, rho], [lam p_eps'(rho) (1-u^2) / rho, c u]]; its eigenvalues are
    the characteristic speeds of soh_char_speeds.
    """
    _check_rho(state, params)
    u = state.u
    dp = pressure.dp_eps(state.rho)
    lower = params.lam * dp * (1.0 - u * u) / state.rho
    return np.array([[u, state.rho], [lower, params.c * u]])


def mach_number(state: AngleState, params: ModelParams,
                pressure: PressureModel, branch: int = +1) -> float:
    """Velocity projection over the (anisotropic, branch-dependent) sound speed.

    c_s = (1/2)((c-1) u + branch * sqrt((c-1)^2 u^2 + 4 lam p_eps' (1-u^2))).
    Near congestion p_eps' diverges and the Mach number tends to 0.
    """
    if branch not in (+1, -1):
        raise DomainError("branch must be +1 or -1")
    _check_rho(state, params)
    c, lam = params.c, params.lam
    u = state.u
    dp = pressure.dp_eps(state.rho)
    root = math.sqrt((c - 1.0) ** 2 * u * u + 4.0 * lam * dp * (1.0 - u * u))
    cs = 0.5 * ((c - 1.0) * u + branch * root)
    if cs == 0.0:
        raise DomainError("sound speed vanished: Mach number undefined")
    if not math.isfinite(cs):
        return 0.0
    return u / cs


# -- conservative form of the 1D system -------------------------------------

def conservative_vars(state: AngleState) -> tuple[float, float]:
    """Conserved angle variables (ln|tan(theta/2)|, ln|sin(theta)|).

    The conservative form only exists away from sin(theta) = 0.
    """
    s = math.sin(state.theta)
    if s == 0.0:
        raise DomainError("conservative form requires sin(theta) != 0")
    return math.log(abs(math.tan(0.5 * state.theta))), math.log(abs(s))


def g_of(rho: float, params: ModelParams, pressure: PressureModel,
         rho_ref: float | None = None) -> float:
    """Antiderivative of p_eps'(r)/r, fixed to vanish at rho_star/2.

    Only differences of g are meaningful; the reference density cancels.
    Evaluated by adaptive quadrature after the substitution
    s = 1/r - 1/rho_star, which removes the pole at the congestion density.
    """
    rho_star = params.rho_star
    if not 0.0 < rho < rho_star:
        raise DomainError(f"g_of needs 0 < rho < rho_star, got {rho}")
    ref = 0.5 * rho_star if rho_ref is None else rho_ref
    eps, gam, kap = params.epsilon, params.gamma, params.kappa

    def integrand(s):
        r = 1.0 / (s + 1.0 / rho_star)
        val = eps * gam * s ** (-gam - 1.0) * (s + 1.0 / rho_star)
        if pressure.mode == BACKGROUND:
            val += kap * gam * r**gam
        return val

    s_rho = 1.0 / rho - 1.0 / rho_star
    s_ref = 1.0 / ref - 1.0 / rho_star
    val, _err = quad(integrand, s_rho, s_ref, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def shock_curve_residual(left: AngleState, right: AngleState,
                         params: ModelParams, pressure: PressureModel) -> float:
    """Residual of the conservative-form shock-curve relation.

    Zero iff the right state lies on a shock curve through the left state:
    (rho_r - rho_l)(c f2_r - c f2_l - lam g_r + lam g_l)
      - (rho_r cos th_r - rho_l cos th_l)(f1_r - f1_l).
    Antisymmetric under swapping the two states.
    """
    f1l, f2l = conservative_vars(left)
    f1r, f2r = conservative_vars(right)
    gl = g_of(left.rho, params, pressure)
    gr = g_of(right.rho, params, pressure)
    c, lam = params.c, params.lam
    mass_jump = right.rho * math.cos(right.theta) - left.rho * math.cos(left.theta)
    return (right.rho - left.rho) * (c * f2r - c * f2l - lam * gr + lam * gl) \
        - mass_jump * (f1r - f1l)


def rh_shock_speed(left: AngleState, right: AngleState) -> float:
    """Shock speed from the mass-equation Rankine-Hugoniot relation.

    sigma = [rho cos(theta)] / [rho]; symmetric in its arguments.
    """
    drho = right.rho - left.rho
    if drho == 0.0:
        raise DomainError("equal densities: mass-equation shock speed undefined")
    return (right.rho * math.cos(right.theta)
            - left.rho * math.cos(left.theta)) / drho
