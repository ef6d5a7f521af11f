"""Semi-implicit asymptotic-preserving time stepper on structured grids.

One full step splits into

1. a conservative step: local Lax-Friedrichs (Rusanov) fluxes in which the
   convective part and the bounded pressure part p0 are explicit while the
   mass flux and the singular pressure part p1 are implicit.  Substituting
   the momentum update into the continuity update yields one nonlinear
   elliptic equation per step for p1 on a stride-2 stencil (the composition
   of two centered first differences), solved by Newton with a conjugate
   gradient inner solve; the density is then recovered through the monotone
   inverse of p1, which keeps rho < rho_star structurally;
2. a relaxation step driving |q|/rho to 1, integrated in closed form.

Because the diffusion coefficients use only the bounded p0, the explicit
CFL number stays bounded uniformly in the stiffness epsilon.  A fully
explicit reference stepper (full pressure in flux and diffusion) is
provided for comparison; it loses that property.

Boundaries are periodic by default.  An "outflow" mode (mirror ghosts,
i.e. zero-gradient at the boundary face) is available per axis; it keeps
the implicit operator symmetric positive semi-definite but gives up exact
mass conservation, and is used by the shock-speed measurement scenario
where a periodic wrap would send spurious waves into the near-congested
upstream state.

Array layout: (ny, nx), axis 0 = y, axis 1 = x; 1D runs use ny == 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .core import (BC_OUTFLOW, BC_PERIODIC, CONGESTION_TOL, RHO_FLOOR, FieldState,
                   ModelParams, apply_density_floor)
from .errors import BlowupError, DomainError, NegativePressureError, NewtonConvergenceError
from .pressure import PressureModel

PERIODIC = BC_PERIODIC
OUTFLOW = BC_OUTFLOW
_BC_MODES = {PERIODIC: "wrap", OUTFLOW: "symmetric"}

# Outer Newton: contract bound for acceptance, tighter working target so the
# per-step mass defect stays near roundoff (the elliptic solution is what
# conserves mass; every explicit right-hand-side term telescopes).
NEWTON_MAX_ITER = 50
NEWTON_ACCEPT_FACTOR = 1e-10
NEWTON_TARGET_FACTOR = 3e-14
CG_RTOL = 1e-12
CG_MAXITER = 4000


def _check_bc(bc: str) -> str:
    if bc not in _BC_MODES:
        raise DomainError(f"unknown boundary condition {bc!r}")
    return bc


def pad_x(a: np.ndarray, bc: str, width: int) -> np.ndarray:
    return np.pad(a, ((0, 0), (width, width)), mode=_BC_MODES[_check_bc(bc)])


def pad_y(a: np.ndarray, bc: str, width: int) -> np.ndarray:
    return np.pad(a, ((width, width), (0, 0)), mode=_BC_MODES[_check_bc(bc)])


# -- characteristic speeds and diffusion coefficients ----------------------

def char_speeds_relax(rho, u, params: ModelParams, pressure: PressureModel,
                      pressure_part: str = "p0", lam: float | None = None):
    """Characteristic speeds (c*u, c*u -/+ root) of the conservative system.

    `pressure_part` selects which pressure derivative enters the root:
    "p0" for the explicit part (what the scheme's diffusion uses), "full"
    for the complete stiffened pressure.  A negative radicand (possible for
    c < 1) is replaced by its absolute value.
    """
    lam = params.lam if lam is None else lam
    dp = pressure.dp0(rho) if pressure_part == "p0" else pressure.dp_eps(rho)
    c = params.c
    root = np.sqrt(np.abs((c * c - c) * u * u + lam * dp))
    cu = c * u
    return cu, cu - root, cu + root


def _axis_speed(u, dp, c):
    """max |eigenvalue| in one direction: |c*u| + root (radicand regularized)."""
    root = np.sqrt(np.abs((c * c - c) * u * u + dp))
    return np.abs(c * u) + root


def diffusion_coeff(left_cell, right_cell, params: ModelParams,
                    pressure: PressureModel, axis: int = 0,
                    pressure_part: str = "p0") -> float:
    """Rusanov diffusion coefficient for the face between two cells.

    Each cell is a (rho, q1, q2) triple; the coefficient is the larger, over
    the two cells, of the maximal absolute eigenvalue in the face direction
    (axis 0 = x, 1 = y).  With the explicit part p0 it stays bounded
    uniformly in epsilon.
    """
    speeds = []
    for rho, q1, q2 in (left_cell, right_cell):
        if rho <= 0.0:
            raise DomainError("diffusion_coeff needs rho > 0")
        u = (q1 if axis == 0 else q2) / rho
        dp = pressure.dp0(rho) if pressure_part == "p0" else pressure.dp_eps(rho)
        speeds.append(float(_axis_speed(u, params.lam * dp, params.c)))
    return max(speeds)


# -- elliptic system --------------------------------------------------------

_LAP_CACHE: dict = {}


def _stride2_cols(n: int, k: int, bc: str) -> np.ndarray:
    """Column indices of the stride-k neighbor under the given boundary."""
    cols = np.arange(n) + k
    if bc == PERIODIC:
        return cols % n
    # mirror ghosts: ... a1 a0 | a0 a1 ... an-1 | an-1 an-2 ...
    cols = np.where(cols < 0, -cols - 1, cols)
    return np.where(cols >= n, 2 * n - 1 - cols, cols)


def _stride2_neg_laplacian(nx: int, ny: int, dx: float, dy: float,
                           bc_x: str, bc_y: str) -> sp.csr_matrix:
    """Positive semi-definite matrix for -(D2x/dx^2 + D2y/dy^2), stride 2.

    The stride-2 coupling decouples the even/odd sub-lattices in each
    direction: no entry connects cells of different parity (mirror ghosts
    at an outflow boundary bridge parities only there).
    """
    key = (nx, ny, dx, dy, bc_x, bc_y)
    if key not in _LAP_CACHE:
        def one_dim(n, h, bc):
            rows = np.arange(n)
            ones = np.ones(n)
            s = sp.csr_matrix((ones, (rows, _stride2_cols(n, 2, bc))), shape=(n, n)) \
                + sp.csr_matrix((ones, (rows, _stride2_cols(n, -2, bc))), shape=(n, n))
            return (s - 2.0 * sp.identity(n)) / h**2

        lx = one_dim(nx, dx, bc_x)
        if ny == 1:
            lap = lx
        else:
            ly = one_dim(ny, dy, bc_y)
            lap = sp.kron(sp.identity(ny), lx) + sp.kron(ly, sp.identity(nx))
        _LAP_CACHE[key] = (-lap).tocsr()
    return _LAP_CACHE[key]


@dataclass
class StepReport:
    """Per-step scalar observables of one conservative step."""

    newton_iterations: int = 0
    inner_linear_iterations: int = 0
    max_char_speed: float = 0.0
    cfl_explicit: float = 0.0
    congested_fraction: float = 0.0
    checkerboard_gap: float = 0.0   # even/odd sub-lattice mean gap of p1


@dataclass
class EllipticSystem:
    """Discrete nonlinear equation rho(p1) + K p1 = rhs for the implicit pressure.

    K is the (positive semi-definite) stride-2 operator with the pressure
    coefficient folded in; the explicit face fluxes and diffusion
    coefficients used to build the right-hand side are kept for the
    momentum recovery.
    """

    rhs: np.ndarray
    lap: sp.csr_matrix
    dt: float
    dx: float
    dy: float
    two_dim: bool
    bc_x: str = PERIODIC
    bc_y: str = PERIODIC
    fx1: np.ndarray = None   # x-faces of the q1 equation, padded layout
    fx2: np.ndarray = None
    gy1: np.ndarray = None   # y-faces (2D only)
    gy2: np.ndarray = None
    max_face_speed: float = 0.0


def _elliptic_rhs_from_faces(rhoP, q1P, q2P, fx1, fx2, gy1, gy2, cxf, cyf,
                             dt, dx, dy, nx, ny, two_dim):
    """Right-hand side of the elliptic equation from padded cell/face arrays.

    Padded cells carry 2 ghost layers per padded axis; x-face arrays have
    one column per padded cell pair (face i+1/2 at column i+2), y-face
    arrays one row per pair.  Every term is a discrete divergence.
    """
    iy = slice(2, 2 + ny) if two_dim else slice(None)
    ix = slice(2, 2 + nx)

    rhs = rhoP[iy, ix] - dt * (q1P[iy, 3:3 + nx] - q1P[iy, 1:1 + nx]) / (2.0 * dx)
    b1 = fx1[iy, 3:3 + nx] - fx1[iy, 2:2 + nx] - fx1[iy, 1:1 + nx] + fx1[iy, 0:nx]
    rhs = rhs + (0.5 * dt * dt / dx**2) * b1
    difx = cxf * (rhoP[:, 1:] - rhoP[:, :-1])
    rhs = rhs + (0.5 * dt / dx) * (difx[iy, 2:2 + nx] - difx[iy, 1:1 + nx])
    if two_dim:
        rhs = rhs - dt * (q2P[3:3 + ny, ix] - q2P[1:1 + ny, ix]) / (2.0 * dy)
        bg2 = gy2[3:3 + ny, ix] - gy2[2:2 + ny, ix] - gy2[1:1 + ny, ix] + gy2[0:ny, ix]
        rhs = rhs + (0.5 * dt * dt / dy**2) * bg2
        bg1 = (gy1[2:2 + ny, 3:3 + nx] - gy1[1:1 + ny, 3:3 + nx]) \
            - (gy1[2:2 + ny, 1:1 + nx] - gy1[1:1 + ny, 1:1 + nx])
        bf2 = (fx2[3:3 + ny, 2:2 + nx] - fx2[3:3 + ny, 1:1 + nx]) \
            - (fx2[1:1 + ny, 2:2 + nx] - fx2[1:1 + ny, 1:1 + nx])
        rhs = rhs + (0.5 * dt * dt / (dx * dy)) * (bg1 + bf2)
        dify = cyf * (rhoP[1:, :] - rhoP[:-1, :])
        rhs = rhs + (0.5 * dt / dy) * (dify[2:2 + ny, ix] - dify[1:1 + ny, ix])
    return rhs


def assemble_elliptic(state: FieldState, params: ModelParams,
                      pressure: PressureModel,
                      pressure_coef: float | None = None,
                      bc: tuple[str, str] = (PERIODIC, PERIODIC)) -> EllipticSystem:
    """Build the discrete elliptic equation for the implicit pressure.

    `pressure_coef` is the multiplier of both pressure parts in the
    momentum balance (params.lam for the single-fluid system; the two-fluid
    total system doubles it).  `bc` is (bc_x, bc_y).
    """
    lam = params.lam if pressure_coef is None else pressure_coef
    bc_x, bc_y = bc
    rho, q1, q2 = state.rho, state.q1, state.q2
    ny, nx = rho.shape
    two_dim = ny > 1
    dt, dx, dy, c = params.dt, params.dx, params.dy, params.c

    def padc(a):
        out = pad_x(a, bc_x, 2)
        return pad_y(out, bc_y, 2) if two_dim else out

    rhoP, q1P, q2P = padc(rho), padc(q1), padc(q2)
    rrP = np.maximum(rhoP, RHO_FLOOR)
    u1P, u2P = q1P / rrP, q2P / rrP
    dp0P = lam * pressure.dp0(rrP)
    s1P = _axis_speed(u1P, dp0P, c)
    p0P = lam * pressure.split_p0(rrP)

    cxf = np.maximum(s1P[:, :-1], s1P[:, 1:])
    f1P = c * q1P * u1P + p0P
    f2P = c * q1P * u2P
    fx1 = 0.5 * (f1P[:, :-1] + f1P[:, 1:]) - 0.5 * cxf * (q1P[:, 1:] - q1P[:, :-1])
    fx2 = 0.5 * (f2P[:, :-1] + f2P[:, 1:]) - 0.5 * cxf * (q2P[:, 1:] - q2P[:, :-1])
    if two_dim:
        s2P = _axis_speed(u2P, dp0P, c)
        cyf = np.maximum(s2P[:-1, :], s2P[1:, :])
        g1P = f2P                       # c * q2 * u1
        g2P = c * q2P * u2P + p0P
        gy1 = 0.5 * (g1P[:-1, :] + g1P[1:, :]) - 0.5 * cyf * (q1P[1:, :] - q1P[:-1, :])
        gy2 = 0.5 * (g2P[:-1, :] + g2P[1:, :]) - 0.5 * cyf * (q2P[1:, :] - q2P[:-1, :])
        max_face = max(float(cxf.max()), float(cyf.max()))
    else:
        cyf = gy1 = gy2 = None
        max_face = float(cxf.max())

    rhs = _elliptic_rhs_from_faces(rhoP, q1P, q2P, fx1, fx2, gy1, gy2, cxf, cyf,
                                   dt, dx, dy, nx, ny, two_dim)
    lap = (lam * dt * dt / 4.0) * _stride2_neg_laplacian(nx, ny, dx, dy, bc_x, bc_y)
    return EllipticSystem(rhs=rhs, lap=lap, dt=dt, dx=dx, dy=dy, two_dim=two_dim,
                          bc_x=bc_x, bc_y=bc_y, fx1=fx1, fx2=fx2, gy1=gy1, gy2=gy2,
                          max_face_speed=max_face)


def newton_elliptic(system: EllipticSystem, pressure: PressureModel,
                    initial_guess: np.ndarray, report: StepReport | None = None,
                    preconditioner: str = "jacobi") -> np.ndarray:
    """Solve rho(p1) + K p1 = rhs for the implicit pressure field p1 >= 0.

    Newton with the exact Jacobian diag(drho/dp1) + K, which is symmetric
    positive definite, so the inner solve is conjugate gradient (Jacobi
    preconditioned by default: drho/dp1 spans many decades between
    near-vacuum and congested cells, which leaves plain CG impractically
    slow).  Iterates are clamped at 0; a solution pinned at 0 with negative
    residual is the negative-pressure instability and aborts.
    """
    rhs = system.rhs.ravel()
    scale = 1.0 + float(np.abs(rhs).max())
    tol_accept = NEWTON_ACCEPT_FACTOR * scale
    tol_target = NEWTON_TARGET_FACTOR * scale
    K = system.lap
    kdiag = K.diagonal()

    p1 = np.clip(np.asarray(initial_guess, dtype=float).ravel().copy(), 0.0, None)
    rho = pressure.invert_p1(p1)
    newton_iters = 0
    cg_iters_total = 0
    residual = rhs - rho - K @ p1
    res_norm = float(np.abs(residual).max())
    for _ in range(NEWTON_MAX_ITER):
        if res_norm <= tol_target:
            break
        d = pressure.drho_dp1(np.maximum(rho, RHO_FLOOR))
        jac = K + sp.diags(d)
        M = sp.diags(1.0 / (d + kdiag)) if preconditioner == "jacobi" else None
        count = [0]

        def _cb(_xk):
            count[0] += 1

        delta, _info = cg(jac, residual, rtol=CG_RTOL, atol=0.0,
                          maxiter=CG_MAXITER, M=M, callback=_cb)
        cg_iters_total += count[0]
        newton_iters += 1

        step = 1.0
        improved = False
        for _ in range(40):
            p1_try = np.clip(p1 + step * delta, 0.0, None)
            rho_try = pressure.invert_p1(p1_try, initial=rho)
            residual_try = rhs - rho_try - K @ p1_try
            res_try = float(np.abs(residual_try).max())
            if res_try < res_norm:
                p1, rho = p1_try, rho_try
                residual, res_norm = residual_try, res_try
                improved = True
                break
            step *= 0.5
        if not improved:
            break

    if report is not None:
        report.newton_iterations = newton_iters
        report.inner_linear_iterations = cg_iters_total
    if res_norm > tol_accept:
        pinned = (p1 == 0.0) & (residual < 0.0)
        if np.any(pinned):
            raise NegativePressureError(
                f"implicit pressure pinned at 0 in {int(pinned.sum())} cells with "
                f"residual {res_norm:.3e}: negative-pressure instability"
            )
        raise NewtonConvergenceError(
            f"elliptic Newton stalled at residual {res_norm:.3e} "
            f"(tolerance {tol_accept:.3e}) after {newton_iters} iterations",
            residual=res_norm, iterations=newton_iters,
        )
    return p1.reshape(system.rhs.shape)


def _lattice_gap(p1: np.ndarray) -> float:
    """Mean gap between the even and odd stride-2 sub-lattices of p1."""
    gx = abs(float(p1[:, 0::2].mean()) - float(p1[:, 1::2].mean()))
    if p1.shape[0] > 1:
        gy = abs(float(p1[0::2, :].mean()) - float(p1[1::2, :].mean()))
        return max(gx, gy)
    return gx


# -- conservative step ------------------------------------------------------

def conservative_step(state: FieldState, params: ModelParams,
                      pressure: PressureModel,
                      bc: tuple[str, str] = (PERIODIC, PERIODIC)
                      ) -> tuple[FieldState, StepReport]:
    """One semi-implicit conservative step.

    Solves the elliptic equation for p1, recovers the density through the
    monotone inverse (so max rho < rho_star), then recovers the momentum
    explicitly from the stored fluxes and the centered gradient of p1.
    """
    lam = params.lam
    report = StepReport()
    system = assemble_elliptic(state, params, pressure, bc=bc)
    guess = pressure.split_p1(np.maximum(state.rho, RHO_FLOOR))
    p1 = newton_elliptic(system, pressure, guess, report)
    rho_new = pressure.invert_p1(p1, initial=state.rho)

    ny, nx = state.rho.shape
    dt, dx, dy = params.dt, params.dx, params.dy
    iy = slice(2, 2 + ny) if system.two_dim else slice(None)
    p1x = pad_x(p1, system.bc_x, 1)
    q1 = state.q1 - dt * (system.fx1[iy, 2:2 + nx] - system.fx1[iy, 1:1 + nx]) / dx \
        - (dt * lam / (2.0 * dx)) * (p1x[:, 2:] - p1x[:, :-2])
    q2 = state.q2 - dt * (system.fx2[iy, 2:2 + nx] - system.fx2[iy, 1:1 + nx]) / dx
    if system.two_dim:
        ix = slice(2, 2 + nx)
        p1y = pad_y(p1, system.bc_y, 1)
        q1 = q1 - dt * (system.gy1[2:2 + ny, ix] - system.gy1[1:1 + ny, ix]) / dy
        q2 = q2 - dt * (system.gy2[2:2 + ny, ix] - system.gy2[1:1 + ny, ix]) / dy \
            - (dt * lam / (2.0 * dy)) * (p1y[2:, :] - p1y[:-2, :])

    new = FieldState(rho_new, q1, q2, state.time + dt)
    apply_density_floor(new)
    report.max_char_speed = system.max_face_speed
    report.cfl_explicit = dt * system.max_face_speed / (min(dx, dy) if system.two_dim else dx)
    report.congested_fraction = float(np.mean(new.rho >= params.rho_star - CONGESTION_TOL))
    report.checkerboard_gap = _lattice_gap(p1)
    return new, report


# -- relaxation step ---------------------------------------------------------

def relaxation_step(state: FieldState, params: ModelParams) -> FieldState:
    """Exact integration of the norm relaxation over one step.

    rho is unchanged; the velocity is rescaled by
    (|w|^2 + (1 - |w|^2) exp(-2 dt/beta))^(-1/2).  Beyond exp arguments of
    ~745 the exponential underflows to 0 and the formula degrades
    gracefully to exact renormalization; cells with q = 0 stay at rest.
    """
    arg = 2.0 * params.dt / params.beta
    decay = math.exp(-arg) if arg < 745.0 else 0.0
    rho = state.rho
    norm2 = (state.q1 * state.q1 + state.q2 * state.q2) / (rho * rho)
    denom2 = norm2 * (1.0 - decay) + decay
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = 1.0 / np.sqrt(denom2)
    factor = np.where(norm2 > 0.0, factor, 0.0)
    return FieldState(rho.copy(), state.q1 * factor, state.q2 * factor, state.time)


def ap_step(state: FieldState, params: ModelParams, pressure: PressureModel,
            bc: tuple[str, str] = (PERIODIC, PERIODIC)
            ) -> tuple[FieldState, StepReport]:
    """Full step: conservative step followed by the relaxation step."""
    mid, report = conservative_step(state, params, pressure, bc=bc)
    return relaxation_step(mid, params), report


# -- fully explicit reference stepper ----------------------------------------

def explicit_step(state: FieldState, params: ModelParams,
                  pressure: PressureModel,
                  bc: tuple[str, str] = (PERIODIC, PERIODIC)
                  ) -> tuple[FieldState, StepReport]:
    """Fully explicit Rusanov step with the complete pressure.

    Reference baseline only: both the flux and the diffusion coefficient
    use the full stiffened pressure, so the stable time step collapses as
    epsilon shrinks.  Raises BlowupError when the updated state stops being
    admissible (non-finite values, rho <= 0 or rho >= rho_star).
    """
    bc_x, bc_y = bc
    rho, q1, q2 = state.rho, state.q1, state.q2
    ny, nx = rho.shape
    two_dim = ny > 1
    dt, dx, dy, c, lam = params.dt, params.dx, params.dy, params.c, params.lam

    def padc(a):
        out = pad_x(a, bc_x, 1)
        return pad_y(out, bc_y, 1) if two_dim else out

    rhoP, q1P, q2P = padc(rho), padc(q1), padc(q2)
    rrP = np.maximum(rhoP, RHO_FLOOR)
    u1P, u2P = q1P / rrP, q2P / rrP
    dpP = lam * pressure.dp_eps(rrP)
    pP = lam * pressure.p_eps(rrP)
    s1P = _axis_speed(u1P, dpP, c)
    iy = slice(1, 1 + ny) if two_dim else slice(None)

    cxf = np.maximum(s1P[:, :-1], s1P[:, 1:])
    qx = 0.5 * (q1P[:, :-1] + q1P[:, 1:]) - 0.5 * cxf * (rhoP[:, 1:] - rhoP[:, :-1])
    f1P = c * q1P * u1P + pP
    f2P = c * q1P * u2P
    fx1 = 0.5 * (f1P[:, :-1] + f1P[:, 1:]) - 0.5 * cxf * (q1P[:, 1:] - q1P[:, :-1])
    fx2 = 0.5 * (f2P[:, :-1] + f2P[:, 1:]) - 0.5 * cxf * (q2P[:, 1:] - q2P[:, :-1])
    rho_new = rho - dt * (qx[iy, 1:1 + nx] - qx[iy, 0:nx]) / dx
    q1_new = q1 - dt * (fx1[iy, 1:1 + nx] - fx1[iy, 0:nx]) / dx
    q2_new = q2 - dt * (fx2[iy, 1:1 + nx] - fx2[iy, 0:nx]) / dx
    max_face = float(cxf.max())
    if two_dim:
        ix = slice(1, 1 + nx)
        s2P = _axis_speed(u2P, dpP, c)
        cyf = np.maximum(s2P[:-1, :], s2P[1:, :])
        qy = 0.5 * (q2P[:-1, :] + q2P[1:, :]) - 0.5 * cyf * (rhoP[1:, :] - rhoP[:-1, :])
        g1P = f2P
        g2P = c * q2P * u2P + pP
        gy1 = 0.5 * (g1P[:-1, :] + g1P[1:, :]) - 0.5 * cyf * (q1P[1:, :] - q1P[:-1, :])
        gy2 = 0.5 * (g2P[:-1, :] + g2P[1:, :]) - 0.5 * cyf * (q2P[1:, :] - q2P[:-1, :])
        rho_new = rho_new - dt * (qy[1:1 + ny, ix] - qy[0:ny, ix]) / dy
        q1_new = q1_new - dt * (gy1[1:1 + ny, ix] - gy1[0:ny, ix]) / dy
        q2_new = q2_new - dt * (gy2[1:1 + ny, ix] - gy2[0:ny, ix]) / dy
        max_face = max(max_face, float(cyf.max()))

    finite = np.isfinite(rho_new).all() and np.isfinite(q1_new).all() \
        and np.isfinite(q2_new).all()
    if not finite or np.any(rho_new <= 0.0) or np.any(rho_new >= params.rho_star):
        raise BlowupError(
            "explicit step left the admissible state space "
            f"(finite={bool(finite)}, rho range [{np.nanmin(rho_new):.3g}, "
            f"{np.nanmax(rho_new):.3g}])"
        )
    new = FieldState(rho_new, q1_new, q2_new, state.time + dt)
    report = StepReport(
        max_char_speed=max_face,
        cfl_explicit=dt * max_face / (min(dx, dy) if two_dim else dx),
        congested_fraction=float(np.mean(new.rho >= params.rho_star - CONGESTION_TOL)),
    )
    return new, report
