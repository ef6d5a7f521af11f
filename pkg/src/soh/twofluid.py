"""Two-species crowd model with a shared congestion pressure.

Two pedestrian populations (right-going "plus", left-going "minus") each
carry density, momentum and a passively advected desired velocity.  The
species are coupled only through the singular pressure of the TOTAL
density, so the congestion bound applies to rho_plus + rho_minus.  The
velocity-transport constant is hard-wired to 1 in this model.

One conservative step proceeds in four stages sharing a single Rusanov
coefficient field (which makes the species updates sum exactly to the
total-system update):

1. elliptic solve for the implicit pressure of the total system, whose
   momentum balance carries the pressure terms twice (once per species);
2. semi-implicit species momentum updates (explicit convective fluxes,
   shared implicit pressure gradient);
3. species continuity with the implicit mass flux (exactly conservative);
4. desired-velocity transport in conservative form rho*w, using the
   updated species momenta (keeps a uniform w exactly uniform).

The relaxation stage then pulls each momentum toward rho*w in closed form.
Boundaries are periodic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CONGESTION_TOL, RHO_FLOOR, Grid, ModelParams
from .errors import DomainError
from .pressure import PressureModel
from .scheme import (StepReport, _axis_speed, _elliptic_rhs_from_faces,
                     _lattice_gap, _stride2_neg_laplacian, newton_elliptic,
                     EllipticSystem, PERIODIC, pad_x, pad_y)

PERTURBATION_AMPLITUDE = 0.19
PERTURBATION_BLOCK = 5           # cells per block side
PERTURBATION_SQUARE = (1.0 / 3.0, 2.0 / 3.0)   # in both directions


@dataclass
class TwoFluidState:
    """Densities, momenta and desired velocities of the two species."""

    rho_plus: np.ndarray
    rho_minus: np.ndarray
    qp1: np.ndarray
    qp2: np.ndarray
    qm1: np.ndarray
    qm2: np.ndarray
    wp1: np.ndarray
    wp2: np.ndarray
    wm1: np.ndarray
    wm2: np.ndarray
    time: float = 0.0

    def copy(self) -> "TwoFluidState":
        return TwoFluidState(*(a.copy() for a in (
            self.rho_plus, self.rho_minus, self.qp1, self.qp2, self.qm1,
            self.qm2, self.wp1, self.wp2, self.wm1, self.wm2)), self.time)

    @property
    def rho_total(self) -> np.ndarray:
        return self.rho_plus + self.rho_minus

    def species(self):
        """(rho, q1, q2, w1, w2) views per species, plus first."""
        return ((self.rho_plus, self.qp1, self.qp2, self.wp1, self.wp2),
                (self.rho_minus, self.qm1, self.qm2, self.wm1, self.wm2))


@dataclass
class LaneDiagnostics:
    """Species imbalance fields and their summary statistics."""

    drho: np.ndarray      # rho_plus - rho_minus
    dq1: np.ndarray       # qp1 + qm1 (net x-flow)
    stats: dict = field(default_factory=dict)


def lane_diagnostics(state: TwoFluidState) -> LaneDiagnostics:
    drho = state.rho_plus - state.rho_minus
    dq1 = state.qp1 + state.qm1
    stats = {}
    for name, a in (("drho", drho), ("dq1", dq1)):
        stats[name] = {"mean": float(a.mean()), "var": float(a.var()),
                       "min": float(a.min()), "max": float(a.max())}
    return LaneDiagnostics(drho=drho, dq1=dq1, stats=stats)


def init_crowd(grid: Grid, params: ModelParams, seed: int | None = None) -> TwoFluidState:
    """Counterflow at rest with a block-random density perturbation.

    Both species start at density 0.4 with zero momentum and desired
    velocities +/- e_x.  Inside the central square the plus density gains a
    perturbation drawn uniformly from [-A, A], constant on grid-aligned
    blocks of 5x5 cells (a block is perturbed when its center lies in the
    square); the minus density is set so the total stays 0.8 exactly.
    Sampling uses the counter-based Philox generator, so equal seeds give
    bit-identical states on any platform; blocks are visited row-major.
    """
    if grid.nx % PERTURBATION_BLOCK or grid.ny % PERTURBATION_BLOCK:
        raise DomainError(
            f"grid ({grid.nx}x{grid.ny}) is not divisible into "
            f"{PERTURBATION_BLOCK}-cell blocks")
    if grid.is_1d:
        raise DomainError("crowd scenario needs a 2D grid")
    actual_seed = params.seed if seed is None else seed
    rng = np.random.Generator(np.random.Philox(actual_seed))

    rho_plus = np.full(grid.shape, 0.4)
    lo, hi = PERTURBATION_SQUARE
    nbx = grid.nx // PERTURBATION_BLOCK
    nby = grid.ny // PERTURBATION_BLOCK
    for by in range(nby):
        for bx in range(nbx):
            cx = (bx + 0.5) * PERTURBATION_BLOCK * grid.dx
            cy = (by + 0.5) * PERTURBATION_BLOCK * grid.dy
            if lo <= cx <= hi and lo <= cy <= hi:
                bump = rng.uniform(-PERTURBATION_AMPLITUDE, PERTURBATION_AMPLITUDE)
                ys = slice(by * PERTURBATION_BLOCK, (by + 1) * PERTURBATION_BLOCK)
                xs = slice(bx * PERTURBATION_BLOCK, (bx + 1) * PERTURBATION_BLOCK)
                rho_plus[ys, xs] = 0.4 + bump
    rho_minus = 0.8 - rho_plus
    if np.any(rho_plus <= 0.2) or np.any(rho_plus >= 0.6):
        raise DomainError("perturbed density left its construction range")

    zero = np.zeros(grid.shape)
    one = np.ones(grid.shape)
    return TwoFluidState(
        rho_plus=rho_plus, rho_minus=rho_minus,
        qp1=zero.copy(), qp2=zero.copy(), qm1=zero.copy(), qm2=zero.copy(),
        wp1=one.copy(), wp2=zero.copy(), wm1=-one, wm2=zero.copy(), time=0.0)


def twofluid_conservative_step(state: TwoFluidState, params: ModelParams,
                               pressure: PressureModel
                               ) -> tuple[TwoFluidState, StepReport]:
    """Shared-pressure conservative step for both species (periodic)."""
    if params.c != 1.0:
        raise DomainError("the crowd model fixes the transport constant c = 1")
    lam = params.lam
    dt, dx, dy = params.dt, params.dx, params.dy
    ny, nx = state.rho_plus.shape
    report = StepReport()

    def padc(a):
        return pad_y(pad_x(a, PERIODIC, 2), PERIODIC, 2)

    rpP, rmP = padc(state.rho_plus), padc(state.rho_minus)
    qp1P, qp2P = padc(state.qp1), padc(state.qp2)
    qm1P, qm2P = padc(state.qm1), padc(state.qm2)
    rhoP = rpP + rmP
    rrP = np.maximum(rhoP, RHO_FLOOR)

    # shared Rusanov coefficient: max over species and directions, with the
    # doubled pressure coefficient of the total momentum balance
    dp0P = 2.0 * lam * pressure.dp0(rrP)
    speeds1, speeds2 = [], []
    for rsP, q1P, q2P in ((rpP, qp1P, qp2P), (rmP, qm1P, qm2P)):
        rs = np.maximum(rsP, RHO_FLOOR)
        speeds1.append(_axis_speed(q1P / rs, dp0P, 1.0))
        speeds2.append(_axis_speed(q2P / rs, dp0P, 1.0))
    s1P = np.maximum(*speeds1)
    s2P = np.maximum(*speeds2)
    cxf = np.maximum(s1P[:, :-1], s1P[:, 1:])
    cyf = np.maximum(s2P[:-1, :], s2P[1:, :])

    p0P = lam * pressure.split_p0(rrP)

    def species_faces(rsP, q1P, q2P):
        rs = np.maximum(rsP, RHO_FLOOR)
        u1, u2 = q1P / rs, q2P / rs
        f1 = q1P * u1 + p0P
        f2 = q1P * u2
        g1 = q2P * u1
        g2 = q2P * u2 + p0P
        fx1 = 0.5 * (f1[:, :-1] + f1[:, 1:]) - 0.5 * cxf * (q1P[:, 1:] - q1P[:, :-1])
        fx2 = 0.5 * (f2[:, :-1] + f2[:, 1:]) - 0.5 * cxf * (q2P[:, 1:] - q2P[:, :-1])
        gy1 = 0.5 * (g1[:-1, :] + g1[1:, :]) - 0.5 * cyf * (q1P[1:, :] - q1P[:-1, :])
        gy2 = 0.5 * (g2[:-1, :] + g2[1:, :]) - 0.5 * cyf * (q2P[1:, :] - q2P[:-1, :])
        return fx1, fx2, gy1, gy2

    faces_p = species_faces(rpP, qp1P, qp2P)
    faces_m = species_faces(rmP, qm1P, qm2P)
    fx1t, fx2t, gy1t, gy2t = (a + b for a, b in zip(faces_p, faces_m))

    rhs = _elliptic_rhs_from_faces(rhoP, qp1P + qm1P, qp2P + qm2P,
                                   fx1t, fx2t, gy1t, gy2t, cxf, cyf,
                                   dt, dx, dy, nx, ny, True)
    lap = (2.0 * lam * dt * dt / 4.0) * _stride2_neg_laplacian(
        nx, ny, dx, dy, PERIODIC, PERIODIC)
    system = EllipticSystem(rhs=rhs, lap=lap, dt=dt, dx=dx, dy=dy, two_dim=True)
    guess = pressure.split_p1(np.clip(state.rho_total, RHO_FLOOR,
                                      params.rho_star * (1 - 1e-15)))
    p1 = newton_elliptic(system, pressure, guess, report)

    p1x = pad_x(p1, PERIODIC, 1)
    p1y = pad_y(p1, PERIODIC, 1)
    gradx = (dt * lam / (2.0 * dx)) * (p1x[:, 2:] - p1x[:, :-2])
    grady = (dt * lam / (2.0 * dy)) * (p1y[2:, :] - p1y[:-2, :])
    iy, ix = slice(2, 2 + ny), slice(2, 2 + nx)

    def advance_species(rho_s, q1_s, q2_s, rsP, faces):
        fx1, fx2, gy1, gy2 = faces
        q1n = q1_s - dt * (fx1[iy, 2:2 + nx] - fx1[iy, 1:1 + nx]) / dx \
            - dt * (gy1[2:2 + ny, ix] - gy1[1:1 + ny, ix]) / dy - gradx
        q2n = q2_s - dt * (fx2[iy, 2:2 + nx] - fx2[iy, 1:1 + nx]) / dx \
            - dt * (gy2[2:2 + ny, ix] - gy2[1:1 + ny, ix]) / dy - grady
        # implicit-flux continuity: mass moves with the updated momentum
        q1nP = pad_x(q1n, PERIODIC, 1)
        q2nP = pad_y(q2n, PERIODIC, 1)
        qxf = 0.5 * (q1nP[:, :-1] + q1nP[:, 1:]) \
            - 0.5 * cxf[iy, 1:2 + nx] * (rsP[iy, 2:2 + nx + 1] - rsP[iy, 1:1 + nx + 1])
        qyf = 0.5 * (q2nP[:-1, :] + q2nP[1:, :]) \
            - 0.5 * cyf[1:2 + ny, ix] * (rsP[2:2 + ny + 1, ix] - rsP[1:1 + ny + 1, ix])
        rho_n = rho_s - dt * (qxf[:, 1:] - qxf[:, :-1]) / dx \
            - dt * (qyf[1:, :] - qyf[:-1, :]) / dy
        return rho_n, q1n, q2n

    rp_new, qp1n, qp2n = advance_species(state.rho_plus, state.qp1, state.qp2,
                                         rpP, faces_p)
    rm_new, qm1n, qm2n = advance_species(state.rho_minus, state.qm1, state.qm2,
                                         rmP, faces_m)

    def advect_w(w1, w2, rho_s_old, rho_s_new, q1n, q2n):
        """Conservative transport of m = rho*w with the updated momenta."""
        q1nP = pad_x(q1n, PERIODIC, 1)
        q2nP = pad_y(q2n, PERIODIC, 1)
        out = []
        for w in (w1, w2):
            wP_x = pad_x(w, PERIODIC, 1)
            wP_y = pad_y(w, PERIODIC, 1)
            mP_x = pad_x(rho_s_old * w, PERIODIC, 1)
            mP_y = pad_y(rho_s_old * w, PERIODIC, 1)
            mxf = 0.5 * (wP_x[:, :-1] * q1nP[:, :-1] + wP_x[:, 1:] * q1nP[:, 1:]) \
                - 0.5 * cxf[iy, 1:2 + nx] * (mP_x[:, 1:] - mP_x[:, :-1])
            myf = 0.5 * (wP_y[:-1, :] * q2nP[:-1, :] + wP_y[1:, :] * q2nP[1:, :]) \
                - 0.5 * cyf[1:2 + ny, ix] * (mP_y[1:, :] - mP_y[:-1, :])
            m_new = rho_s_old * w - dt * (mxf[:, 1:] - mxf[:, :-1]) / dx \
                - dt * (myf[1:, :] - myf[:-1, :]) / dy
            out.append(m_new / np.maximum(rho_s_new, RHO_FLOOR))
        return out

    wp1n, wp2n = advect_w(state.wp1, state.wp2, state.rho_plus, rp_new,
                          qp1n, qp2n)
    wm1n, wm2n = advect_w(state.wm1, state.wm2, state.rho_minus, rm_new,
                          qm1n, qm2n)

    new = TwoFluidState(
        rho_plus=np.maximum(rp_new, RHO_FLOOR),
        rho_minus=np.maximum(rm_new, RHO_FLOOR),
        qp1=qp1n, qp2=qp2n, qm1=qm1n, qm2=qm2n,
        wp1=wp1n, wp2=wp2n, wm1=wm1n, wm2=wm2n,
        time=state.time + dt)
    max_face = max(float(cxf.max()), float(cyf.max()))
    report.max_char_speed = max_face
    report.cfl_explicit = dt * max_face / min(dx, dy)
    report.congested_fraction = float(
        np.mean(new.rho_total >= params.rho_star - CONGESTION_TOL))
    report.checkerboard_gap = _lattice_gap(p1)
    return new, report


def twofluid_relaxation_step(state: TwoFluidState,
                             params: ModelParams) -> TwoFluidState:
    """Exact relaxation of each momentum toward rho*w over one step."""
    arg = params.dt / params.beta
    decay = math.exp(-arg) if arg < 745.0 else 0.0
    new = state.copy()
    new.qp1 = state.rho_plus * state.wp1 + (state.qp1 - state.rho_plus * state.wp1) * decay
    new.qp2 = state.rho_plus * state.wp2 + (state.qp2 - state.rho_plus * state.wp2) * decay
    new.qm1 = state.rho_minus * state.wm1 + (state.qm1 - state.rho_minus * state.wm1) * decay
    new.qm2 = state.rho_minus * state.wm2 + (state.qm2 - state.rho_minus * state.wm2) * decay
    return new


def twofluid_step(state: TwoFluidState, params: ModelParams,
                  pressure: PressureModel) -> tuple[TwoFluidState, StepReport]:
    """Full step: conservative stage then relaxation stage."""
    mid, report = twofluid_conservative_step(state, params, pressure)
    return twofluid_relaxation_step(mid, params), report
