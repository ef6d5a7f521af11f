"""Initial conditions and run-time diagnostics for the test scenarios.

The shock-speed test evolves piecewise-constant (density, angle) data.  Its
measurement window is x in [0, 1] with the jump at x0, but the periodic
domain extends beyond the window on both sides: the wrap seam joins the two
far states, and in the near-congested medium the resulting depressurization
waves travel fast enough to reach the window otherwise.  The pads keep the
seam's influence outside the window for the whole measurement.

The cluster-collision scenario fills the unit square with two dense blocks
moving toward each other inside a swirling background flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import AngleState
from .core import FieldState, Grid, ModelParams
from .errors import DomainError

RIEMANN_PAD_LEFT = 0.3
RIEMANN_PAD_RIGHT = 6.0
SHOCK_FIT_START = 0.01   # drop the formation transient from the speed fit


@dataclass(frozen=True)
class RiemannSpec:
    """Left/right states, jump position, and window padding of the shock test."""

    left: AngleState = AngleState(0.8, 0.14)
    right: AngleState = AngleState(0.9969, 1.4502)
    jump_position: float = 0.5
    pad_left: float = RIEMANN_PAD_LEFT
    pad_right: float = RIEMANN_PAD_RIGHT

    def __post_init__(self):
        if not 0.0 < self.jump_position < 1.0:
            raise DomainError("jump_position must be strictly inside (0, 1)")
        if self.left == self.right:
            raise DomainError("left and right states must differ")
        if self.pad_left < 0.0 or self.pad_right < 0.0:
            raise DomainError("pads must be nonnegative")

    @property
    def mid_density(self) -> float:
        return 0.5 * (self.left.rho + self.right.rho)

    def domain_length(self) -> float:
        return 1.0 + self.pad_left + self.pad_right

    def x_window(self, grid: Grid) -> np.ndarray:
        """Cell centers in window coordinates (window = [0, 1])."""
        return grid.x_centers() - self.pad_left


def riemann_grid_size(spec: RiemannSpec, dx: float) -> int:
    """Cell count covering window plus pads at spacing dx."""
    return int(round(spec.domain_length() / dx))


def init_riemann(spec: RiemannSpec, grid: Grid) -> FieldState:
    """Piecewise-constant state: left of the jump (in window coordinates)
    takes the left state, right of it the right state; uniform in y."""
    x = spec.x_window(grid)
    left_mask = x < spec.jump_position
    rho_row = np.where(left_mask, spec.left.rho, spec.right.rho)
    th_row = np.where(left_mask, spec.left.theta, spec.right.theta)
    rho = np.broadcast_to(rho_row, grid.shape).copy()
    th = np.broadcast_to(th_row, grid.shape)
    return FieldState(rho, rho * np.cos(th), rho * np.sin(th), 0.0)


# -- cluster collision -------------------------------------------------------

CLUSTER_A = ((1.0 / 6.0, 0.5), (1.0 / 3.0, 2.0 / 3.0))      # x-range, y-range
CLUSTER_B = ((0.5, 10.0 / 12.0), (1.0 / 3.0, 2.0 / 3.0))


def init_collision(grid: Grid, params: ModelParams) -> FieldState:
    """Two dense clusters moving toward each other in a swirling background.

    Density 0.8 on the clusters, 0.7 elsewhere; velocity +x in the left
    cluster, -x in the right one, counterclockwise unit swirl around the
    domain center outside.  The swirl is singular at the center, but the
    center lies inside the clusters where it is never evaluated.
    """
    x = grid.x_centers()
    y = grid.y_centers()
    X, Y = np.meshgrid(x, y)
    (ax0, ax1), (ay0, ay1) = CLUSTER_A
    (bx0, bx1), (by0, by1) = CLUSTER_B
    in_a = (X >= ax0) & (X < ax1) & (Y >= ay0) & (Y <= ay1)
    in_b = (X >= bx0) & (X <= bx1) & (Y >= by0) & (Y <= by1)
    clusters = in_a | in_b

    r = np.hypot(X - 0.5, Y - 0.5)
    if np.any(~clusters & (r < 0.05)):
        raise DomainError("swirl would be evaluated near its singular center")
    r_safe = np.where(clusters, 1.0, r)
    o1 = np.where(in_a, 1.0, np.where(in_b, -1.0, -(Y - 0.5) / r_safe))
    o2 = np.where(clusters, 0.0, (X - 0.5) / r_safe)

    rho = np.where(clusters, 0.8, 0.7)
    return FieldState(rho, rho * o1, rho * o2, 0.0)


# -- shock tracking ----------------------------------------------------------

def track_shock(state: FieldState, spec: RiemannSpec, grid: Grid,
                previous: float | None = None) -> float | None:
    """Mid-row position where the density crosses the states' mid value.

    Linear interpolation between bracketing cells; among multiple crossings
    (there is always one at the wrap seam) the one nearest the previous
    position wins.  Returns None once no crossing remains inside the
    measurement window (shock exited).
    """
    x = spec.x_window(grid)
    row = state.rho[state.rho.shape[0] // 2]
    mid = spec.mid_density
    d = row - mid
    idx = np.nonzero(d[:-1] * d[1:] <= 0.0)[0]
    candidates = []
    for j in idx:
        if row[j + 1] == row[j]:
            continue
        pos = x[j] + (mid - row[j]) / (row[j + 1] - row[j]) * grid.dx
        if -0.05 <= pos <= 1.05:
            candidates.append(pos)
    if not candidates:
        return None
    anchor = spec.jump_position if previous is None else previous
    return min(candidates, key=lambda p: abs(p - anchor))


@dataclass
class ShockTrack:
    """Time series of tracked shock positions with a least-squares speed fit."""

    spec: RiemannSpec
    grid: Grid
    fit_start: float = SHOCK_FIT_START
    times: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    boundary_arrival_time: float | None = None
    _previous: float | None = None

    def record(self, state: FieldState) -> float | None:
        pos = track_shock(state, self.spec, self.grid, self._previous)
        if pos is None:
            if self.boundary_arrival_time is None:
                self.boundary_arrival_time = state.time
            return None
        self._previous = pos
        if pos <= 0.5 * self.grid.dx:
            if self.boundary_arrival_time is None:
                self.boundary_arrival_time = state.time
            return pos
        if self.boundary_arrival_time is None:
            self.times.append(state.time)
            self.positions.append(pos)
        return pos

    def _fit_window(self):
        t = np.asarray(self.times)
        p = np.asarray(self.positions)
        mask = t >= self.fit_start
        if mask.sum() < 2:
            mask = np.ones_like(t, dtype=bool)
        return t[mask], p[mask]

    @property
    def sigma_fit(self) -> float:
        t, p = self._fit_window()
        if t.size < 2:
            raise DomainError("not enough samples to fit a shock speed")
        return float(np.polyfit(t, p, 1)[0])

    @property
    def fit_residual(self) -> float:
        t, p = self._fit_window()
        slope, intercept = np.polyfit(t, p, 1)
        return float(np.sqrt(np.mean((p - (slope * t + intercept)) ** 2)))

    @property
    def arrival_estimate(self) -> float | None:
        """Measured arrival if seen, else zero-crossing of the linear fit."""
        if self.boundary_arrival_time is not None:
            return self.boundary_arrival_time
        if len(self.times) < 2:
            return None
        slope, intercept = np.polyfit(np.asarray(self.times),
                                      np.asarray(self.positions), 1)
        if slope >= 0:
            return None
        return float(-intercept / slope)


def congested_fraction(state: FieldState, params: ModelParams,
                       tol: float) -> float:
    """Fraction of cells with rho >= rho_star - tol."""
    if tol <= 0.0:
        raise DomainError("tol must be > 0")
    return float(np.mean(state.rho >= params.rho_star - tol))
