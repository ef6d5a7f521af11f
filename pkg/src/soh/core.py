"""Grid geometry, model parameters and state containers shared by all solvers.

Arrays are cell-centered, row-major with shape (ny, nx); axis 0 is y and
axis 1 is x.  Boundaries are periodic in both directions, handled by index
wrapping (no ghost layers).  A grid with ny == 1 runs the dedicated 1D code
path; the state still carries both momentum components since the velocity
direction lives on the unit circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

# Densities are clamped from below after every step: keeps q/rho finite in
# near-vacuum cells.  Far below any physical density in the scenarios.
RHO_FLOOR = 1e-8

# A cell counts as congested when rho >= rho_star - CONGESTION_TOL.
CONGESTION_TOL = 0.01

# Boundary handling per axis: periodic wrap, or open boundaries with
# mirror ghosts (zero gradient at the boundary face).
BC_PERIODIC = "periodic"
BC_OUTFLOW = "outflow"


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical constants for one run."""

    c: float = 1.0            # convection constant of the velocity transport term
    lam: float = 1.0          # pressure coupling (> 0)
    epsilon: float = 1e-4     # pressure stiffness (> 0)
    beta: float = 1e-7        # relaxation time (> 0)
    gamma: float = 2.0        # pressure exponent (> 0)
    rho_star: float = 1.0     # congestion density (> 0)
    kappa: float = 0.0        # background-pressure strength (>= 0)
    use_background: bool = False
    dt: float = 5e-4
    dx: float = 5e-3
    dy: float = 5e-3
    t_end: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("lam", "epsilon", "beta", "gamma", "rho_star", "dt", "dx", "dy"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"ModelParams.{name} must be > 0, got {getattr(self, name)}")
        if self.kappa < 0.0:
            raise DomainError(f"ModelParams.kappa must be >= 0, got {self.kappa}")
        if not self.use_background and self.kappa != 0.0:
            raise DomainError("kappa must be 0 when use_background is false")

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class Grid:
    """Uniform grid of cell-centered values, periodic unless stated."""

    nx: int
    ny: int
    dx: float
    dy: float
    bc_x: str = BC_PERIODIC
    bc_y: str = BC_PERIODIC

    @property
    def bc(self) -> tuple[str, str]:
        return (self.bc_x, self.bc_y)

    @property
    def is_1d(self) -> bool:
        return self.ny == 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def ncells(self) -> int:
        return self.nx * self.ny

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy


def make_grid(nx: int, ny: int, dx: float, dy: float,
              bc_x: str = BC_PERIODIC, bc_y: str = BC_PERIODIC) -> Grid:
    """Build a grid; ny == 1 selects the 1D code path.

    The implicit pressure stencil couples cells two apart, so fewer than 4
    cells along a coupled direction is rejected.
    """
    if nx < 4:
        raise DomainError(f"nx must be >= 4 (stride-2 pressure stencil), got {nx}")
    if ny != 1 and ny < 4:
        raise DomainError(f"ny must be 1 (1D mode) or >= 4, got {ny}")
    if dx <= 0.0 or dy <= 0.0:
        raise DomainError("grid spacings must be > 0")
    for bc in (bc_x, bc_y):
        if bc not in (BC_PERIODIC, BC_OUTFLOW):
            raise DomainError(f"unknown boundary condition {bc!r}")
    return Grid(nx=nx, ny=ny, dx=dx, dy=dy, bc_x=bc_x, bc_y=bc_y)


def wrap_index(i: int, n: int) -> int:
    """Periodic index arithmetic: i mod n in [0, n)."""
    if n < 1:
        raise DomainError(f"wrap_index needs n >= 1, got {n}")
    return i % n


@dataclass
class FieldState:
    """Cell-centered density and momentum (two components) plus current time.

    Owned exclusively by one solver loop; use copy() to hand immutable
    snapshots to diagnostics or writers.
    """

    rho: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if not (self.rho.shape == self.q1.shape == self.q2.shape):
            raise DomainError("rho, q1, q2 must share one grid shape")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.rho.shape

    def copy(self) -> "FieldState":
        return FieldState(self.rho.copy(), self.q1.copy(), self.q2.copy(), self.time)

    def velocity(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise q / rho on the whole grid."""
        return self.q1 / self.rho, self.q2 / self.rho

    def speed(self) -> np.ndarray:
        """|q| / rho: near 1 after each relaxation step."""
        return np.hypot(self.q1, self.q2) / self.rho


def omega_of(state: FieldState, cell: tuple[int, ...] | int) -> tuple[float, float]:
    """Velocity q/rho at one cell.  No normalization is applied here."""
    rho = state.rho[cell]
    if rho <= 0.0:
        raise DomainError(f"omega_of needs rho > 0 at cell {cell}, got {rho}")
    return state.q1[cell] / rho, state.q2[cell] / rho


def apply_density_floor(state: FieldState, floor: float = RHO_FLOOR) -> FieldState:
    """Clamp rho from below, in place."""
    np.maximum(state.rho, floor, out=state.rho)
    return state


def total_mass(state: FieldState, grid: Grid) -> float:
    """Total mass = sum of cell densities times cell area."""
    return float(state.rho.sum()) * grid.dx * grid.dy


def uniform_state(grid: Grid, rho: float, omega: tuple[float, float]) -> FieldState:
    """Constant state with q = rho * omega, mostly for tests."""
    r = np.full(grid.shape, float(rho))
    return FieldState(r, r * omega[0], r * omega[1], 0.0)
