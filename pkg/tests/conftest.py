import numpy as np
import pytest

from soh.core import FieldState, ModelParams, make_grid
from soh.pressure import make_pressure


@pytest.fixture
def params():
    return ModelParams(epsilon=1e-4, beta=1e-7, dt=5e-4, dx=5e-3, dy=5e-3)


@pytest.fixture
def pressure(params):
    return make_pressure(params)


@pytest.fixture
def bg_params():
    return ModelParams(epsilon=1e-4, beta=1e-7, kappa=1.0, use_background=True,
                       dt=5e-4, dx=5e-3, dy=5e-3)


@pytest.fixture
def bg_pressure(bg_params):
    return make_pressure(bg_params)


def collision_state(nx=200, ny=200, dx=5e-3, dy=5e-3):
    """Cluster-collision initial data built independently of the package
    (used where an extra cross-check of init_collision is wanted)."""
    x = (np.arange(nx) + 0.5) * dx
    y = (np.arange(ny) + 0.5) * dy
    X, Y = np.meshgrid(x, y)
    in_a = (X >= 1 / 6) & (X < 0.5) & (Y >= 1 / 3) & (Y <= 2 / 3)
    in_b = (X >= 0.5) & (X <= 10 / 12) & (Y >= 1 / 3) & (Y <= 2 / 3)
    rho = np.where(in_a | in_b, 0.8, 0.7)
    r = np.hypot(X - 0.5, Y - 0.5)
    r[r == 0] = 1.0
    o1 = np.where(in_a, 1.0, np.where(in_b, -1.0, -(Y - 0.5) / r))
    o2 = np.where(in_a | in_b, 0.0, (X - 0.5) / r)
    return FieldState(rho, rho * o1, rho * o2, 0.0)


def sine_state_1d(nx=64, dx=5e-3, base=0.8, amp=0.15):
    """Smooth periodic 1D state with unit-norm velocity."""
    x = (np.arange(nx) + 0.5) * dx
    L = nx * dx
    rho = base + amp * np.sin(2 * np.pi * x / L)
    th = 0.3 + 0.9 * np.sin(4 * np.pi * x / L)
    rho = rho[None, :]
    th = th[None, :]
    return FieldState(rho.copy(), rho * np.cos(th), rho * np.sin(th), 0.0)
