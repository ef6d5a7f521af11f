import math

import numpy as np
import pytest

from soh.core import ModelParams, make_grid
from soh.errors import DomainError
from soh.pressure import make_pressure
from soh.twofluid import (TwoFluidState, init_crowd, lane_diagnostics,
                          twofluid_conservative_step, twofluid_relaxation_step,
                          twofluid_step)


@pytest.fixture
def params():
    # unit square at a coarse resolution, slow relaxation
    return ModelParams(c=1.0, epsilon=1e-4, beta=0.5, dt=5e-4, dx=0.025, dy=0.025)


@pytest.fixture
def pm(params):
    return make_pressure(params)


@pytest.fixture
def grid(params):
    return make_grid(40, 40, params.dx, params.dy)


def symmetric_rest_state(grid):
    zero = np.zeros(grid.shape)
    one = np.ones(grid.shape)
    return TwoFluidState(np.full(grid.shape, 0.4), np.full(grid.shape, 0.4),
                         zero.copy(), zero.copy(), zero.copy(), zero.copy(),
                         one.copy(), zero.copy(), -one.copy(), zero.copy())


class TestInitCrowd:
    def test_uniform_outside_square(self, grid, params):
        s = init_crowd(grid, params, seed=3)
        assert s.rho_plus[0, 0] == 0.4
        assert s.rho_minus[0, 0] == 0.4
        assert np.all(s.qp1 == 0.0) and np.all(s.qm1 == 0.0)
        assert np.all(s.wp1 == 1.0) and np.all(s.wm1 == -1.0)

    def test_total_exact(self, grid, params):
        s = init_crowd(grid, params, seed=3)
        assert np.all(s.rho_total == 0.8)

    def test_block_structure(self, grid, params):
        s = init_crowd(grid, params, seed=3)
        bumps = s.rho_plus - 0.4
        # perturbation constant on 5x5 blocks
        for by in range(8):
            for bx in range(8):
                block = bumps[by * 5:(by + 1) * 5, bx * 5:(bx + 1) * 5]
                assert np.all(block == block[0, 0])
        # perturbed blocks only inside the central square, amplitude bounded
        assert np.abs(bumps).max() <= 0.19
        assert np.all(bumps[:10, :] == 0.0)

    def test_determinism(self, grid, params):
        a = init_crowd(grid, params, seed=7)
        b = init_crowd(grid, params, seed=7)
        assert np.array_equal(a.rho_plus, b.rho_plus)
        c = init_crowd(grid, params, seed=8)
        assert not np.array_equal(a.rho_plus, c.rho_plus)

    def test_construction_range(self, grid, params):
        s = init_crowd(grid, params, seed=11)
        assert s.rho_plus.min() > 0.2 and s.rho_plus.max() < 0.6
        assert s.rho_minus.min() > 0.2

    def test_block_divisibility_enforced(self, params):
        grid = make_grid(42, 40, 1 / 42, 0.025)
        with pytest.raises(DomainError):
            init_crowd(grid, params, seed=0)


class TestConservativeStep:
    def test_uniform_rest_identity(self, grid, params, pm):
        s = symmetric_rest_state(grid)
        out, _ = twofluid_conservative_step(s, params, pm)
        assert np.abs(out.rho_plus - 0.4).max() < 1e-14
        assert np.abs(out.qp1).max() < 1e-14
        assert np.abs(out.wp1 - 1.0).max() == 0.0

    def test_rejects_transport_constant(self, grid, pm):
        par = ModelParams(c=2.0, epsilon=1e-4, beta=0.5, dt=5e-4,
                          dx=0.025, dy=0.025)
        s = symmetric_rest_state(grid)
        with pytest.raises(DomainError):
            twofluid_conservative_step(s, par, pm)

    def test_species_masses_conserved(self, grid, params, pm):
        s = init_crowd(grid, params, seed=5)
        mp0, mm0 = s.rho_plus.sum(), s.rho_minus.sum()
        for _ in range(20):
            s, _ = twofluid_step(s, params, pm)
        assert abs(s.rho_plus.sum() - mp0) <= 1e-12 * mp0
        assert abs(s.rho_minus.sum() - mm0) <= 1e-12 * mm0

    def test_total_density_bounded(self, grid, params, pm):
        s = init_crowd(grid, params, seed=5)
        for _ in range(100):
            s, _ = twofluid_step(s, params, pm)
            assert s.rho_total.max() <= params.rho_star

    def test_mirror_symmetry(self, grid, params, pm):
        # swapping species and reflecting x maps the update onto itself
        bump = np.zeros(grid.shape)
        bump[18:22, 10:14] = 0.1
        rp = 0.4 + bump
        rm = 0.4 + bump[:, ::-1]
        zero = np.zeros(grid.shape)
        s = TwoFluidState(rp.copy(), rm.copy(), zero.copy(), zero.copy(),
                          zero.copy(), zero.copy(), np.ones(grid.shape),
                          zero.copy(), -np.ones(grid.shape), zero.copy())
        for _ in range(5):
            s, _ = twofluid_step(s, params, pm)
        flip = lambda a: a[:, ::-1]
        assert np.abs(s.rho_plus - flip(s.rho_minus)).max() < 1e-12
        assert np.abs(s.qp1 + flip(s.qm1)).max() < 1e-12
        assert np.abs(s.qp2 - flip(s.qm2)).max() < 1e-12

    def test_uniform_desired_velocity_invariant(self, grid, params, pm):
        s = init_crowd(grid, params, seed=5)
        for _ in range(30):
            s, _ = twofluid_step(s, params, pm)
        assert np.all(s.wp1 == 1.0) and np.all(s.wp2 == 0.0)
        assert np.all(s.wm1 == -1.0) and np.all(s.wm2 == 0.0)


class TestRelaxation:
    def test_equilibrium_fixed(self, grid, params):
        s = symmetric_rest_state(grid)
        s.qp1 = s.rho_plus * s.wp1
        out = twofluid_relaxation_step(s, params)
        assert np.abs(out.qp1 - s.qp1).max() < 1e-16

    def test_exponential_approach(self, grid, params):
        # from rest toward rho*w: q = rho*w*(1 - exp(-dt/beta))
        s = symmetric_rest_state(grid)
        out = twofluid_relaxation_step(s, params)
        expected = 0.4 * (1.0 - math.exp(-params.dt / params.beta))
        assert out.qp1[0, 0] == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(3.998e-4, rel=1e-3)
        assert out.qm1[0, 0] == pytest.approx(-expected, rel=1e-12)

    def test_sub_stepped_ode_oracle(self, grid, params):
        # dq/dt = (rho*w - q)/beta integrated with explicit sub-steps
        s = symmetric_rest_state(grid)
        out = twofluid_relaxation_step(s, params)
        q = 0.0
        n = 20000
        h = params.dt / n
        for _ in range(n):
            k1 = (0.4 - q) / params.beta
            k2 = (0.4 - (q + 0.5 * h * k1)) / params.beta
            k3 = (0.4 - (q + 0.5 * h * k2)) / params.beta
            k4 = (0.4 - (q + h * k3)) / params.beta
            q += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert out.qp1[0, 0] == pytest.approx(q, abs=1e-12)

    def test_instant_limit(self, grid):
        par = ModelParams(c=1.0, beta=1e-9, dt=5e-4, dx=0.025, dy=0.025)
        s = symmetric_rest_state(grid)
        out = twofluid_relaxation_step(s, par)
        assert np.array_equal(out.qp1, s.rho_plus * s.wp1)

    def test_densities_and_w_unchanged(self, grid, params):
        s = init_crowd(grid, params, seed=2)
        out = twofluid_relaxation_step(s, params)
        assert np.array_equal(out.rho_plus, s.rho_plus)
        assert np.array_equal(out.wp1, s.wp1)


class TestLaneDiagnostics:
    def test_symmetric_state_null(self, grid):
        s = symmetric_rest_state(grid)
        d = lane_diagnostics(s)
        assert np.all(d.drho == 0.0) and np.all(d.dq1 == 0.0)
        assert d.stats["drho"]["mean"] == 0.0

    def test_seeded_mean_small(self, grid, params):
        s = init_crowd(grid, params, seed=1)
        d = lane_diagnostics(s)
        # mean of the block perturbation over the whole domain
        assert abs(d.stats["drho"]["mean"]) < 0.02
        assert d.stats["dq1"]["mean"] == 0.0

    def test_flow_correlates_with_imbalance(self, grid, params, pm):
        s = init_crowd(grid, params, seed=1)
        s, _ = twofluid_step(s, params, pm)
        d = lane_diagnostics(s)
        corr = np.corrcoef(d.drho.ravel(), d.dq1.ravel())[0, 1]
        assert corr > 0.0
