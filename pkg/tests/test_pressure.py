import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soh.core import ModelParams
from soh.errors import DomainError, NegativePressureError
from soh.pressure import BACKGROUND, SPLIT_HALF, make_pressure


@pytest.fixture
def pm():
    return make_pressure(ModelParams(epsilon=1e-4, gamma=2.0, rho_star=1.0))


@pytest.fixture
def pm_bg():
    return make_pressure(ModelParams(epsilon=1e-4, kappa=1.0, use_background=True))


def bisect_inverse(pm, y, lo=1e-12, hi=None, iters=200):
    """Independent bisection oracle for the monotone inverse of p1."""
    hi = pm.params.rho_star - 1e-14 if hi is None else hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pm.split_p1(mid) - y < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestBaseLaw:
    def test_half_density(self, pm):
        assert pm.p(0.5) == pytest.approx(1.0, rel=1e-14)

    def test_point_nine(self, pm):
        # direct evaluation of the law: (1/0.9 - 1)^(-2) = 81
        assert pm.p(0.9) == pytest.approx(81.0, rel=1e-12)

    def test_low_density_isentropic_limit(self, pm):
        # p(rho)/rho^gamma -> 1 as rho -> 0
        ratios = [pm.p(r) / r**2 for r in (1e-2, 1e-4, 1e-6)]
        assert abs(ratios[-1] - 1.0) < 1e-5
        assert abs(ratios[-1] - 1.0) < abs(ratios[0] - 1.0)

    def test_domain_errors(self, pm):
        for bad in (0.0, -0.5, 1.0, 1.5):
            with pytest.raises(DomainError):
                pm.p(bad)

    def test_monotone(self, pm):
        r = np.linspace(0.01, 0.999999, 500)
        assert np.all(np.diff(pm.p(r)) > 0)


class TestStiffened:
    def test_scaling(self, pm):
        assert pm.p_eps(0.5) == pytest.approx(1e-4, rel=1e-14)

    def test_background_added(self, pm_bg):
        # eps*p + kappa*rho^gamma at rho = 0.5
        assert pm_bg.p_eps(0.5) == pytest.approx(1e-4 + 0.25, rel=1e-14)

    def test_vanishes_with_eps_split_mode(self):
        vals = [make_pressure(ModelParams(epsilon=e)).p_eps(0.5)
                for e in (1e-2, 1e-4, 1e-6)]
        assert vals[2] < vals[1] < vals[0]
        assert vals[2] < 1e-5

    def test_p_background(self, pm_bg, pm):
        assert pm_bg.p_background(0.7) == pytest.approx(0.49, rel=1e-14)
        assert pm.p_background(0.7) == 0.0          # kappa = 0
        assert pm_bg.p_background(1.0) == pytest.approx(1.0)  # finite at rho_star


class TestSplit:
    def test_half_split_below_match(self, pm):
        r = 0.5
        assert r <= pm.match_rho
        assert pm.split_p0(r) == pytest.approx(0.5 * pm.p_eps(r), rel=1e-15)
        assert pm.split_p1(r) == pytest.approx(0.5 * pm.p_eps(r), rel=1e-15)

    def test_matching_continuity(self, pm):
        # value / first / second derivative continuous at the matching density
        m = pm.match_rho
        h = 1e-7
        for f in (pm.split_p0, pm.dp0):
            left = f(m - 1e-12)
            right = f(m + 1e-12)
            assert right == pytest.approx(left, rel=1e-9, abs=1e-10)
        # second derivative via finite differences from both sides
        d2_left = (pm.dp0(m - h) - pm.dp0(m - 3 * h)) / (2 * h)
        d2_right = (pm.dp0(m + 3 * h) - pm.dp0(m + h)) / (2 * h)
        assert d2_right == pytest.approx(d2_left, rel=1e-3)

    def test_background_mode_split(self, pm_bg):
        assert pm_bg.split_p0(0.7) == pytest.approx(0.49, rel=1e-14)
        assert pm_bg.split_p1(0.7) == pytest.approx(1e-4 * pm_bg.p(0.7), rel=1e-14)

    def test_additivity(self, pm, pm_bg):
        r = np.linspace(1e-6, 1 - 1e-12, 2001)[:-1]
        for model in (pm, pm_bg):
            gap = model.split_p0(r) + model.split_p1(r) - model.p_eps(r)
            assert np.all(np.abs(gap) <= 1e-12 * (1.0 + model.p_eps(r)))

    def test_p1_monotone_and_unbounded(self, pm):
        r = np.linspace(1e-6, 1 - 1e-13, 1000)
        p1 = pm.split_p1(r)
        assert np.all(np.diff(p1) > 0)
        assert pm.split_p1(1 - 1e-10) > 1e6

    def test_p0_sup_bounded_uniformly(self):
        # sup over (0, rho_star) of p0 is non-increasing across the eps sweep
        sups = []
        for e in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
            m = make_pressure(ModelParams(epsilon=e))
            r = np.linspace(1e-6, 1 - 1e-13, 4000)
            sups.append(m.split_p0(r).max())
        assert all(np.isfinite(sups))
        assert all(a >= b for a, b in zip(sups, sups[1:]))

    def test_mode_flag(self, pm, pm_bg):
        assert pm.mode == SPLIT_HALF
        assert pm_bg.mode == BACKGROUND


class TestDerivatives:
    @pytest.mark.parametrize("name", ["split_p0", "p_eps", "split_p1"])
    def test_against_finite_differences(self, pm, pm_bg, name):
        h = 1e-6
        deriv = {"split_p0": "dp0", "p_eps": "dp_eps", "split_p1": "dp1"}[name]
        for model in (pm, make_pressure(ModelParams(epsilon=1e-2)), pm_bg):
            for r in (0.3, 0.5, 0.8, 0.95):
                f = getattr(model, name)
                fd = (f(r + h) - f(r - h)) / (2 * h)
                assert getattr(model, deriv)(r) == pytest.approx(fd, rel=1e-6)

    def test_one_sided_match(self, pm):
        m = pm.match_rho
        assert pm.dp0(m * (1 + 1e-13)) == pytest.approx(pm.dp0(m * (1 - 1e-13)),
                                                        rel=1e-10)

    def test_dp_eps_nonnegative(self, pm, pm_bg):
        r = np.linspace(1e-6, 1 - 1e-12, 1000)
        assert np.all(pm.dp_eps(r) >= 0)
        assert np.all(pm_bg.dp_eps(r) >= 0)


class TestInverse:
    def test_roundtrip(self, pm):
        assert pm.invert_p1(pm.split_p1(0.8)) == pytest.approx(0.8, abs=1e-10)

    def test_roundtrip_log_sample(self, pm, pm_bg):
        r = 1.0 - np.geomspace(1e-12, 0.999, 60)
        for model in (pm, pm_bg):
            back = model.invert_p1(model.split_p1(r))
            assert np.abs(back - r).max() < 1e-10

    def test_bisection_oracle(self, pm):
        y = 1.0
        expected = bisect_inverse(pm, y)
        assert pm.invert_p1(y) == pytest.approx(expected, abs=1e-10)

    def test_large_pressure_approaches_rho_star(self, pm):
        rhos = [pm.invert_p1(y) for y in (1e2, 1e6, 1e10)]
        assert all(r < 1.0 for r in rhos)
        assert rhos[0] < rhos[1] < rhos[2]
        assert rhos[2] > 1 - 1e-4

    def test_negative_pressure_aborts(self, pm):
        with pytest.raises(NegativePressureError):
            pm.invert_p1(-1e-8)

    def test_residual_tolerance(self, pm):
        rng = np.random.default_rng(0)
        y = pm.split_p1(rng.uniform(0.05, 0.999, 500))
        r = pm.invert_p1(y)
        assert np.abs(pm.split_p1(r) - y).max() <= 1e-12 * (1 + y.max())

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=1e-6, max_value=1 - 1e-9))
    def test_two_sided_inverse_property(self, rho):
        pm = make_pressure(ModelParams(epsilon=1e-4))
        assert pm.invert_p1(pm.split_p1(rho)) == pytest.approx(rho, abs=1e-10)


def test_delta_too_large_rejected():
    # matching width reaching 0 would make the split meaningless
    with pytest.raises(DomainError):
        make_pressure(ModelParams(epsilon=2.0))
