import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughhurst.errors import ConfigError, DomainError, NumericalError
from roughhurst.paths import DyadicPath
from roughhurst.processes import (
    FouSpec,
    Transform,
    build_drifted_fbm,
    build_fou,
    check_regularity,
    integrate_transform,
)
from roughhurst.sim import FbmPath, simulate_fbm


def zero_fbm(level, H=0.3):
    return FbmPath(level=level, values=np.zeros(2**level + 1), hurst=H, seed=0)


ALL_TRANSFORMS = [
    Transform.identity(),
    Transform.exp_two_t(),
    Transform.square(),
    Transform.non_monotone(),
    Transform.polynomial([1.0, -2.0, 0.5, 0.25]),
    Transform.custom(np.sin, np.cos, "sin"),
]


class TestTransforms:
    @pytest.mark.parametrize("tr", ALL_TRANSFORMS, ids=lambda t: t.name)
    def test_derivative_consistent(self, tr):
        t = np.linspace(-2.5, 3.5, 41)
        for h in (1e-3, 5e-4):
            fd = (tr.g(t + h) - tr.g(t - h)) / (2 * h)
            scale = 1 + np.abs(tr.dg(t))
            # central differences are O(h^2)
            assert np.max(np.abs(fd - tr.dg(t)) / scale) < 50 * h**2 * max(1.0, np.abs(tr.g(t)).max())

    def test_named_formulas(self):
        t = np.array([-1.0, 0.0, 0.3, 2.0])
        assert np.allclose(Transform.exp_two_t().g(t), np.exp(2 * t))
        assert np.allclose(Transform.exp_two_t().dg(t), 2 * np.exp(2 * t))
        assert np.allclose(Transform.square().dg(t), 2 * t)
        assert np.allclose(Transform.non_monotone().g(t), (t - 2) ** 2 + np.sin(2 * np.pi * t))

    def test_exp_positive(self):
        t = np.linspace(-20, 5, 100)
        tr = Transform.exp_two_t()
        assert np.all(tr.g(t) > 0) and np.all(tr.dg(t) > 0)

    def test_by_name(self):
        assert Transform.by_name("nonmono").name == "nonmono"
        with pytest.raises(ConfigError):
            Transform.by_name("cube")

    def test_constant_polynomial_has_zero_derivative(self):
        tr = Transform.polynomial([4.0])
        x = np.linspace(0, 1, 5)
        assert np.array_equal(tr.dg(x), np.zeros(5))
        assert np.array_equal(tr.g(x), np.full(5, 4.0))


class TestFou:
    def test_rho_zero_is_shifted_fbm(self):
        fbm = simulate_fbm(10, 0.3, 1)
        x = build_fou(FouSpec(1.5, 0.0, 7.0, 0.3), fbm)
        np.testing.assert_allclose(x.values, 1.5 + fbm.values, rtol=0, atol=1e-12)

    def test_fixed_point(self):
        x = build_fou(FouSpec(2.0, 0.7, 2.0, 0.3), zero_fbm(8))
        assert np.all(x.values == 2.0)

    def test_ode_decay(self):
        x = build_fou(FouSpec(2.0, 0.2, 0.0, 0.3), zero_fbm(16))
        assert abs(x.values[-1] - 2 * math.exp(-0.2)) < 1e-4
        assert x.values[-1] == pytest.approx(1.637461506155964, abs=1e-4)

    def test_euler_first_order(self):
        levels = np.arange(8, 15)
        err = [
            abs(build_fou(FouSpec(2.0, 0.2, 0.0, 0.3), zero_fbm(L)).values[-1] - 2 * math.exp(-0.2))
            for L in levels
        ]
        slope = np.polyfit(levels, np.log2(err), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.05)

    def test_hurst_mismatch(self):
        with pytest.raises(ConfigError):
            build_fou(FouSpec(0, 1, 0, 0.2), simulate_fbm(4, 0.3, 1))

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            FouSpec(0, -1, 0, 0.3)
        with pytest.raises(DomainError):
            FouSpec(0, 1, 0, 1.0)
        assert FouSpec(0, 1, 0, 0.1).in_rough_regime
        assert not FouSpec(0, 1, 0, 0.7).in_rough_regime


class TestDriftedFbm:
    def test_no_drift(self):
        fbm = simulate_fbm(8, 0.3, 2)
        assert np.array_equal(build_drifted_fbm(0.0, None, fbm).values, fbm.values)

    def test_constant(self):
        fbm = simulate_fbm(8, 0.3, 2)
        x = build_drifted_fbm(1.25, -0.7, fbm)
        assert abs(x.values[-1] - 1.25 - fbm.values[-1] - (-0.7)) < 1e-12

    @pytest.mark.parametrize("H", [0.1, 0.6])
    def test_callback_matches_fou_bitwise(self, H):
        fbm = simulate_fbm(12, H, 3)
        rho, mu = 0.2, 2.0
        x_cb = build_drifted_fbm(2.0, lambda t, x: rho * (mu - x), fbm)
        x_fou = build_fou(FouSpec(2.0, rho, mu, H), fbm)
        assert np.array_equal(x_cb.values, x_fou.values)

    def test_callback_sees_time(self):
        fbm = zero_fbm(10)
        x = build_drifted_fbm(0.0, lambda t, x: 2 * t, fbm)
        # left Riemann sum of 2t on [0, 1]: 1 - 2^-L
        assert x.values[-1] == pytest.approx(1 - 2.0**-10, abs=1e-14)

    def test_non_finite_drift(self):
        with pytest.raises(NumericalError, match="grid index 3"):
            build_drifted_fbm(0.0, lambda t, x: math.inf if t > 0.01 else 0.0, zero_fbm(8))
        with pytest.raises(NumericalError):
            build_drifted_fbm(0.0, math.nan, zero_fbm(4))


class TestIntegrate:
    def test_constant_integrand(self):
        x = DyadicPath(12, np.full(2**12 + 1, 3.0))
        ip = integrate_transform(x, Transform.identity(), 8, 4)
        t = ip.y.t
        assert np.array_equal(ip.y.values, 3.0 * t)

    def test_linear_integrand(self):
        x = DyadicPath.from_function(lambda t: t, 12)
        ip = integrate_transform(x, Transform.identity(), 9, 3)
        np.testing.assert_allclose(ip.y.values, ip.y.t**2 / 2, rtol=1e-14, atol=0)

    def test_exp_integral(self):
        x = DyadicPath.from_function(lambda t: t, 14)
        ip = integrate_transform(x, Transform.exp_two_t(), 10, 4)
        assert abs(ip.y.values[-1] - (math.e**2 - 1) / 2) < 1e-8
        assert ip.y.values[0] == 0.0
        assert ip.y.level == 10

    def test_gprime_integral(self):
        x = DyadicPath.from_function(lambda t: t, 14)
        ip = integrate_transform(x, Transform.square(), 10, 4)
        # int_0^1 (2t)^2 dt = 4/3
        assert ip.gprime_sq_integral == pytest.approx(4 / 3, abs=1e-8)

    def test_level_mismatch(self):
        x = DyadicPath(10, np.zeros(2**10 + 1))
        with pytest.raises(ConfigError):
            integrate_transform(x, Transform.identity(), 8, 4)
        with pytest.raises(ConfigError):
            integrate_transform(x, Transform.identity(), 11, -1)

    def test_exp_strictly_increasing(self):
        x = build_fou(FouSpec(2.0, 0.2, 2.0, 0.1), simulate_fbm(14, 0.1, 8))
        y = integrate_transform(x, Transform.exp_two_t(), 10, 4).y.values
        assert np.all(np.diff(y) > 0)

    @given(st.integers(2, 10), st.integers(0, 4), st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_grid_coherence(self, coarse, extra, seed):
        fine_level = 12
        target = min(coarse + extra, fine_level)
        x = build_drifted_fbm(0.3, None, simulate_fbm(fine_level, 0.3, seed))
        tr = Transform.non_monotone()
        a = integrate_transform(x, tr, target, fine_level - target).y.restrict(coarse)
        b = integrate_transform(x, tr, coarse, fine_level - coarse).y
        assert np.array_equal(a.values, b.values)


class TestRegularity:
    def test_exp_passes(self):
        x = DyadicPath.from_function(lambda t: -3 + t, 8)
        r = check_regularity(integrate_transform(x, Transform.exp_two_t(), 6, 2))
        assert r.ok and r.value > 4 * math.exp(-12) * 0.99

    def test_constant_g_warns(self):
        x = build_drifted_fbm(0.0, None, simulate_fbm(8, 0.3, 1))
        r = check_regularity(integrate_transform(x, Transform.polynomial([2.0]), 6, 2))
        assert not r.ok
        assert r.value == 0.0
        assert "0.000e+00" in r.message

    def test_square_on_fbm(self):
        x = build_drifted_fbm(0.0, None, simulate_fbm(12, 0.3, 5))
        ip = integrate_transform(x, Transform.square(), 8, 4)
        r = check_regularity(ip)
        assert r.ok
        w = x.values
        h = 2.0**-12
        assert r.value == pytest.approx(4 * h * (0.5 * w[0] ** 2 + (w[1:-1] ** 2).sum() + 0.5 * w[-1] ** 2))
