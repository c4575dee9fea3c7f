import math

import numpy as np
import pytest
from scipy import integrate

from phasefront import CallbackSource, GaussianSpikeSource, LogisticBeamSource, source_value
from phasefront.sources import deposited_energy, deposited_energy_exact

PAPER = LogisticBeamSource(
    amplitude=59.44, x_edge=0.07, t_edge=1.0, steepness_x=100.0, steepness_t=100.0
)


class TestSourceValue:
    def test_spatial_midpoint_long_before_cutoff(self):
        # q2(-inf..) ~ 1, so the value at the spatial edge is half amplitude
        assert source_value(PAPER, 0.07, -50.0) == pytest.approx(59.44 / 2, abs=1e-9)

    def test_double_midpoint(self):
        assert source_value(PAPER, 0.07, 1.0) == pytest.approx(59.44 / 4, abs=1e-9)
        assert source_value(PAPER, 0.07, 1.0) == pytest.approx(14.86, abs=1e-9)

    def test_deep_tail_underflows_to_zero(self):
        # exp(100 * 0.43) ~ 5e18, so the value is ~1e-17 and must not be NaN
        val = source_value(PAPER, 0.5, 0.0)
        assert 0.0 <= val < 1e-12

    def test_bounds_everywhere(self, rng):
        x = rng.uniform(-10, 10, 1000)
        t = rng.uniform(-10, 10, 1000)
        vals = source_value(PAPER, x, t)
        assert np.all(vals >= 0.0)
        assert np.all(vals <= PAPER.amplitude)

    def test_monotone_non_increasing(self):
        x = np.linspace(-2.0, 3.0, 1000)
        vals = PAPER.values(x, 0.5)
        assert np.all(np.diff(vals) <= 0)
        t = np.linspace(-2.0, 3.0, 1000)
        in_time = np.array([source_value(PAPER, 0.05, ti) for ti in t])
        assert np.all(np.diff(in_time) <= 0)

    def test_finite_out_to_1e6(self):
        for z in (-1e6, -1e3, 0.0, 1e3, 1e6):
            assert np.isfinite(source_value(PAPER, z, z))

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            LogisticBeamSource(amplitude=-1.0)
        with pytest.raises(ValueError):
            LogisticBeamSource(amplitude=1.0, steepness_x=0.0)


class TestDepositedEnergy:
    def test_zero_amplitude(self):
        src = LogisticBeamSource(amplitude=0.0)
        assert deposited_energy(src, (0, 1), (0, 3)) == 0.0

    def test_quadrature_matches_closed_form(self):
        val = deposited_energy(PAPER, (0.0, 1.0), (0.0, 3.0))
        oracle = deposited_energy_exact(PAPER, (0.0, 1.0), (0.0, 3.0))
        assert val == pytest.approx(oracle, rel=1e-9)
        # sanity: the box estimate amplitude * x_edge * t_edge is close
        assert val == pytest.approx(59.44 * 0.07 * 1.0, rel=0.05)

    def test_sharp_edge_limit_is_box_integral(self):
        sharp = LogisticBeamSource(
            amplitude=2.0, x_edge=0.3, t_edge=0.5, steepness_x=1e4, steepness_t=1e4
        )
        val = deposited_energy(sharp, (0.0, 1.0), (0.0, 2.0))
        assert val == pytest.approx(2.0 * 0.3 * 0.5, rel=0.01)

    def test_raw_double_quadrature_agrees(self):
        # small, smooth case where plain dblquad is reliable
        src = LogisticBeamSource(
            amplitude=1.5, x_edge=0.4, t_edge=0.6, steepness_x=8.0, steepness_t=6.0
        )
        oracle, _ = integrate.dblquad(
            lambda t, x: source_value(src, x, t), 0.0, 1.0, 0.0, 2.0
        )
        assert deposited_energy(src, (0.0, 1.0), (0.0, 2.0)) == pytest.approx(
            oracle, rel=1e-8
        )


class TestCallbackSource:
    def test_vectorized_callback(self):
        src = CallbackSource(lambda x, t: 2.0 * np.asarray(x) + t)
        assert src.values(np.array([1.0, 2.0]), 0.5) == pytest.approx([2.5, 4.5])

    def test_scalar_only_callback_falls_back(self):
        src = CallbackSource(lambda x, t: math.sin(x) + t)
        out = src.values(np.array([0.0, math.pi / 2]), 1.0)
        assert out == pytest.approx([1.0, 2.0])


class TestGaussianSpikeSource:
    def test_total_energy_normalization(self):
        src = GaussianSpikeSource(total_energy=0.8, radius=0.1, center_time=0.0, duration=0.002)

        def integrand(t, r):
            return 2.0 * np.pi * r * src.values(r, t)

        total, _ = integrate.dblquad(integrand, 0.0, 1.0, -0.05, 0.05)
        assert total == pytest.approx(0.8, rel=1e-6)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            GaussianSpikeSource(total_energy=1.0, radius=0.0, center_time=0.0, duration=0.01)
