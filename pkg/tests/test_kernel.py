from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesochain import WindowKernel


@pytest.fixture
def kernel():
    return WindowKernel(eta=0.01)


class TestProfile:
    def test_flat_value(self, kernel):
        # a = 0.5, b = 1.5 gives 1/(a+b) = 0.5 on the flat part
        assert kernel.psi(0.0) == pytest.approx(0.5)
        assert kernel.psi(0.5) == pytest.approx(0.5)
        assert kernel.psi(-0.3) == pytest.approx(0.5)

    def test_support_boundary(self, kernel):
        assert kernel.psi(1.5) == 0.0
        assert kernel.psi(-1.5) == 0.0
        assert kernel.psi(7.0) == 0.0

    def test_linear_branch(self, kernel):
        # (1.0 - 1.5) / (0.25 - 2.25) = 0.25, direct evaluation of the ramp
        assert kernel.psi(1.0) == pytest.approx(0.25)
        assert kernel.psi(-1.0) == pytest.approx(0.25)

    def test_rescaled_peak(self, kernel):
        assert kernel.psi_eta(0.0) == pytest.approx(50.0)

    def test_rescaled_support(self, kernel):
        assert kernel.psi_eta(0.015) == 0.0
        assert kernel.psi_eta(-0.02) == 0.0

    @given(st.floats(-2.0, 2.0))
    def test_even_symmetry(self, xi):
        kernel = WindowKernel(eta=0.01)
        assert kernel.psi(xi) == pytest.approx(kernel.psi(-xi), abs=1e-15)

    def test_continuity_at_breakpoints(self, kernel):
        delta = 1e-9
        for bp in (0.5, 1.5, -0.5, -1.5):
            lo, hi = kernel.psi(bp - delta), kernel.psi(bp + delta)
            assert abs(float(lo) - float(hi)) < 1e-8

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            WindowKernel(eta=0.0)
        with pytest.raises(ValueError):
            WindowKernel(eta=1.5)
        with pytest.raises(ValueError):
            WindowKernel(eta=0.1, a=2.0, b=1.0)


class TestExactIntegral:
    @pytest.mark.parametrize("eta", [0.005, 0.01, 0.05])
    def test_unit_mass(self, eta):
        kernel = WindowKernel(eta=eta)
        r = kernel.support_radius
        assert float(kernel.integrate_psi_eta(-r, r)) == pytest.approx(1.0, abs=1e-14)

    def test_half_mass_by_symmetry(self, kernel):
        r = kernel.support_radius
        assert float(kernel.integrate_psi_eta(0.0, r)) == pytest.approx(0.5, abs=1e-14)

    def test_flat_branch_area(self, kernel):
        # integral over [-a eta, a eta] is 2a/(a+b) = 0.5 by hand integration
        a_eta = 0.5 * 0.01
        assert float(kernel.integrate_psi_eta(-a_eta, a_eta)) == pytest.approx(0.5, abs=1e-14)

    def test_matches_quadrature(self, kernel):
        rng = np.random.default_rng(7)
        for _ in range(20):
            lo = rng.uniform(-0.02, 0.02)
            hi = lo + rng.uniform(0.0, 0.03)
            s = np.linspace(lo, hi, 200001)
            brute = np.trapezoid(kernel.psi_eta(s), s)
            assert float(kernel.integrate_psi_eta(lo, hi)) == pytest.approx(brute, abs=1e-9)

    def test_rejects_reversed_bounds(self, kernel):
        with pytest.raises(ValueError):
            kernel.integrate_psi_eta(1.0, 0.0)

    @given(st.floats(0.002, 0.5))
    @settings(max_examples=30)
    def test_unit_mass_any_eta(self, eta):
        kernel = WindowKernel(eta=eta)
        r = kernel.support_radius
        assert float(kernel.integrate_psi_eta(-r, r)) == pytest.approx(1.0, abs=1e-14)


class TestBondWeight:
    def test_degenerate_segment(self, kernel):
        x = 0.004
        assert float(kernel.bond_weight(x, 0.001, 0.001)) == pytest.approx(
            float(kernel.psi_eta(x - 0.001)))

    def test_outside_support(self, kernel):
        assert float(kernel.bond_weight(0.5, 0.0, 0.001)) == 0.0

    def test_matches_midpoint_quadrature(self, kernel):
        # brute-force oracle: 1e5-point midpoint rule on the s-integral
        rng = np.random.default_rng(3)
        s = (np.arange(100000) + 0.5) / 100000
        for _ in range(10):
            x = rng.uniform(-0.03, 0.03)
            q_left = rng.uniform(-0.01, 0.01)
            q_right = q_left + rng.uniform(1e-5, 0.02)
            brute = float(np.mean(kernel.psi_eta(x - s * q_right - (1 - s) * q_left)))
            exact = float(kernel.bond_weight(x, q_left, q_right))
            if brute > 0:
                assert abs(exact - brute) / brute < 1e-8
            else:
                assert exact == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(-0.03, 0.03), st.floats(-0.01, 0.01), st.floats(1e-6, 0.02))
    @settings(max_examples=50)
    def test_swap_symmetry(self, x, q_left, gap):
        kernel = WindowKernel(eta=0.01)
        q_right = q_left + gap
        forward = float(kernel.bond_weight(x, q_left, q_right))
        swapped = float(kernel.bond_weight(x, q_right, q_left))
        assert forward == pytest.approx(swapped, rel=1e-12, abs=1e-12)

    def test_vectorized(self, kernel):
        x = np.linspace(-0.02, 0.02, 11)
        w = kernel.bond_weight(x, -0.001, 0.001)
        assert w.shape == (11,)
        assert np.all(w >= 0.0)
