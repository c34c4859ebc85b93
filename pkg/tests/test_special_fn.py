"""
Tests for elliptic integrals and Weierstrass functions.
"""
import math

import mpmath
import pytest

from core.exceptions import DomainError, PoleError
from core.special_fn import (
    RhombicTorus,
    ellD,
    ellE,
    ellEbar,
    ellK,
    ellKbar,
    ellPi,
    ellPi_transformed,
    singular_value,
    wP,
    wPprime,
    wZeta,
)


@pytest.fixture
def parameters():
    """Elliptic parameters spread over [0, 1)."""
    return [0.0, 0.1, 0.5, 0.9, 0.999999]


@pytest.fixture
def torus():
    """Rhombic torus with a generic angle."""
    return RhombicTorus(1.0)


class TestEllipticIntegrals:
    """Test cases for the complete elliptic integrals."""

    def test_first_kind_matches_mpmath(self, parameters):
        """K agrees with mpmath to near machine precision."""
        for m in parameters:
            assert ellK(m) == pytest.approx(float(mpmath.ellipk(m)), rel=1e-14)

    def test_second_kind_matches_mpmath(self, parameters):
        """E agrees with mpmath, including E(1) = 1."""
        for m in parameters:
            assert ellE(m) == pytest.approx(float(mpmath.ellipe(m)), rel=1e-14)
        assert ellE(1.0) == 1.0

    def test_zero_parameter(self):
        """K(0) = E(0) = pi/2."""
        assert ellK(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
        assert ellE(0.0) == pytest.approx(math.pi / 2, rel=1e-15)

    def test_associated_integrals(self):
        """K' and E' are K and E at the complementary parameter."""
        assert ellKbar(0.3) == pytest.approx(ellK(0.7), rel=1e-15)
        assert ellEbar(0.3) == pytest.approx(ellE(0.7), rel=1e-15)

    def test_legendre_relation(self):
        """E K' + E' K - K K' = pi/2."""
        for m in (0.2, 0.5, 0.8):
            value = ellE(m) * ellKbar(m) + ellEbar(m) * ellK(m) - ellK(m) * ellKbar(m)
            assert value == pytest.approx(math.pi / 2, abs=1e-13)

    def test_D_combination(self):
        """D(m) = (K - E)/m and D(0) = pi/4."""
        assert ellD(0.0) == pytest.approx(math.pi / 4, rel=1e-15)
        assert ellD(0.5) == pytest.approx((ellK(0.5) - ellE(0.5)) / 0.5, rel=1e-13)

    def test_parameter_out_of_range(self):
        """K rejects m >= 1 and negative m."""
        with pytest.raises(DomainError):
            ellK(1.0)
        with pytest.raises(DomainError):
            ellK(-0.1)
        with pytest.raises(DomainError):
            ellE(1.5)


class TestThirdKind:
    """Test cases for Pi(n, m)."""

    def test_matches_mpmath_below_pole(self):
        """Pi agrees with mpmath for n < 1, including negative n."""
        for n, m in ((0.3, 0.5), (-0.7, 0.5), (0.9, 0.2), (-5.0, 0.8)):
            assert ellPi(n, m) == pytest.approx(float(mpmath.ellippi(n, m)), rel=1e-13)

    def test_principal_value_above_pole(self):
        """For n > 1 the principal value equals the real part of the continuation."""
        for n, m in ((1.5, 0.5), (4.0, 0.9)):
            expected = float(mpmath.re(mpmath.ellippi(n, m)))
            assert ellPi(n, m) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_zero_characteristic(self):
        """Pi(0, m) = K(m)."""
        assert ellPi(0.0, 0.4) == pytest.approx(ellK(0.4), rel=1e-15)

    def test_characteristic_equal_to_parameter(self):
        """Pi(m, m) = E(m) / (1 - m)."""
        assert ellPi(0.4, 0.4) == pytest.approx(ellE(0.4) / 0.6, rel=1e-12)

    def test_small_characteristic(self):
        """The slope of Pi in n at n = 0 is D(m)."""
        n, m = 1e-6, 0.5
        assert (ellPi(n, m) - ellK(m)) / n == pytest.approx(ellD(m), rel=1e-4)

    def test_transformed_route(self):
        """The characteristic transform agrees with the direct evaluation."""
        for n, m in ((-0.7, 0.5), (0.2, 0.5), (0.8, 0.5)):
            assert ellPi_transformed(n, m) == pytest.approx(ellPi(n, m), rel=1e-11)

    def test_pole_rejected(self):
        """n = 1 is divergent."""
        with pytest.raises(DomainError):
            ellPi(1.0, 0.5)


class TestSingularValues:
    """Test cases for singular moduli."""

    def test_ratio_of_periods(self):
        """K'/K = sqrt(r) at k_r."""
        for r in (1, 3):
            m = singular_value(r) ** 2
            assert ellKbar(m) / ellK(m) == pytest.approx(math.sqrt(r), rel=1e-13)

    def test_unsupported(self):
        """Only r in {1, 3} is tabulated."""
        with pytest.raises(DomainError):
            singular_value(2)


class TestRhombicTorus:
    """Test cases for Weierstrass functions on rhombic tori."""

    def test_periods_are_rhombic(self, torus):
        """T1, T2 are unit vectors at +-theta/2 and T3 closes the triangle."""
        assert abs(torus.T1) == pytest.approx(1.0)
        assert torus.T2 == pytest.approx(torus.T1.conjugate())
        assert torus.T1 + torus.T2 + torus.T3 == pytest.approx(0.0, abs=1e-15)

    def test_legendre_relation(self, torus):
        """eta2 T1 - eta1 T2 = 2 pi i."""
        value = torus.eta2 * torus.T1 - torus.eta1 * torus.T2
        assert abs(value - 2j * math.pi) < 1e-12

    def test_quasi_periodicity(self, torus):
        """zeta(z + T) - zeta(z) = eta for each period."""
        for z in (0.31 + 0.17j, -0.2 + 0.45j):
            for period, eta in ((torus.T1, torus.eta1), (torus.T2, torus.eta2), (torus.T3, torus.eta3)):
                assert abs(wZeta(z + period, torus) - wZeta(z, torus) - eta) < 1e-11

    def test_eta_sum(self, torus):
        """eta1 + eta2 + eta3 = 0."""
        assert abs(torus.eta1 + torus.eta2 + torus.eta3) < 1e-11

    def test_relations_across_angles(self):
        """The eta sum and the Legendre relation hold for thin, hexagonal and near-critical tori."""
        for theta in (0.5, math.pi / 3, 1.0, 1.23):
            torus = RhombicTorus(theta)
            assert abs(torus.eta1 + torus.eta2 + torus.eta3) < 1e-11, theta
            value = torus.eta2 * torus.T1 - torus.eta1 * torus.T2
            assert abs(value - 2j * math.pi) < 1e-11, theta

    def test_zeta_real_along_T3(self):
        """The lattice is closed under conjugation, so zeta is real on real multiples of T3."""
        for theta in (0.5, math.pi / 3, 1.0, 1.23):
            torus = RhombicTorus(theta)
            assert torus.T3.imag == 0.0
            for x in (0.1, 0.37, 0.5, 0.83, 1.7):
                assert abs(wZeta(x * torus.T3, torus).imag) < 1e-12, (theta, x)

    def test_laurent_expansion(self, torus):
        """zeta(z) ~ 1/z and p(z) ~ 1/z^2 near the origin."""
        z = 1e-3 * (1 + 1j)
        assert abs(wZeta(z, torus) - 1 / z) < 1e-4
        assert abs(wP(z, torus) - 1 / z ** 2) < 1e-4

    def test_derivatives_by_finite_difference(self, torus):
        """-zeta' = p and p' matches a central difference."""
        z, h = 0.3 + 0.2j, 1e-5
        zeta_slope = (wZeta(z + h, torus) - wZeta(z - h, torus)) / (2 * h)
        p_slope = (wP(z + h, torus) - wP(z - h, torus)) / (2 * h)
        assert abs(-zeta_slope - wP(z, torus)) < 1e-7
        assert abs(p_slope - wPprime(z, torus)) < 1e-6

    def test_matches_mpmath_theta_series(self, torus):
        """p agrees with an independent mpmath lattice evaluation via theta functions."""
        z = 0.27 + 0.11j
        w1, w2 = torus.T1, torus.T2
        if (w2 / w1).imag < 0:
            w1, w2 = w2, w1
        tau = w2 / w1
        q = mpmath.exp(1j * mpmath.pi * tau)
        v = mpmath.pi * z / w1
        # p(z) = (pi/w1)^2 [ -(log theta1)''(v) ] - 2 eta1/w1 with eta1 from theta1'''/theta1'
        log2 = mpmath.diff(lambda x: mpmath.log(mpmath.jtheta(1, x, q)), v, 2)
        t1 = mpmath.jtheta(1, 0, q, 1)
        t3 = mpmath.jtheta(1, 0, q, 3)
        eta_half = -(mpmath.pi ** 2) * t3 / (12 * (w1 / 2) * t1)
        expected = (mpmath.pi / w1) ** 2 * (-log2) - eta_half / (w1 / 2)
        assert abs(wP(z, torus) - complex(expected)) < 1e-9

    def test_pole(self, torus):
        """Evaluation at a lattice point raises PoleError."""
        with pytest.raises(PoleError):
            wZeta(torus.T1, torus)

    def test_angle_out_of_range(self):
        """theta must lie in (0, pi)."""
        with pytest.raises(DomainError):
            RhombicTorus(0.0)
        with pytest.raises(DomainError):
            RhombicTorus(math.pi)
