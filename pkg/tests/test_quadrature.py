"""
Tests for tanh-sinh and Gauss-Legendre quadrature.
"""
import math

import numpy as np
import pytest

from core.exceptions import ConvergenceError, DomainError
from core.quadrature import QuadratureSpec, gauss_legendre_panels, tanh_sinh


@pytest.fixture
def spec():
    """Default accuracy controls."""
    return QuadratureSpec()


@pytest.fixture
def legendre_rule():
    """Eight-point reference Gauss-Legendre rule."""
    return np.polynomial.legendre.leggauss(8)


class TestTanhSinh:
    """Test cases for the tanh-sinh rule."""

    def test_inverse_square_root_endpoints(self, spec):
        """Integral of 1/sqrt(x(1-x)) over (0, 1) is pi."""
        result = tanh_sinh(lambda x, d_lo, d_hi: 1.0 / np.sqrt(d_lo * d_hi), 0.0, 1.0, spec)
        assert result.value == pytest.approx(math.pi, abs=1e-11)
        assert result.error < spec.target_abs_tol

    def test_square_root_endpoints(self):
        """Integral of sqrt(1-x^2) over (-1, 1) is pi/2."""
        spec = QuadratureSpec(endpoint_exponents=(0.5, 0.5))
        result = tanh_sinh(lambda x, d_lo, d_hi: np.sqrt(d_lo * d_hi), -1.0, 1.0, spec)
        assert result.value == pytest.approx(math.pi / 2, abs=1e-11)

    def test_vector_integrand(self, spec):
        """Stacked integrands are integrated together."""
        def both(x, d_lo, d_hi):
            return np.stack([1.0 / np.sqrt(d_lo * d_hi), x / np.sqrt(d_lo * d_hi)])

        value = tanh_sinh(both, -1.0, 1.0, spec).value
        assert value.shape == (2,)
        assert value[0] == pytest.approx(math.pi, abs=1e-11)
        assert value[1] == pytest.approx(0.0, abs=1e-11)

    def test_counts_evaluations(self, spec):
        """Levels and evaluations are reported."""
        result = tanh_sinh(lambda x, d_lo, d_hi: np.ones_like(x), 2.0, 5.0, spec)
        assert result.value == pytest.approx(3.0, abs=1e-12)
        assert result.levels >= 3
        assert result.evaluations > 0

    def test_no_convergence(self):
        """Too few levels raises ConvergenceError."""
        with pytest.raises(ConvergenceError):
            tanh_sinh(lambda x, d_lo, d_hi: np.ones_like(x), 0.0, 1.0, QuadratureSpec(max_levels=2))

    def test_empty_interval(self, spec):
        """b <= a is rejected."""
        with pytest.raises(DomainError):
            tanh_sinh(lambda x, d_lo, d_hi: x, 1.0, 1.0, spec)


class TestQuadratureSpec:
    """Test cases for quadrature controls."""

    def test_from_config(self):
        """Config keys map onto the QuadratureSpec fields."""
        spec = QuadratureSpec.from_config({'ABS_TOL': 1e-10, 'MAX_LEVELS': 8, 'ABSCISSA_MAX': 3.5})
        assert spec.target_abs_tol == 1e-10
        assert spec.max_levels == 8
        assert spec.t_max == 3.5

    def test_invalid_values(self):
        """Non-positive tolerance and unsupported exponents are rejected."""
        with pytest.raises(DomainError):
            QuadratureSpec(target_abs_tol=0.0)
        with pytest.raises(DomainError):
            QuadratureSpec(max_levels=1)
        with pytest.raises(DomainError):
            QuadratureSpec(endpoint_exponents=(0.3, -0.5))


class TestGaussLegendrePanels:
    """Test cases for the composite Gauss-Legendre rule."""

    def test_complex_segment(self, legendre_rule):
        """Integral of z^2 from 0 to 1+i is (1+i)^3/3."""
        nodes, weights = legendre_rule
        value = gauss_legendre_panels(lambda z: z ** 2, 0.0, 1 + 1j, 3, nodes, weights)
        assert isinstance(value, complex)
        assert abs(value - (1 + 1j) ** 3 / 3) < 1e-14

    def test_vector_integrand(self, legendre_rule):
        """Leading axes of the integrand are kept."""
        nodes, weights = legendre_rule
        value = gauss_legendre_panels(lambda z: np.stack([np.exp(z), 1 / z]), 1.0, 2j, 16, nodes, weights)
        assert value.shape == (2,)
        assert abs(value[0] - (np.exp(2j) - np.exp(1.0))) < 1e-13
        assert abs(value[1] - (math.log(2) + 0.5j * math.pi)) < 1e-12
