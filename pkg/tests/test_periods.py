"""
Tests for the period integrals and the closed forms on degenerate slices.
"""
import math

import mpmath
import pytest

from core.exceptions import DomainError
from core.periods import (
    Q,
    Qhat_closed,
    Qtilde_closed,
    antidiagonal_periods,
    asymptotic_limits,
    diagonal_periods,
    intersection_residual,
    inverse_quotient_curvature,
    period_residuals,
    periods,
    quotient_slope,
    solve_rho,
    traizet_forms,
    traizet_residual,
)
from core.special_fn import ellK
from core.weierstrass_data import SimplifiedParams
from oh_lab.verify import naive_periods


@pytest.fixture
def generic():
    """Off-diagonal simplified parameters."""
    return SimplifiedParams(0.7, 1.3, 3.5)


class TestPeriods:
    """Test cases for the tanh-sinh period integrals."""

    def test_matches_quadpack(self, generic):
        """All six edge lengths agree with the algebraic-weight oracle."""
        fast = periods(generic).as_dict()
        slow = naive_periods(generic)
        for key, value in slow.items():
            assert fast[key] == pytest.approx(value, rel=1e-9), key

    def test_positive(self, generic):
        """Edge lengths are positive."""
        assert all(value > 0 for value in periods(generic).as_dict().values())

    def test_diagonal_quotient_vanishes(self):
        """alpha = beta solves Q = 0 for every tau."""
        for alpha, tau in ((0.4, 1.0), (1.2, 3.0), (2.0, 25.0)):
            assert abs(Q(SimplifiedParams(alpha, alpha, tau))) < 1e-10

    def test_mirror_swaps_families(self, generic):
        """zeta -> -zeta exchanges I and J and the outer intervals."""
        mirrored = SimplifiedParams(generic.beta, generic.alpha, generic.tau)
        p, m = periods(generic), periods(mirrored)
        assert p.I1 == pytest.approx(m.J3, rel=1e-11)
        assert p.I3 == pytest.approx(m.J1, rel=1e-11)
        assert p.I2 == pytest.approx(m.J2, rel=1e-11)
        assert p.Q == pytest.approx(-m.Q, rel=1e-9)

    def test_degenerate_middle_interval(self):
        """alpha + beta = 0 is rejected by the quadrature path."""
        with pytest.raises(DomainError):
            periods(SimplifiedParams(-1.0, 1.0, 3.0))

    def test_solve_rho_balances_middle_period(self, generic):
        """I2 rho = J2 / rho at the returned rho."""
        pset = periods(generic)
        rho = solve_rho(generic, pset)
        assert rho == pytest.approx(math.sqrt(pset.J2 / pset.I2))
        _, middle = period_residuals(generic, rho, pset)
        assert abs(middle) < 1e-12

    def test_solve_rho_warns_off_locus(self, generic, caplog):
        """solve_rho logs a warning when Q does not vanish."""
        solve_rho(generic)
        assert 'off the period locus' in caplog.text


class TestDiagonal:
    """Test cases for the alpha = beta slice."""

    def test_closed_form_periods(self):
        """The elliptic closed forms agree with quadrature on the diagonal."""
        alpha, tau = 1.2, 3.0
        outer, inner = diagonal_periods(alpha, tau)
        pset = periods(SimplifiedParams(alpha, alpha, tau))
        assert outer == pytest.approx(pset.I1 + pset.I3, rel=1e-9)
        assert inner == pytest.approx(pset.I2, rel=1e-9)
        assert inner == pytest.approx(pset.J2, rel=1e-9)

    def test_qtilde_matches_difference_quotient(self):
        """Q / (beta - alpha) tends to the closed extension."""
        alpha, tau, h = 1.0, 3.0, 1e-4
        closed = Qtilde_closed(alpha, tau)
        oracle = Q(SimplifiedParams(alpha, alpha + h, tau)) / h
        assert oracle == pytest.approx(closed, rel=1e-3)

    def test_qtilde_signs(self):
        """Negative just above the diagonal endpoint and positive for large tau."""
        assert Qtilde_closed(1.0, 1.01) < 0
        assert Qtilde_closed(1.0, 1e3) > 0

    def test_routing_near_diagonal(self):
        """quotient_slope uses the closed form within the degenerate gap."""
        s = SimplifiedParams(1.0, 1.0, 3.0)
        assert quotient_slope(s) == Qtilde_closed(1.0, 3.0)

    def test_intersection_residual_shares_root(self):
        """The elliptic residual and the extension vanish together."""
        from scipy.optimize import brentq
        alpha = 1.0
        tau = brentq(lambda x: Qtilde_closed(alpha, x), 1.01, 1e3, xtol=1e-14)
        assert abs(intersection_residual(alpha, tau)) < 1e-10

    def test_out_of_range(self):
        """alpha must lie below tau."""
        with pytest.raises(DomainError):
            Qtilde_closed(3.0, 2.0)


class TestAntidiagonal:
    """Test cases for the alpha = -beta slice."""

    def test_traizet_forms_agree(self):
        """The three characteristics give the same value."""
        for beta, tau in ((1.0, 3.0), (2.0, 2.5), (0.3, 12.0)):
            forms = traizet_forms(beta, tau)
            scale = (tau ** 2 + 4) * ellK(tau ** 2 / (tau ** 2 + 4))
            assert (max(forms) - min(forms)) / scale < 1e-10

    def test_traizet_form_matches_principal_value(self):
        """The n and n'' forms agree with the mpmath principal value of Pi(n, m), n > 1."""
        for beta, tau in ((1.0, 3.0), (2.0, 2.5), (0.3, 12.0)):
            m = tau ** 2 / (tau ** 2 + 4)
            n = tau ** 2 / (tau ** 2 - beta ** 2)
            expected = float((2 * beta ** 2 - tau ** 2 + 4) * mpmath.ellipk(m)
                             - 2 * (beta ** 2 + 4) * mpmath.re(mpmath.ellippi(n, m)))
            via_n, _, via_n2 = traizet_forms(beta, tau)
            scale = (tau ** 2 + 4) * ellK(m)
            assert abs(via_n - expected) / scale < 1e-9
            assert abs(via_n2 - expected) / scale < 1e-9

    def test_traizet_root_at_hexagonal_torus(self):
        """beta = 2 balances at tau = 2(2 + sqrt 3)."""
        assert abs(traizet_residual(2.0, 2 * (2 + math.sqrt(3)))) < 1e-10

    def test_traizet_residual_signs(self):
        """Positive as tau -> beta+ and negative for large tau."""
        assert traizet_residual(2.0, 2.01) > 0
        assert traizet_residual(2.0, 1e3) < 0

    def test_qhat_one_sided_limit(self):
        """The curvature quotient tends to its closed form from alpha > -beta."""
        beta, tau, h = 1.5, 4.0, 1e-3
        closed = Qhat_closed(beta, tau)
        oracle = inverse_quotient_curvature(SimplifiedParams(-beta + h, beta, tau))
        assert oracle == pytest.approx(closed, rel=1e-2)

    def test_limits_match_quadrature(self):
        """Outer sum and middle slope at alpha = -beta + gap."""
        beta, tau, gap = 1.5, 4.0, 1e-6
        limits = antidiagonal_periods(beta, tau)
        pset = periods(SimplifiedParams(-beta + gap, beta, tau))
        assert pset.I1 + pset.I3 == pytest.approx(limits['outer'], rel=1e-4)
        assert pset.J1 + pset.J3 == pytest.approx(limits['outer'], rel=1e-4)
        assert pset.I2 / gap == pytest.approx(limits['d_inner'], rel=1e-4)

    def test_outer_slope(self):
        """I1+I3 and J1+J3 leave the slice with slopes d_outer and -d_outer."""
        beta, tau, gap = 1.5, 4.0, 1e-5
        limits = antidiagonal_periods(beta, tau)
        pset = periods(SimplifiedParams(-beta + gap, beta, tau))
        assert (pset.I1 + pset.I3 - limits['outer']) / gap == pytest.approx(limits['d_outer'], rel=1e-2)
        assert (pset.J1 + pset.J3 - limits['outer']) / gap == pytest.approx(-limits['d_outer'], rel=1e-2)


class TestAsymptotics:
    """Test cases for tau -> infinity."""

    def test_scaled_periods_converge(self):
        """tau * I2, tau * J2 and tau * (I3 - J3) approach their limits."""
        alpha, beta, tau = 0.7, 1.3, 1e3
        limits = asymptotic_limits(alpha, beta)
        pset = periods(SimplifiedParams(alpha, beta, tau))
        assert tau * pset.I2 == pytest.approx(limits['tau_I2'], rel=1e-3)
        assert tau * pset.J2 == pytest.approx(limits['tau_J2'], rel=1e-3)
        assert tau * (pset.I3 - pset.J3) == pytest.approx(limits['tau_I3_minus_J3'], rel=1e-2)
        assert tau * (pset.I1 - pset.J1) == pytest.approx(limits['tau_I1_minus_J1'], rel=1e-2)

    def test_outer_differences_signed(self):
        """I1 < J1 and I3 > J3 in the limit."""
        limits = asymptotic_limits(0.7, 1.3)
        assert limits['tau_I1_minus_J1'] < 0 < limits['tau_I3_minus_J3']

    def test_middle_tail_ordering(self):
        """For beta > alpha the scaled middle period of I stays below that of J."""
        alpha, beta = 0.7, 1.3
        limits = asymptotic_limits(alpha, beta)
        assert limits['tau_I2'] < limits['tau_J2']
        for tau in (1e3, 1e4):
            pset = periods(SimplifiedParams(alpha, beta, tau))
            assert pset.I2 < pset.J2, tau

    def test_needs_positive_gap(self):
        """alpha + beta <= 0 is rejected."""
        with pytest.raises(DomainError):
            asymptotic_limits(-1.0, 1.0)
