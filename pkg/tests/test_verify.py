"""
Tests for the acceptance suite.
"""
import math

import pytest

from core.periods import diagonal_periods
from core.weierstrass_data import SimplifiedParams
from oh_lab import settings
from oh_lab.verify import Check, Verifier, naive_periods


@pytest.fixture
def verifier():
    """Verifier with reduced sample counts."""
    return Verifier(settings.SOLVER_CONFIG, settings.MESH_CONFIG, quick=True)


class TestNaivePeriods:
    """Test cases for the QUADPACK oracle."""

    def test_diagonal_closed_form(self):
        """The oracle reproduces the elliptic closed forms at alpha = beta."""
        values = naive_periods(SimplifiedParams(1.2, 1.2, 3.0))
        outer, inner = diagonal_periods(1.2, 3.0)
        assert values['I1'] + values['I3'] == pytest.approx(outer, rel=1e-9)
        assert values['I2'] == pytest.approx(inner, rel=1e-9)


class TestChecks:
    """Test cases for individual checks."""

    def test_check_as_dict(self):
        """Non-finite residuals serialize as None."""
        data = Check('oracle', False, math.nan, 1e-6, 'ConvergenceError').as_dict()
        assert data['residual'] is None
        assert data['passed'] is False

    def test_cheap_checks_pass(self, verifier):
        """Published constants and torus identities are reproduced."""
        for name, threshold in (('theta_star_two_ways', 1e-8), ('theta_star_published', 1e-4),
                                ('magic_tau_published', 1e-4), ('balance_hexagonal', 1e-9),
                                ('legendre_relation', 1e-12), ('traizet_beta_2_angle', 1e-10)):
            residual, detail = getattr(verifier, name)()
            assert residual <= threshold, f"{name}: {detail}"

    @pytest.mark.slow
    def test_quick_run(self, verifier):
        """Every acceptance check passes."""
        checks = verifier.run()
        assert len(checks) == 23
        failed = [f"{c.name}: {c.detail}" for c in checks if not c.passed]
        assert not failed
