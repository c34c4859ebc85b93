"""
Period integrals of the simplified forms, the quotient Q and its degenerate limits.

All integrals are taken in the coordinate zeta = z - 1/z, where the branch
points sit at -tau < -alpha < beta < tau.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from core.exceptions import DomainError
from core.quadrature import QuadratureSpec, tanh_sinh
from core.special_fn import ellD, ellE, ellEbar, ellK, ellKbar, ellPi
from core.weierstrass_data import SimplifiedParams

logger = logging.getLogger(__name__)

# below this separation the quotients are routed to their closed forms
DEGENERATE_GAP = 1e-8

MIN_INTERVAL = 1e-12

QUOTIENT_TOL = 1e-8


@dataclass
class PeriodSet:
    """
    Edge lengths at rho = 1 over the intervals (-tau, -alpha), (-alpha, beta)
    and (beta, tau). I_k carries the factor sqrt(|zeta+alpha| / |zeta-beta|),
    J_k its reciprocal.
    """
    I1: float
    I2: float
    I3: float
    J1: float
    J2: float
    J3: float

    @property
    def Q_I(self) -> float:
        """(I1 + I3) / I2."""
        return (self.I1 + self.I3) / self.I2

    @property
    def Q_J(self) -> float:
        """(J1 + J3) / J2."""
        return (self.J1 + self.J3) / self.J2

    @property
    def Q(self) -> float:
        """Q_I - Q_J; zero exactly when some rho closes both periods."""
        return self.Q_I - self.Q_J

    def as_dict(self) -> Dict[str, float]:
        """Edge lengths keyed by name."""
        return {
            'I1': self.I1, 'I2': self.I2, 'I3': self.I3,
            'J1': self.J1, 'J2': self.J2, 'J3': self.J3,
        }


def _default_spec() -> QuadratureSpec:
    """Quadrature controls from the settings."""
    from oh_lab.settings import QUADRATURE_CONFIG
    return QuadratureSpec.from_config(QUADRATURE_CONFIG)


def _pair(numerator: np.ndarray, denominator: np.ndarray, rest: np.ndarray) -> np.ndarray:
    """Integrands of I and J sharing the common factor 1/sqrt(rest)."""
    ratio = np.sqrt(numerator / denominator)
    common = 1.0 / np.sqrt(rest)
    return np.stack([ratio * common, common / ratio])


def periods(s: SimplifiedParams, q: Optional[QuadratureSpec] = None) -> PeriodSet:
    """
    Evaluate the six edge lengths by tanh-sinh quadrature.

    Args:
        s: Simplified parameters
        q: Quadrature controls (settings defaults if omitted)

    Returns:
        PeriodSet at rho = 1

    Raises:
        DomainError: If the branch points are not ordered or (-alpha, beta) is degenerate
        ConvergenceError: If an interval fails to converge
    """
    q = q or _default_spec()
    alpha, beta, tau = s.alpha, s.beta, s.tau
    gap = alpha + beta
    if gap < MIN_INTERVAL:
        raise DomainError(f"interval (-alpha, beta) degenerate: alpha+beta={gap:.3g}")
    if not (tau > beta and tau > alpha):
        raise DomainError(f"ordering -tau < -alpha < beta < tau violated: {s}")

    def first(x, d_lo, d_hi):
        # (-tau, -alpha): tau+zeta = d_lo, -(zeta+alpha) = d_hi
        return _pair(d_hi, gap + d_hi, d_lo * (tau + alpha + d_hi) * (x * x + 4.0))

    def second(x, d_lo, d_hi):
        # (-alpha, beta): zeta+alpha = d_lo, beta-zeta = d_hi
        return _pair(d_lo, d_hi, (tau - alpha + d_lo) * (tau - beta + d_hi) * (x * x + 4.0))

    def third(x, d_lo, d_hi):
        # (beta, tau): zeta-beta = d_lo, tau-zeta = d_hi
        return _pair(gap + d_lo, d_lo, (tau + beta + d_lo) * d_hi * (x * x + 4.0))

    i1, j1 = tanh_sinh(first, -tau, -alpha, q).value
    i2, j2 = tanh_sinh(second, -alpha, beta, q).value
    i3, j3 = tanh_sinh(third, beta, tau, q).value
    return PeriodSet(float(i1), float(i2), float(i3), float(j1), float(j2), float(j3))


def Q_I(s: SimplifiedParams) -> float:
    """(I1 + I3) / I2, the x-period quotient of the first form."""
    return periods(s).Q_I


def Q_J(s: SimplifiedParams) -> float:
    """(J1 + J3) / J2, the same quotient for the second form."""
    return periods(s).Q_J


def Q(s: SimplifiedParams) -> float:
    """Quotient Q = (I1+I3)/I2 - (J1+J3)/J2; independent of rho."""
    return periods(s).Q


def solve_rho(s: SimplifiedParams, pset: Optional[PeriodSet] = None) -> float:
    """
    Lopez-Ros factor balancing I2 * rho = J2 / rho.

    Logs a warning when s does not solve Q = 0, since the first period
    condition then stays violated.
    """
    pset = pset or periods(s)
    if abs(pset.Q) > QUOTIENT_TOL:
        logger.warning("solve_rho at %s: Q=%.3g, parameters are off the period locus", s, pset.Q)
    return math.sqrt(pset.J2 / pset.I2)


def period_residuals(s: SimplifiedParams, rho: float, pset: Optional[PeriodSet] = None) -> Tuple[float, float]:
    """Residuals of (I1+I3) rho = (J1+J3)/rho and I2 rho = J2/rho."""
    pset = pset or periods(s)
    return ((pset.I1 + pset.I3) * rho - (pset.J1 + pset.J3) / rho,
            pset.I2 * rho - pset.J2 / rho)


# ---------------------------------------------------------------------------
# Closed forms on the degenerate slices
# ---------------------------------------------------------------------------

def diagonal_periods(alpha: float, tau: float) -> Tuple[float, float]:
    """(I1+I3, I2) at alpha = beta, with I2 = J2 there."""
    if not 0 < alpha < tau:
        raise DomainError(f"need 0 < alpha < tau, got alpha={alpha}, tau={tau}")
    m1 = (alpha ** 2 + 4) / (tau ** 2 + 4)
    m2 = (alpha / tau) ** 2 * (tau ** 2 + 4) / (alpha ** 2 + 4)
    outer = 2.0 / math.sqrt(tau ** 2 + 4) * ellKbar(m1)
    inner = alpha / tau * 2.0 / math.sqrt(alpha ** 2 + 4) * ellK(m2)
    return outer, inner


def Qtilde_closed(alpha: float, tau: float) -> float:
    """
    Continuous extension of Q / (beta - alpha) to the diagonal alpha = beta.

    Args:
        alpha: Common value alpha = beta, 0 <= alpha < tau
        tau: Outer branch point

    Returns:
        The extension value; negative as tau -> alpha+ and positive for large tau
    """
    if not 0 <= alpha < tau:
        raise DomainError(f"need 0 <= alpha < tau, got alpha={alpha}, tau={tau}")
    m1 = (alpha ** 2 + 4) / (tau ** 2 + 4)
    m2 = (alpha / tau) ** 2 * (tau ** 2 + 4) / (alpha ** 2 + 4)
    k2 = ellK(m2)
    bracket = ellKbar(m1) * ellD(m2) - ellEbar(m1) * k2
    prefactor = tau / (tau ** 2 - alpha ** 2) * math.sqrt((tau ** 2 + 4) / (alpha ** 2 + 4))
    return prefactor * bracket / k2 ** 2


def intersection_residual(alpha: float, tau: float) -> float:
    """K'(m1) E(m2) + m2 E'(m1) K(m2) - K'(m1) K(m2), zero on the intersection curve."""
    m1 = (alpha ** 2 + 4) / (tau ** 2 + 4)
    m2 = (alpha / tau) ** 2 * (tau ** 2 + 4) / (alpha ** 2 + 4)
    return ellKbar(m1) * ellE(m2) + m2 * ellEbar(m1) * ellK(m2) - ellKbar(m1) * ellK(m2)


def _traizet_setup(beta: float, tau: float) -> Tuple[float, float, float]:
    if not 0 <= beta < tau:
        raise DomainError(f"need 0 <= beta < tau, got beta={beta}, tau={tau}")
    r2 = tau ** 2 + 4
    m = tau ** 2 / r2
    return r2, m, ellK(m)


def traizet_forms(beta: float, tau: float) -> Tuple[float, float, float]:
    """
    The quantity (2b^2 - tau^2 + 4) K(m) - 2(b^2 + 4) Pi(n, m), m = tau^2/(tau^2+4),
    evaluated through the characteristics n = tau^2/(tau^2-b^2) (principal
    value), n' = m/n and n'' = b^2/(b^2+4). All three agree.

    ellPi evaluates n > 1 through the exchange Pi(n) + Pi(m/n) = K, so the n
    and n' forms are the same computation; only the n'' form is an
    independent check.

    Returns:
        Tuple of the value through n, n' and n''
    """
    r2, m, k = _traizet_setup(beta, tau)
    if beta == 0:
        raise DomainError("characteristics n and n'' degenerate at beta = 0")
    b2 = beta ** 2
    n = tau ** 2 / (tau ** 2 - b2)
    n1 = (tau ** 2 - b2) / r2
    n2 = b2 / (b2 + 4)
    x = tau ** 2 * (b2 + 4) / b2
    via_n = (2 * b2 - tau ** 2 + 4) * k - 2 * (b2 + 4) * ellPi(n, m)
    via_n1 = 2 * (b2 + 4) * ellPi(n1, m) - r2 * k
    via_n2 = (2 * x - r2) * k - 2 * (x - r2) * ellPi(n2, m)
    return via_n, via_n1, via_n2


def traizet_residual(beta: float, tau: float) -> float:
    """
    Normalized Traizet residual [2(b^2+4) Pi(n', m) - (tau^2+4) K(m)] / ((tau^2+4) K(m)).

    Finite down to beta = 0, positive as tau -> beta+ and negative for large tau.
    """
    r2, m, k = _traizet_setup(beta, tau)
    n1 = (tau ** 2 - beta ** 2) / r2
    return (2 * (beta ** 2 + 4) * ellPi(n1, m) - r2 * k) / (r2 * k)


def Qhat_closed(beta: float, tau: float) -> float:
    """
    Limit of (1/Q_I - 1/Q_J) / (alpha + beta)^2 at alpha = -beta.

    Evaluated through the characteristic n' = (tau^2 - beta^2)/(tau^2 + 4),
    which stays inside (0, m).
    """
    r2, m, k = _traizet_setup(beta, tau)
    b4 = beta ** 2 + 4
    form = r2 * k * traizet_residual(beta, tau)
    prefactor = math.pi * beta * math.sqrt(r2) / (8.0 * b4 ** 1.5 * (tau ** 2 - beta ** 2) ** 1.5)
    return prefactor * form / k ** 2


def antidiagonal_periods(beta: float, tau: float) -> Dict[str, float]:
    """
    Limits at alpha = -beta: I1+I3 (= J1+J3) and the alpha-derivatives of I2
    and of I1+I3.
    """
    r2, m, k = _traizet_setup(beta, tau)
    n = tau ** 2 / (tau ** 2 - beta ** 2)
    return {
        'outer': math.sqrt(1 - m) * k,
        'd_inner': 0.5 * math.pi / math.sqrt((tau ** 2 - beta ** 2) * (beta ** 2 + 4)),
        'd_outer': beta * ellPi(n, m) / ((tau ** 2 - beta ** 2) * math.sqrt(r2)),
    }


def quotient_slope(s: SimplifiedParams) -> float:
    """Q / (beta - alpha), routed to the closed form near the diagonal."""
    if abs(s.beta - s.alpha) < DEGENERATE_GAP:
        return Qtilde_closed(0.5 * (s.alpha + s.beta), s.tau)
    return Q(s) / (s.beta - s.alpha)


def inverse_quotient_curvature(s: SimplifiedParams) -> float:
    """(1/Q_I - 1/Q_J) / (alpha + beta)^2, routed to the closed form near alpha = -beta."""
    gap = s.alpha + s.beta
    if abs(gap) < DEGENERATE_GAP:
        return Qhat_closed(0.5 * (s.beta - s.alpha), s.tau)
    pset = periods(s)
    return (1.0 / pset.Q_I - 1.0 / pset.Q_J) / gap ** 2


# ---------------------------------------------------------------------------
# Behaviour as tau -> infinity
# ---------------------------------------------------------------------------

def _half_line(integrand, start: float, q: QuadratureSpec) -> float:
    """Integral of integrand(zeta, zeta - start) over (start, inf) via zeta = start + (1-u)/u."""
    def mapped(u, d_lo, d_hi):
        offset = d_hi / u
        return integrand(start + offset, offset) / (u * u)
    return float(tanh_sinh(mapped, 0.0, 1.0, q).value)


def asymptotic_limits(alpha: float, beta: float, q: Optional[QuadratureSpec] = None) -> Dict[str, float]:
    """
    Limits of tau*I2, tau*J2, tau*(I1-J1) and tau*(I3-J3) as tau -> infinity.

    The outer differences keep a finite limit because the logarithmic
    singularities of I_k and J_k cancel.
    """
    q = q or _default_spec()
    gap = alpha + beta
    if gap <= 0:
        raise DomainError(f"need alpha + beta > 0, got {gap}")

    def middle(x, d_lo, d_hi):
        return _pair(d_lo, d_hi, x * x + 4.0)

    tau_i2, tau_j2 = tanh_sinh(middle, -alpha, beta, q).value

    def upper(zeta, offset):
        return 1.0 / np.sqrt((gap + offset) * offset * (zeta * zeta + 4.0))

    def lower(zeta, offset):
        # mirror image zeta -> -zeta of the left tail (-inf, -alpha)
        return 1.0 / np.sqrt(offset * (gap + offset) * (zeta * zeta + 4.0))

    outer3 = gap * _half_line(upper, beta, q)
    outer1 = -gap * _half_line(lower, alpha, q)
    return {
        'tau_I2': float(tau_i2),
        'tau_J2': float(tau_j2),
        'tau_I1_minus_J1': outer1,
        'tau_I3_minus_J3': outer3,
    }
