"""
Root finding and locus tracing for the period problem and its degenerate limits.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from core.exceptions import BracketError, DegenerateInputError, DomainError
from core.periods import (
    Qtilde_closed,
    periods,
    quotient_slope,
    solve_rho,
    traizet_residual,
)
from core.quadrature import QuadratureSpec, tanh_sinh
from core.special_fn import RhombicTorus, ellE, ellK, wP, wZeta
from core.weierstrass_data import SimplifiedParams, SurfaceParams, simplify, y_normal_point

logger = logging.getLogger(__name__)

# partials below this fraction of their cancelling terms count as zero
NONDEGENERACY_RTOL = 1e-10

BALANCE_TOL = 1e-11


@dataclass
class LocusPoint:
    """
    One solved point of a parameter locus.

    sign_changes counts the changes seen within SCAN_EXTRA scan nodes of the
    first bracket, not over the whole scan range.
    """
    primary_param: float
    solved_param: float
    residual: float
    bracket: Tuple[float, float]
    iterations: int
    sign_changes: int = 1
    converged: bool = True
    message: str = ''
    inputs: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict:
        """Point as a JSON-ready dict with a list bracket."""
        data = asdict(self)
        data['bracket'] = list(self.bracket)
        return data


@dataclass
class BalanceConfig:
    """Diagonal balance configuration p1 = 0, p2 = x T1 + y T2 on the rhombic torus."""
    x: float
    y: float
    theta: float
    residual: float
    nondegenerate: bool

    def as_dict(self) -> Dict:
        """Configuration as a JSON-ready dict."""
        return asdict(self)


@dataclass
class HFamilyPoint:
    """Explicit H-family parameters at one t with their period diagnostics."""
    t: float
    a: float
    b: float
    Q: float
    rho: float
    h_residuals: Tuple[float, float]
    zeta_star: float

    def as_dict(self) -> Dict:
        """Point as a JSON-ready dict."""
        data = asdict(self)
        data['h_residuals'] = list(self.h_residuals)
        return data


def failed_point(primary: float, message: str, inputs: Optional[Dict[str, float]] = None) -> LocusPoint:
    """Unconverged locus point with NaN values and the failure message."""
    return LocusPoint(primary, math.nan, math.nan, (math.nan, math.nan), 0,
                      sign_changes=0, converged=False, message=message, inputs=inputs or {})


# ---------------------------------------------------------------------------
# Rhombic torus: balance equation and angles
# ---------------------------------------------------------------------------

def rhombic_angle(tau: float) -> float:
    """
    Angle of the limit rhombic torus, tan(theta/2) = K'(m)/K(m) with m = tau^2/(tau^2+4).
    """
    if not tau > 0:
        raise DomainError(f"need tau > 0, got {tau}")
    m = tau ** 2 / (tau ** 2 + 4)
    return 2.0 * math.atan(ellK(1 - m) / ellK(m))


@lru_cache(maxsize=1)
def magic_tau() -> float:
    """The tau > 0 with 2E(m) = K(m), m = tau^2/(tau^2+4)."""
    m = brentq(lambda x: 2 * ellE(x) - ellK(x), 0.0, 1 - 1e-14, xtol=1e-15, rtol=1e-15)
    return 2.0 * math.sqrt(m / (1 - m))


def _balance_residual(x: float, torus: RhombicTorus) -> float:
    return (x * torus.eta3 - wZeta(x * torus.T3, torus)).real


def _balance_slope(x: float, torus: RhombicTorus) -> float:
    return (torus.eta3 + torus.T3 * wP(x * torus.T3, torus)).real


def trivial_locus_slope(theta: float) -> float:
    """T3 p(T3/2) + eta3; positive below theta* and zero at theta*."""
    return _balance_slope(0.5, RhombicTorus(theta))


@lru_cache(maxsize=1)
def theta_star() -> float:
    """Angle where the trivial balance locus x = 1/2 becomes degenerate."""
    return brentq(trivial_locus_slope, 1.0, 1.5, xtol=1e-14, rtol=1e-15)


def balance_solve(theta: float) -> BalanceConfig:
    """
    Non-trivial diagonal solution 0 < x < 1/2 of x eta3 = zeta(x T3).

    The residual is convex in x, tends to +inf as x -> 0 and vanishes at
    x = 1/2 with positive slope when theta < theta*, so its minimum on
    (0, 1/2) brackets the root.

    Args:
        theta: Rhombus angle in (0, theta*)

    Returns:
        BalanceConfig with y = x

    Raises:
        DomainError: If theta is not in (0, theta*)
        BracketError: If the minimum of the residual is not negative
    """
    if not 0 < theta < theta_star():
        raise DomainError(f"balance_solve needs 0 < theta < theta* = {theta_star():.10f}, got {theta}")
    torus = RhombicTorus(theta)
    x_lo = 1e-3
    x_min = brentq(_balance_slope, x_lo, 0.5, args=(torus,), xtol=1e-15)
    if _balance_residual(x_min, torus) >= 0:
        raise BracketError(f"balance residual not negative at its minimum for theta={theta}")
    x = brentq(_balance_residual, x_lo, x_min, args=(torus,), xtol=1e-15)
    residual = abs(_balance_residual(x, torus))
    if residual > BALANCE_TOL:
        logger.warning("balance residual %.3g at theta=%.10f exceeds %g", residual, theta, BALANCE_TOL)
    cfg = BalanceConfig(x, x, theta, residual, True)
    cfg.nondegenerate = nondegeneracy_check(cfg)
    return cfg


def _partial_terms(cfg: BalanceConfig) -> Tuple[Tuple[complex, complex], Tuple[complex, complex]]:
    """The two summands of dF/dx and of dF/dy at y = 0."""
    torus = RhombicTorus(cfg.theta)
    p_value = wP(cfg.x * torus.T3, torus)
    return ((torus.eta3, torus.T3 * p_value),
            (torus.eta1 - torus.eta2, (torus.T1 - torus.T2) * p_value))


def nondegeneracy_partials(cfg: BalanceConfig) -> Tuple[float, float]:
    """|dF/dx| and |dF/dy| at y = 0 for the configuration."""
    (x_first, x_second), (y_first, y_second) = _partial_terms(cfg)
    return abs(x_first + x_second), abs(y_first + y_second)


def nondegeneracy_check(cfg: BalanceConfig) -> bool:
    """
    Whether both partials of the balance map are non-zero at the configuration.

    Each partial is a sum of two terms; it counts as zero when it is below
    NONDEGENERACY_RTOL times the larger term. For small angles the y-partial
    is exponentially small (about 6e-15 at theta = 0.1 and exactly 0.0 in
    double precision at theta = 0.05), so at angles of about 0.1 and below the
    check reports False for configurations that are non-degenerate in exact arithmetic.

    Args:
        cfg: Balanced configuration

    Returns:
        True if both partials are resolved as non-zero
    """
    for first, second in _partial_terms(cfg):
        if not abs(first + second) > NONDEGENERACY_RTOL * max(abs(first), abs(second)):
            return False
    return True


def height_fraction(beta: float, tau: float, q: Optional[QuadratureSpec] = None) -> float:
    """
    Height of the singular point at beta in a Traizet limit, as the fraction
    |int_b^t dh| / |int_{1/t}^t dh| of the box height.
    """
    if not 0 <= beta < tau:
        raise DomainError(f"need 0 <= beta < tau, got beta={beta}, tau={tau}")
    r = math.sqrt(tau ** 2 + 4)

    def density(x, d_lo, d_hi):
        return 1.0 / np.sqrt((tau + beta + d_lo) * d_hi * (x * x + 4.0))

    part = float(tanh_sinh(density, beta, tau, q).value)
    return part / (2.0 * ellK(tau ** 2 / r ** 2) / r)


# ---------------------------------------------------------------------------
# H family
# ---------------------------------------------------------------------------

def h_radicand(t: float) -> float:
    """Radicand u^2 - 60u + 132, u = t^2 + 1/t^2, of the H-family parameters."""
    u = t * t + 1 / (t * t)
    return u * u - 60 * u + 132


def h_parameters(t: float) -> Tuple[float, float]:
    """Explicit a(t), b(t) of the Schwarz H family."""
    radicand = h_radicand(t)
    if radicand < 0:
        raise DomainError(f"H-family radicand negative at t={t}")
    numerator = t ** 3 - 15 * t + 15 / t - t ** -3 + (t + 1 / t) * math.sqrt(radicand)
    denominator_a = 2 * (7 * t ** 2 - 10 - t ** -2)
    denominator_b = 2 * (t ** 2 + 10 - 7 * t ** -2)
    if denominator_a == 0 or denominator_b == 0:
        raise DomainError(f"H-family formulas singular at t={t}")
    a = numerator / denominator_a
    b = numerator / denominator_b
    return a, b


def _h_valid(t: float) -> bool:
    if h_radicand(t) < 0:
        return False
    try:
        a, b = h_parameters(t)
    except DomainError:
        return False
    return a > 0 and 0 < 1 / t < 1 / a < b < t


def h_family_branch(t_max: float = 1e3, samples: int = 2000) -> List[Tuple[float, float]]:
    """
    Intervals of t > 1 on which the H-family formulas give admissible parameters.

    Scans a log grid and refines every boundary of the admissible set by
    bisection on the radicand or the ordering.
    """
    grid = np.geomspace(1.0 + 1e-6, t_max, samples)
    valid = [_h_valid(t) for t in grid]
    intervals = []
    start = None
    for i, ok in enumerate(valid):
        if ok and start is None:
            start = grid[0] if i == 0 else _refine_edge(grid[i - 1], grid[i])
        if not ok and start is not None:
            intervals.append((start, _refine_edge(grid[i - 1], grid[i])))
            start = None
    if start is not None:
        intervals.append((start, grid[-1]))
    logger.info("H-family admissible t-intervals: %s", intervals)
    return intervals


def _refine_edge(lo: float, hi: float) -> float:
    """Boundary between admissible and inadmissible t, located by bisection."""
    lo_ok = _h_valid(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _h_valid(mid) == lo_ok:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * hi:
            break
    # return the admissible side
    return lo if lo_ok else hi


# ---------------------------------------------------------------------------
# Bracketing helpers
# ---------------------------------------------------------------------------

def _geometric_scan(func: Callable[[float], float], lower: float, delta: float, upper: float,
                    extra: int) -> Tuple[Optional[Tuple[float, float]], int, int]:
    """
    Evaluate func on lower + delta * 2**(k/2) until the first sign change,
    then on `extra` further nodes to count additional sign changes.

    The count is local: nodes past the `extra` window (a factor of about
    2**(extra/2) in the offset from lower) are never evaluated, so a later
    sign change below `upper` goes unseen.

    Returns:
        (first bracket or None, number of sign changes seen, evaluations)
    """
    bracket = None
    changes = 0
    remaining = None
    k = 0
    x_prev = lower + delta
    f_prev = func(x_prev)
    evaluations = 1
    while True:
        k += 1
        x = lower + delta * 2 ** (k / 2)
        if x > upper or remaining == 0:
            break
        f = func(x)
        evaluations += 1
        if np.sign(f) != np.sign(f_prev) and f_prev != 0:
            changes += 1
            if bracket is None:
                bracket = (x_prev, x)
                remaining = extra
                x_prev, f_prev = x, f
                continue
        if remaining is not None:
            remaining -= 1
        x_prev, f_prev = x, f
    return bracket, changes, evaluations


class LocusSolver:
    """Solves the period problem and traces the loci of its degenerate limits."""

    def __init__(self, config: Dict, quadrature: Optional[QuadratureSpec] = None):
        """
        Initialize solver.

        Args:
            config: Solver configuration dictionary
            quadrature: Quadrature controls for period integrals
        """
        self.config = config
        self.quadrature = quadrature
        self.residual_tol = config.get('RESIDUAL_TOL', 1e-10)
        self.xtol = config.get('XTOL', 1e-12)
        self.t_max = config.get('BRACKET_T_MAX', 1e6)
        self.delta_fraction = config.get('DELTA_FRACTION', 1e-3)
        self.scan_extra = config.get('SCAN_EXTRA', 6)
        self.tau_scan_max = config.get('TAU_SCAN_MAX', 1e4)
        self.isosum_beta_cap = config.get('ISOSUM_BETA_CAP', 8.0)

    def _root(self, func: Callable[[float], float], bracket: Tuple[float, float]) -> Tuple[float, int]:
        root, info = brentq(func, bracket[0], bracket[1], xtol=self.xtol, full_output=True)
        return root, info.iterations

    def _locus_point(self, primary: float, func: Callable[[float], float], lower: float,
                     label: str, inputs: Optional[Dict[str, float]] = None) -> LocusPoint:
        delta = self.delta_fraction * max(lower, 1e-3)
        bracket, changes, _ = _geometric_scan(func, lower, delta, self.tau_scan_max, self.scan_extra)
        if bracket is None:
            raise BracketError(f"{label}: no sign change for tau in ({lower}, {self.tau_scan_max}]")
        if changes > 1:
            logger.warning("%s at %.10g: %d sign changes on the scan grid", label, primary, changes)
        tau, iterations = self._root(func, bracket)
        residual = abs(func(tau))
        converged = residual < self.residual_tol
        message = '' if converged else f"residual {residual:.3g} above {self.residual_tol}"
        return LocusPoint(primary, tau, residual, bracket, iterations, changes, converged, message,
                          inputs or {})

    def quotient(self, s: SimplifiedParams) -> float:
        """Period quotient Q at s with this solver's quadrature controls."""
        return periods(s, self.quadrature).Q

    def solve_t(self, a: float, b: float) -> LocusPoint:
        """
        Solve Q(a, b; t) = 0 for t > max(a, b).

        Args:
            a: Parameter a
            b: Parameter b, with 1/a < b

        Returns:
            LocusPoint with primary_param b and solved_param t; sign_changes
            counts the sign changes up to SCAN_EXTRA grid nodes past the
            first bracket

        Raises:
            DegenerateInputError: If a == b (every t solves)
            DomainError: If 1/a >= b
            BracketError: If no sign change occurs up to T_max
        """
        if a == b:
            raise DegenerateInputError("a = b solves the period problem for every t")
        if not 0 < 1 / a < b:
            raise DomainError(f"need 1/a < b, got a={a}, b={b}")
        alpha, beta = a - 1 / a, b - 1 / b
        lower = max(a, b)

        def func(t: float) -> float:
            return self.quotient(SimplifiedParams(alpha, beta, t - 1 / t))

        bracket, changes, evaluations = _geometric_scan(
            func, lower, self.delta_fraction * lower, self.t_max, self.scan_extra)
        if bracket is None:
            raise BracketError(f"solve_t: Q(a={a}, b={b}; t) has no sign change up to t={self.t_max}")
        if changes > 1:
            logger.warning("solve_t(a=%g, b=%g): %d sign changes, reporting the first", a, b, changes)
        t, iterations = self._root(func, bracket)
        residual = abs(func(t))
        converged = residual < self.residual_tol
        logger.info("solve_t(a=%g, b=%g) -> t=%.12g, |Q|=%.3g after %d scan evaluations",
                    a, b, t, residual, evaluations)
        return LocusPoint(b, t, residual, bracket, iterations, changes, converged,
                          '' if converged else f"residual {residual:.3g} above {self.residual_tol}",
                          {'a': a, 'b': b})

    def intersection_locus(self, alpha: float) -> LocusPoint:
        """tau > alpha on the intersection of the oP family with the oH family."""
        if not alpha > 0:
            raise DomainError(f"need alpha > 0, got {alpha}")
        return self._locus_point(alpha, lambda tau: Qtilde_closed(alpha, tau), alpha,
                                 'intersection_locus')

    def traizet_locus(self, beta: float) -> LocusPoint:
        """tau > beta where the Traizet limit at alpha = -beta is balanced."""
        if not beta > 0:
            raise DomainError(f"need beta > 0, got {beta}")
        return self._locus_point(beta, lambda tau: traizet_residual(beta, tau), beta, 'traizet_locus')

    def traizet_scan(self, tau: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Traizet residuals over n interior points beta of (0, tau) at fixed tau."""
        betas = tau * np.arange(1, n + 1) / (n + 1)
        residuals = np.array([traizet_residual(beta, tau) for beta in betas])
        return betas, residuals

    def h_family(self, t: float) -> HFamilyPoint:
        """
        Explicit H-family parameters with the quotient and the two H conditions.

        Raises:
            DomainError: If the radicand is negative or the ordering 1/t < 1/a < b < t fails
        """
        a, b = h_parameters(t)
        s = simplify(SurfaceParams(a, b, t))
        pset = periods(s, self.quadrature)
        rho = solve_rho(s, pset)
        r2 = rho ** 2
        residuals = (abs(r2 * (s.tau + s.alpha) / (s.tau - s.beta) - 1),
                     abs(r2 * (s.tau - s.alpha) / (s.tau + s.beta) - 1))
        return HFamilyPoint(t, a, b, pset.Q, rho, residuals, y_normal_point(s, rho))

    def isosum_point(self, epsilon: float, beta: float) -> LocusPoint:
        """Solve Q / (beta - alpha) = 0 for tau at alpha = epsilon - beta; failures return a failed point."""
        alpha = epsilon - beta
        inputs = {'epsilon': epsilon, 'alpha': alpha}

        def func(tau: float) -> float:
            return quotient_slope(SimplifiedParams(alpha, beta, tau))

        try:
            return self._locus_point(beta, func, beta, 'isosum_curve', inputs)
        except (BracketError, DomainError) as e:
            logger.warning("isosum_curve: point beta=%g failed: %s", beta, e)
            return failed_point(beta, str(e), inputs)

    def isosum_beta_max(self, epsilon: float) -> float:
        """Largest beta, doubling from 1 up to the configured cap, that still brackets."""
        beta = max(1.0, epsilon)
        while 2 * beta <= self.isosum_beta_cap:
            if not self.isosum_point(epsilon, 2 * beta).converged:
                break
            beta *= 2
        return beta

    def isosum_curve(self, epsilon: float, n_points: int,
                     beta_max: Optional[float] = None) -> List[LocusPoint]:
        """
        Curve tau(beta) of oH surfaces with alpha + beta = epsilon.

        Args:
            epsilon: Fixed sum alpha + beta > 0
            n_points: Number of samples in [epsilon/2, beta_max]
            beta_max: Upper end; chosen adaptively when omitted

        Returns:
            One LocusPoint per sample; failed samples have converged=False
        """
        if not epsilon > 0:
            raise DomainError(f"need epsilon > 0, got {epsilon}")
        beta_max = beta_max or self.isosum_beta_max(epsilon)
        betas = np.linspace(epsilon / 2, beta_max, n_points)
        return [self.isosum_point(epsilon, float(beta)) for beta in betas]
