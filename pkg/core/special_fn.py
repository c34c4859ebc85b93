"""
Complete elliptic integrals and Weierstrass functions on rhombic tori.

Elliptic integrals use the parameter convention m = k**2 throughout:
K(m) = int_0^{pi/2} (1 - m sin^2 t)^(-1/2) dt.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.special import elliprd, elliprf, elliprj

from core.exceptions import DomainError, PoleError

logger = logging.getLogger(__name__)

# K(m) diverges logarithmically; beyond this point it is reported as a domain error
M_CEILING = 1.0 - 1e-15

# Terms of the theta series; |q| <= exp(-pi*sqrt(3)/2) after lattice reduction
THETA_TERMS = 24

POLE_RADIUS = 1e-12


def _check_parameter(m: float, allow_one: bool = False) -> float:
    m = float(m)
    if not math.isfinite(m) or m < 0.0:
        raise DomainError(f"elliptic parameter m={m!r} must satisfy m >= 0")
    if allow_one:
        if m > 1.0:
            raise DomainError(f"elliptic parameter m={m!r} must satisfy m <= 1")
    elif m >= 1.0 or m > M_CEILING:
        raise DomainError(f"elliptic parameter m={m!r} too close to 1, K diverges")
    return m


def ellK(m: float) -> float:
    """
    Complete elliptic integral of the first kind.

    Args:
        m: Parameter in [0, 1)

    Returns:
        K(m) = R_F(0, 1-m, 1)

    Raises:
        DomainError: If m is outside [0, 1 - 1e-15]
    """
    m = _check_parameter(m)
    return float(elliprf(0.0, 1.0 - m, 1.0))


def ellE(m: float) -> float:
    """
    Complete elliptic integral of the second kind.

    Args:
        m: Parameter in [0, 1]

    Returns:
        E(m) = R_F(0, 1-m, 1) - (m/3) R_D(0, 1-m, 1)
    """
    m = _check_parameter(m, allow_one=True)
    if m == 1.0:
        return 1.0
    y = 1.0 - m
    return float(elliprf(0.0, y, 1.0) - m / 3.0 * elliprd(0.0, y, 1.0))


def ellKbar(m: float) -> float:
    """Associated integral K'(m) = K(1 - m)."""
    return ellK(1.0 - float(m))


def ellEbar(m: float) -> float:
    """Associated integral E'(m) = E(1 - m)."""
    return ellE(1.0 - float(m))


def ellD(m: float) -> float:
    """
    The combination D(m) = (K(m) - E(m)) / m, evaluated without cancellation.

    D(0) = pi/4.
    """
    m = _check_parameter(m)
    return float(elliprd(0.0, 1.0 - m, 1.0) / 3.0)


def ellPi(n: float, m: float) -> float:
    """
    Complete elliptic integral of the third kind.

    Pi(n, m) = int_0^{pi/2} dt / ((1 - n sin^2 t) sqrt(1 - m sin^2 t)).
    For n > 1 the integrand has a simple pole on the path and the Cauchy
    principal value is returned, obtained from the exchange relation
    Pi(n, m) + Pi(m/n, m) = K(m).

    Args:
        n: Characteristic, n != 1
        m: Parameter in [0, 1)

    Returns:
        Pi(n, m)

    Raises:
        DomainError: If n == 1 or m is out of range
    """
    m = _check_parameter(m)
    n = float(n)
    if not math.isfinite(n):
        raise DomainError(f"characteristic n={n!r} must be finite")
    if n == 1.0:
        raise DomainError("characteristic n=1 is a divergent case of Pi(n, m)")
    if n > 1.0:
        return ellK(m) - ellPi(m / n, m)
    y = 1.0 - m
    return float(elliprf(0.0, y, 1.0) + n / 3.0 * elliprj(0.0, y, 1.0, 1.0 - n))


def ellPi_transformed(n: float, m: float) -> float:
    """
    Pi(n, m) through the characteristic N = (m - n) / (1 - n).

    Pi(n) = [(m/N) K + (1 - m/N) Pi(N)] / (1 - n). Used as an independent
    evaluation route when n and N lie on opposite sides of the pole.
    """
    m = _check_parameter(m)
    n = float(n)
    if n == 1.0 or n == m:
        raise DomainError(f"transform undefined for n={n}, m={m}")
    big_n = (m - n) / (1.0 - n)
    ratio = m / big_n
    return (ratio * ellK(m) + (1.0 - ratio) * ellPi(big_n, m)) / (1.0 - n)


def singular_value(r: int) -> float:
    """
    Elliptic modulus k_r with K'(k_r^2) / K(k_r^2) = sqrt(r).

    Args:
        r: 1 or 3

    Returns:
        k_1 = 1/sqrt(2) or k_3 = (sqrt(6) - sqrt(2)) / 4

    Raises:
        DomainError: For unsupported r
    """
    if r == 1:
        return 1.0 / math.sqrt(2.0)
    if r == 3:
        return (math.sqrt(6.0) - math.sqrt(2.0)) / 4.0
    raise DomainError(f"singular value k_{r} is not supported (r in {{1, 3}})")


# ---------------------------------------------------------------------------
# Weierstrass functions
# ---------------------------------------------------------------------------

def _reduce_basis(w1: complex, w2: complex) -> Tuple[complex, complex]:
    """Gauss-reduce a lattice basis, keeping Im(w2/w1) > 0."""
    if (w2 / w1).imag < 0:
        w1, w2 = w2, w1
    for _ in range(64):
        k = round((w2 / w1).real)
        w2 = w2 - k * w1
        if abs(w2) < abs(w1) * (1.0 - 1e-15):
            w1, w2 = w2, -w1
        else:
            break
    return w1, w2


def _theta1_derivatives(v: complex, tau: complex) -> Tuple[complex, complex, complex, complex]:
    """theta_1 and its first three derivatives in v, for the nome exp(i pi tau)."""
    n = np.arange(THETA_TERMS)
    odd = 2 * n + 1
    sign = (-1.0) ** n
    phase = np.pi * tau * (n + 0.5) ** 2
    # exponents are combined before exp so a large |Im v| cannot overflow
    up = np.exp(1j * (phase + odd * v))
    down = np.exp(1j * (phase - odd * v))
    s = sign * (up - down) / 1j
    c = sign * (up + down)
    return (
        complex(np.sum(s)),
        complex(np.sum(odd * c)),
        complex(-np.sum(odd ** 2 * s)),
        complex(-np.sum(odd ** 3 * c)),
    )


@dataclass
class RhombicTorus:
    """
    Rhombic torus C / (Z T1 + Z T2) with T1,2 = exp(+-i theta/2).

    Quasi-periods follow zeta(z + T_i) - zeta(z) = eta_i = 2 zeta(T_i / 2).
    """
    theta: float
    T1: complex = field(init=False)
    T2: complex = field(init=False)
    T3: complex = field(init=False)
    eta1: complex = field(init=False)
    eta2: complex = field(init=False)
    eta3: complex = field(init=False)
    _w1: complex = field(init=False, repr=False)
    _w2: complex = field(init=False, repr=False)
    _tau: complex = field(init=False, repr=False)
    _zeta_slope: complex = field(init=False, repr=False)
    _eta_w1: complex = field(init=False, repr=False)
    _eta_w2: complex = field(init=False, repr=False)

    def __post_init__(self):
        theta = float(self.theta)
        if not 0.0 < theta < math.pi:
            raise DomainError(f"rhombus angle theta={theta} must lie in (0, pi)")
        self.theta = theta
        self.T1 = complex(math.cos(theta / 2), math.sin(theta / 2))
        self.T2 = self.T1.conjugate()
        self.T3 = -self.T1 - self.T2

        w1, w2 = _reduce_basis(self.T1, self.T2)
        self._w1, self._w2 = w1, w2
        omega1 = w1 / 2
        self._tau = w2 / w1
        _, d1, _, d3 = _theta1_derivatives(0.0, self._tau)
        eta_half = -(math.pi ** 2) / (12.0 * omega1) * d3 / d1
        self._zeta_slope = eta_half / omega1
        # Legendre relation for the half-periods omega1 = w1/2, omega3 = w2/2
        eta3_half = (eta_half * (w2 / 2) - 1j * math.pi / 2) / omega1
        self._eta_w1 = 2 * eta_half
        self._eta_w2 = 2 * eta3_half

        self.eta1 = self.quasi_period(self.T1)
        self.eta2 = self.quasi_period(self.T2)
        self.eta3 = self.quasi_period(self.T3)
        logger.debug("torus theta=%.12g lattice ratio=%s", theta, self._tau)

    def _coordinates(self, z: complex) -> Tuple[float, float]:
        """Real coordinates of z in the reduced basis."""
        w1, w2 = self._w1, self._w2
        det = w1.real * w2.imag - w1.imag * w2.real
        c1 = (z.real * w2.imag - z.imag * w2.real) / det
        c2 = (w1.real * z.imag - w1.imag * z.real) / det
        return c1, c2

    def quasi_period(self, w: complex) -> complex:
        """Quasi-period of a lattice vector w."""
        c1, c2 = self._coordinates(complex(w))
        n1, n2 = round(c1), round(c2)
        if abs(c1 - n1) > 1e-9 or abs(c2 - n2) > 1e-9:
            raise DomainError(f"{w} is not a lattice vector")
        return n1 * self._eta_w1 + n2 * self._eta_w2

    def _reduce(self, z: complex) -> Tuple[complex, int, int]:
        z = complex(z)
        c1, c2 = self._coordinates(z)
        n1, n2 = round(c1), round(c2)
        z0 = z - n1 * self._w1 - n2 * self._w2
        if abs(z0) < POLE_RADIUS:
            raise PoleError(f"z={z} lies within {POLE_RADIUS} of a lattice point")
        return z0, n1, n2

    def _theta_ratios(self, z0: complex) -> Tuple[complex, complex, complex, complex]:
        scale = math.pi / self._w1
        th, d1, d2, d3 = _theta1_derivatives(scale * z0, self._tau)
        return scale, d1 / th, d2 / th, d3 / th

    def zeta(self, z: complex) -> complex:
        """
        Weierstrass zeta at z, reduced to the fundamental cell and shifted back
        by the quasi-periods of the removed lattice vector.

        Raises:
            PoleError: If z is within 1e-12 of a lattice point
        """
        z0, n1, n2 = self._reduce(z)
        scale, log_der, _, _ = self._theta_ratios(z0)
        value = self._zeta_slope * z0 + scale * log_der
        return value + n1 * self._eta_w1 + n2 * self._eta_w2

    def wp(self, z: complex) -> complex:
        """Weierstrass p at z; periodic, so only the reduced point matters."""
        z0, _, _ = self._reduce(z)
        scale, log_der, r2, _ = self._theta_ratios(z0)
        return -self._zeta_slope + scale ** 2 * (log_der ** 2 - r2)

    def wp_prime(self, z: complex) -> complex:
        """Derivative of p at z from the first three theta log-derivatives."""
        z0, _, _ = self._reduce(z)
        scale, log_der, r2, r3 = self._theta_ratios(z0)
        return scale ** 3 * (3 * log_der * r2 - 2 * log_der ** 3 - r3)


def wZeta(z: complex, torus: RhombicTorus) -> complex:
    """
    Weierstrass zeta function of the rhombic lattice.

    Raises:
        PoleError: If z is within 1e-12 of a lattice point
    """
    return torus.zeta(z)


def wP(z: complex, torus: RhombicTorus) -> complex:
    """Weierstrass p-function, the negative derivative of wZeta."""
    return torus.wp(z)


def wPprime(z: complex, torus: RhombicTorus) -> complex:
    """Derivative of the Weierstrass p-function."""
    return torus.wp_prime(z)
