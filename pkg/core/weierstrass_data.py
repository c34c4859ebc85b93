"""
Parameter domain, Weierstrass 1-forms and Gauss map of the oH octagon.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from core.exceptions import DomainError, PoleError

logger = logging.getLogger(__name__)

BRANCH_RADIUS = 1e-10

ANTIPODAL_TOL = 1e-10

ArrayLike = Union[complex, np.ndarray]


@dataclass
class SurfaceParams:
    """
    Parameters of the Weierstrass data in the half-plane coordinate z.

    Branch points: -t < -a < -1/b < -1/t < 1/t < 1/a < b < t.
    """
    a: float
    b: float
    t: float
    rho: float = 1.0

    def __post_init__(self):
        if not self.t > 1:
            raise DomainError(f"need t > 1, got t={self.t}")
        if not self.rho > 0:
            raise DomainError(f"need rho > 0, got rho={self.rho}")
        if not (0 < 1 / self.t < 1 / self.a < self.b < self.t):
            raise DomainError(
                f"ordering 0 < 1/t < 1/a < b < t violated for a={self.a}, b={self.b}, t={self.t}"
            )

    @property
    def branch_points(self) -> np.ndarray:
        """v1..v8 in increasing order."""
        a, b, t = self.a, self.b, self.t
        return np.array([-t, -a, -1 / b, -1 / t, 1 / t, 1 / a, b, t])


@dataclass
class SimplifiedParams:
    """alpha = a - 1/a, beta = b - 1/b, tau = t - 1/t, with -tau < -alpha < beta < tau."""
    alpha: float
    beta: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError(f"need tau > 0, got tau={self.tau}")
        if not (-self.tau < -self.alpha < self.beta < self.tau):
            raise DomainError(
                f"ordering -tau < -alpha < beta < tau violated for "
                f"alpha={self.alpha}, beta={self.beta}, tau={self.tau}"
            )


@dataclass
class FormVector:
    """Integrand values of (omega1, omega2, omega3) = ((phi2-phi1)/2, i(phi2+phi1)/2, dh)."""
    omega1: ArrayLike
    omega2: ArrayLike
    omega3: ArrayLike

    def null_residual(self) -> ArrayLike:
        """omega1^2 + omega2^2 + omega3^2, zero for a conformal immersion."""
        return self.omega1 ** 2 + self.omega2 ** 2 + self.omega3 ** 2


def _positive_root(zeta: float) -> float:
    """The z > 0 with z - 1/z = zeta, without cancellation for either sign."""
    root = math.sqrt(zeta * zeta + 4.0)
    if zeta >= 0:
        return 0.5 * (zeta + root)
    return 2.0 / (root - zeta)


def simplify(p: SurfaceParams) -> SimplifiedParams:
    """
    Move to the coordinate zeta = z - 1/z, where the branch points are
    -tau < -alpha < beta < tau.

    Args:
        p: Surface parameters; rho is not carried over

    Returns:
        SimplifiedParams with alpha = a - 1/a, beta = b - 1/b, tau = t - 1/t
    """
    return SimplifiedParams(p.a - 1 / p.a, p.b - 1 / p.b, p.t - 1 / p.t)


def unsimplify(s: SimplifiedParams, rho: float = 1.0) -> SurfaceParams:
    """Invert simplify through the positive root of z - 1/z = zeta."""
    return SurfaceParams(_positive_root(s.alpha), _positive_root(s.beta), _positive_root(s.tau), rho)


def _root(d: ArrayLike) -> ArrayLike:
    """Principal square root with the argument of d taken in [0, pi]."""
    d = np.asarray(d, dtype=complex)
    # adding +0.0 turns a signed zero imaginary part into +0.0
    return np.sqrt(d.real + 1j * (d.imag + 0.0))


def _check_branch(z: ArrayLike, points: np.ndarray) -> None:
    distance = np.min(np.abs(np.subtract.outer(np.atleast_1d(z), points)))
    if distance < BRANCH_RADIUS:
        raise PoleError(f"evaluation within {distance:.3g} of a branch point")


def eval_phi(z: ArrayLike, p: SurfaceParams, check: bool = True) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """
    Integrands of phi1, phi2 and dh at z in the closed upper half plane.

    Every factor (z - v_k)^(1/2) is the principal root.

    Raises:
        PoleError: Within 1e-10 of a branch point
    """
    v = p.branch_points
    if check:
        if np.any(np.asarray(z).imag < 0):
            raise DomainError("forms are defined on the closed upper half plane")
        _check_branch(z, v)
    return phi_from_differences([z - vk for vk in v], p.rho)


def phi_from_differences(diffs, rho: float) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """
    phi1, phi2 and dh from the eight differences z - v_k.

    Callers integrating up to a branch point pass the differences computed
    from the exact endpoint so the vanishing factor keeps full precision.
    """
    root = [_root(d) for d in diffs]
    denominator = root[0] * root[3] * root[4] * root[7]
    # (z+a)(z-1/a) over (z+1/b)(z-b)
    ratio = root[1] * root[5] / (root[2] * root[6])
    dh = 1j / denominator
    phi1 = -rho * ratio / denominator
    phi2 = 1.0 / (rho * ratio * denominator)
    return phi1, phi2, dh


def eval_forms(z: ArrayLike, p: SurfaceParams) -> FormVector:
    """
    Integrands of the Weierstrass forms at z.

    Args:
        z: Point(s) with Im z >= 0, away from the branch points
        p: Surface parameters including rho

    Returns:
        FormVector
    """
    phi1, phi2, dh = eval_phi(z, p)
    return FormVector(0.5 * (phi2 - phi1), 0.5j * (phi2 + phi1), dh)


def gauss_map_z(z: ArrayLike, p: SurfaceParams) -> ArrayLike:
    """Gauss map rho i (z-1/a)^(1/2) (z+a)^(1/2) (z+1/b)^(-1/2) (z-b)^(-1/2)."""
    v = p.branch_points
    return p.rho * 1j * _root(z - v[5]) * _root(z - v[1]) / (_root(z - v[2]) * _root(z - v[6]))


def gauss_map(zeta: ArrayLike, s: SimplifiedParams, rho: float) -> ArrayLike:
    """
    Gauss map rho i (zeta + alpha)^(1/2) (zeta - beta)^(-1/2) in the simplified coordinate.

    Raises:
        PoleError: At zeta = beta
    """
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(zeta - s.beta) < BRANCH_RADIUS):
        raise PoleError(f"Gauss map has a pole at zeta = beta = {s.beta}")
    value = rho * 1j * _root(zeta + s.alpha) / _root(zeta - s.beta)
    return value[()] if value.ndim == 0 else value


def antipodal_check(s: SimplifiedParams, rho: float) -> Tuple[bool, Tuple[float, float]]:
    """
    Whether the branched values of the Gauss map are pairwise antipodal.

    Returns:
        Tuple of (antipodal, (residual at zeta = 2i, residual at zeta = +-tau))
    """
    at_imaginary = abs(rho ** 2 * math.sqrt((s.alpha ** 2 + 4) / (s.beta ** 2 + 4)) - 1)
    at_tau = abs(rho ** 2 * math.sqrt((s.tau ** 2 - s.alpha ** 2) / (s.tau ** 2 - s.beta ** 2)) - 1)
    return bool(at_imaginary < ANTIPODAL_TOL and at_tau < ANTIPODAL_TOL), (at_imaginary, at_tau)


def y_normal_point(s: SimplifiedParams, rho: float) -> float:
    """
    The real zeta with G(zeta) = i, where the normal points in the +y direction.

    Lies in (-inf, -alpha) or (beta, inf); infinite when rho = 1.
    """
    r2 = rho * rho
    if r2 == 1.0:
        return math.inf
    return -(s.beta + r2 * s.alpha) / (r2 - 1.0)
