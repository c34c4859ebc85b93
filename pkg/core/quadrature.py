"""
Tanh-sinh (double exponential) quadrature for Schwarz-Christoffel integrands.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from core.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# integrand(x, d_lo, d_hi) -> values at the nodes; d_lo = x - a and d_hi = b - x
# are passed exactly so factors vanishing at an endpoint keep full precision
Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

ALLOWED_EXPONENTS = (-0.5, 0.5)


@dataclass
class QuadratureSpec:
    """Accuracy controls for one interval integration."""
    target_abs_tol: float = 1e-12
    max_levels: int = 12
    endpoint_exponents: Tuple[float, float] = (-0.5, -0.5)
    t_max: float = 4.0

    def __post_init__(self):
        if not self.target_abs_tol > 0:
            raise DomainError(f"target_abs_tol must be positive, got {self.target_abs_tol}")
        if self.max_levels < 2:
            raise DomainError(f"max_levels must be at least 2, got {self.max_levels}")
        for exponent in self.endpoint_exponents:
            if exponent not in ALLOWED_EXPONENTS:
                raise DomainError(f"endpoint exponent {exponent} not in {ALLOWED_EXPONENTS}")

    @classmethod
    def from_config(cls, config: Dict) -> 'QuadratureSpec':
        return cls(
            target_abs_tol=config.get('ABS_TOL', 1e-12),
            max_levels=config.get('MAX_LEVELS', 12),
            t_max=config.get('ABSCISSA_MAX', 4.0),
        )


@dataclass
class QuadratureResult:
    """Value of a (possibly vector valued) integral with its error estimate."""
    value: Union[float, np.ndarray]
    error: float
    levels: int
    evaluations: int


def _nodes(half_width: float, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Endpoint distances and weights of the tanh-sinh map at abscissae t."""
    u = 0.5 * math.pi * np.sinh(t)
    d_lo = half_width * 2.0 / (1.0 + np.exp(-2.0 * u))
    d_hi = half_width * 2.0 / (1.0 + np.exp(2.0 * u))
    weights = half_width * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    return d_lo, d_hi, weights


def _tail_bound(integrand: Integrand, a: float, b: float, spec: QuadratureSpec) -> float:
    """Mass beyond the outermost nodes, for integrands behaving like d**e at each end."""
    half_width = 0.5 * (b - a)
    d_lo, d_hi, _ = _nodes(half_width, np.array([-spec.t_max, spec.t_max]))
    x = np.array([a + d_lo[0], b - d_hi[1]])
    values = np.abs(np.asarray(integrand(x, d_lo, d_hi)))
    values = values.reshape(-1, 2).max(axis=0)
    lo_exp, hi_exp = spec.endpoint_exponents
    return float(values[0] * d_lo[0] / (1.0 + lo_exp) + values[1] * d_hi[1] / (1.0 + hi_exp))


def tanh_sinh(integrand: Integrand, a: float, b: float,
              spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """
    Integrate over (a, b) with the tanh-sinh rule, halving the step until two
    successive levels agree to spec.target_abs_tol.

    Args:
        integrand: Vectorized callable integrand(x, d_lo, d_hi); may return an
            array whose last axis runs over the nodes
        a: Lower limit
        b: Upper limit, b > a
        spec: Accuracy controls

    Returns:
        QuadratureResult

    Raises:
        DomainError: If the interval is empty
        ConvergenceError: If max_levels refinements do not converge
    """
    spec = spec or QuadratureSpec()
    if not b > a:
        raise DomainError(f"empty integration interval ({a}, {b})")
    half_width = 0.5 * (b - a)

    def contribution(t: np.ndarray) -> Tuple[np.ndarray, int]:
        d_lo, d_hi, weights = _nodes(half_width, t)
        keep = (d_lo > 0) & (d_hi > 0) & (weights > 0)
        d_lo, d_hi, weights = d_lo[keep], d_hi[keep], weights[keep]
        x = np.where(d_lo <= d_hi, a + d_lo, b - d_hi)
        values = np.asarray(integrand(x, d_lo, d_hi))
        return np.sum(values * weights, axis=-1), int(keep.sum())

    h = 1.0
    n_half = int(math.ceil(spec.t_max / h))
    total, evaluations = contribution(h * np.arange(-n_half, n_half + 1))
    estimate = h * total
    for level in range(1, spec.max_levels + 1):
        h *= 0.5
        n_half = int(math.ceil(spec.t_max / h))
        odd = np.arange(-n_half + 1, n_half, 2)
        new_sum, count = contribution(h * odd)
        total = total + new_sum
        evaluations += count
        previous, estimate = estimate, h * total
        error = float(np.max(np.abs(estimate - previous)))
        if level >= 3 and error < spec.target_abs_tol:
            tail = _tail_bound(integrand, a, b, spec)
            if tail > spec.target_abs_tol:
                logger.warning("tanh-sinh on (%.6g, %.6g): truncated endpoint mass %.3g exceeds tolerance",
                               a, b, tail)
            logger.debug("tanh-sinh on (%.6g, %.6g) converged at level %d, error %.3g",
                         a, b, level, error)
            return QuadratureResult(estimate, error, level, evaluations)
    raise ConvergenceError(
        f"tanh-sinh on ({a}, {b}) did not reach {spec.target_abs_tol} after "
        f"{spec.max_levels} levels (last change {error:.3g})"
    )


def gauss_legendre_panels(integrand: Callable[[np.ndarray], np.ndarray], a: complex, b: complex,
                          panels: int, nodes: np.ndarray, weights: np.ndarray) -> Union[complex, np.ndarray]:
    """
    Composite Gauss-Legendre rule for a smooth integrand along the straight
    segment from a to b (complex endpoints).

    Args:
        integrand: Vectorized callable of the path point; may return an array
            whose last axis runs over the points
        a: Start point
        b: End point
        panels: Number of equal panels
        nodes: Reference nodes on (-1, 1)
        weights: Reference weights

    Returns:
        The path integral, a complex or an array of the integrand's leading shape
    """
    edges = a + (b - a) * np.linspace(0.0, 1.0, panels + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * (edges[1:] - edges[:-1])
    points = (mids[:, None] + halves[:, None] * nodes[None, :]).ravel()
    values = np.asarray(integrand(points))
    values = values.reshape(values.shape[:-1] + (panels, nodes.size))
    total = np.sum(halves[:, None] * weights[None, :] * values, axis=(-2, -1))
    return complex(total) if total.ndim == 0 else total
