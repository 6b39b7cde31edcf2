"""Spectral function of a coupling: evaluation, classification, Szego data.

lambda(theta) = sum_k V_k cos(k . theta) is the Fourier symbol of V. In 1D,
z^{R-1} lambda(z) is an ordinary polynomial of degree 2(R-1); its roots on
the unit circle decide whether the chain is critical.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import fft, stats

from src.config import get_settings, resolve_tolerances
from src.config.settings import Tolerances
from src.core.errors import IllConditionedRoots, UnsupportedDimension
from src.core.lattice_model import CouplingSpec
from src.core.schemas import RootInfo, SpectralClassification
from src.utils.logger import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi
_NEWTON_STEPS = 30


def spectral_eval(spec: CouplingSpec, theta) -> Union[float, np.ndarray]:
    """lambda(theta); for d > 1 the last axis of ``theta`` holds the d angles."""
    theta = np.asarray(theta, dtype=float)
    if spec.dimension == 1:
        theta = theta[..., np.newaxis]
    values = np.cos(theta @ spec.lags.T.astype(float)) @ spec.values
    return float(values) if values.ndim == 0 else values


def spectral_derivative(spec: CouplingSpec, theta, order: int) -> Union[float, np.ndarray]:
    """Exact n-th derivative of a 1D spectral function."""
    _require_1d(spec, "spectral_derivative")
    theta = np.asarray(theta, dtype=float)[..., np.newaxis]
    k = spec.lags[:, 0].astype(float)
    values = np.cos(theta * k + order * math.pi / 2) @ (spec.values * k ** order)
    return float(values) if values.ndim == 0 else values


def _require_1d(spec: CouplingSpec, operation: str) -> None:
    if spec.dimension != 1:
        raise UnsupportedDimension(f"{operation} is defined for 1D chains only (got d={spec.dimension})")


def laurent_coefficients(spec: CouplingSpec) -> np.ndarray:
    """Ascending coefficients of z^{R-1} lambda(z)."""
    _require_1d(spec, "laurent_coefficients")
    shift = spec.range - 1
    coefficients = np.zeros(2 * shift + 1)
    for lag, value in spec.coefficients:
        coefficients[lag[0] + shift] = value
    return coefficients


def symbol_maximum(spec: CouplingSpec, points: int = 4096) -> float:
    theta = TWO_PI * np.arange(points) / points
    return float(np.max(spectral_eval(spec, theta)))


def _cluster_angles(angles: np.ndarray, tolerance: float) -> List[np.ndarray]:
    """Single-linkage clustering of angles on the circle."""
    if angles.size == 0:
        return []
    ordered = np.sort(angles)
    clusters = [[ordered[0]]]
    for angle in ordered[1:]:
        if angle - clusters[-1][-1] < tolerance:
            clusters[-1].append(angle)
        else:
            clusters.append([angle])
    if len(clusters) > 1 and clusters[0][0] + TWO_PI - clusters[-1][-1] < tolerance:
        clusters[0] = [a - TWO_PI for a in clusters.pop()] + clusters[0]
    return [np.array(c) for c in clusters]


def _refine_angle(spec: CouplingSpec, angle: float, order: int) -> float:
    """Newton on the odd derivative lambda^{(order-1)}, which has a simple root."""
    for _ in range(_NEWTON_STEPS):
        curvature = spectral_derivative(spec, angle, order)
        if curvature == 0.0:
            break
        step = spectral_derivative(spec, angle, order - 1) / curvature
        angle -= step
        if abs(step) < 1e-15:
            break
    return angle


def _vanishing_order(spec: CouplingSpec, angle: float, tolerance: float, limit: int) -> int:
    """Smallest n with lambda^{(n)}(angle) clearly nonzero."""
    k = np.abs(spec.lags[:, 0]).astype(float)
    for n in range(limit + 1):
        scale = float(np.abs(spec.values) @ k ** n)
        if abs(spectral_derivative(spec, angle, n)) > tolerance * scale:
            return n
    return limit + 1


def classify(spec: CouplingSpec, tolerances: Optional[Tolerances] = None) -> SpectralClassification:
    """Regular/Singular verdict from the unit-circle roots of z^{R-1} lambda(z).

    Raises:
        UnsupportedDimension: for d > 1.
        IllConditionedRoots: when the roots cannot be grouped unambiguously.
    """
    _require_1d(spec, "classify")
    tol = resolve_tolerances(tolerances)
    coefficients = laurent_coefficients(spec)
    if coefficients.size == 1:
        return SpectralClassification(kind="Regular")

    roots = P.polyroots(coefficients)
    near_circle = roots[np.abs(np.abs(roots) - 1.0) < tol.root_radius]
    angles = np.mod(np.angle(near_circle), TWO_PI)
    top = symbol_maximum(spec)
    if angles.size:
        angles = angles[np.atleast_1d(spectral_eval(spec, angles)) < tol.root_value * top]

    clusters = _cluster_angles(angles, tol.root_cluster)
    found: List[Tuple[float, int]] = []
    for members in clusters:
        if members.size % 2:
            raise IllConditionedRoots(
                f"odd number ({members.size}) of companion roots near angle {members.mean():.6f}; "
                "lambda >= 0 requires even order"
            )
        guess = math.atan2(np.sin(members).mean(), np.cos(members).mean())
        angle = _refine_angle(spec, guess, members.size)
        order = _vanishing_order(spec, angle, tol.root_value, coefficients.size)
        if order != members.size:
            raise IllConditionedRoots(
                f"cluster of {members.size} roots near {angle:.6f} but lambda vanishes to order {order}"
            )
        found.append((float(np.mod(angle, TWO_PI)) % TWO_PI, order // 2))

    found.sort()
    for (a, _), (b, _) in zip(found, found[1:] + found[:1]):
        gap = (b - a) % TWO_PI
        if len(found) > 1 and gap < 4 * tol.root_cluster:
            raise IllConditionedRoots(f"root clusters at {a:.6f} and {b:.6f} are not separated")

    if not found:
        return SpectralClassification(kind="Regular")
    root_infos = [RootInfo(angle=a, multiplicity=m) for a, m in found]
    widom = sum(m * m for _, m in found) / 4.0
    logger.debug(f"Singular symbol with {len(found)} unit-circle roots, widom coefficient {widom}")
    return SpectralClassification(kind="Singular", roots=root_infos, widom_coefficient=widom)


def regular_part_eval(spec: CouplingSpec, classification: SpectralClassification, theta) -> Union[float, np.ndarray]:
    """lambda_0(theta): lambda with every (2 - 2cos(theta - alpha_r))^{m_r} divided out.

    The unit-circle factors are removed from the Laurent polynomial before
    evaluation, so the value at theta = alpha_r is the finite limit.
    """
    quotient = laurent_coefficients(spec).astype(complex)
    factor = 1.0 + 0.0j
    total = 0
    for root in classification.roots:
        a = complex(math.cos(root.angle), math.sin(root.angle))
        for _ in range(2 * root.multiplicity):
            quotient, _ = P.polydiv(quotient, np.array([-a, 1.0]))
        factor *= (-a) ** root.multiplicity
        total += root.multiplicity
    z = np.exp(1j * np.asarray(theta, dtype=float))
    values = (P.polyval(z, quotient) * factor * z ** (total - (spec.range - 1))).real
    return float(values) if np.ndim(values) == 0 else values


@dataclass(frozen=True)
class SzegoCoefficients:
    """Fourier coefficients c_0..c_K of ln lambda^{1/2}.

    ``tail_estimate`` is sum_{k>K} k c_k^2 over the remaining quadrature
    coefficients. ``singular`` flags a symbol with unit-circle zeros, whose
    coefficients decay only like 1/k.
    """
    coefficients: np.ndarray
    order: int
    tail_estimate: float
    points: int
    singular: bool = False

    @property
    def c0(self) -> float:
        return float(self.coefficients[0])

    def partial_sum(self) -> float:
        k = np.arange(1, self.order + 1)
        return float(np.sum(k * self.coefficients[1:] ** 2))

    def geometric_decay(self, floor: float = 1e-14) -> Optional[Tuple[float, float]]:
        """(rho, R^2) of a log-linear fit |c_k| ~ C rho^k over k in [K/4, K].

        Coefficients below ``floor`` (relative to max(1, |c|)) are excluded;
        returns None when fewer than three remain.
        """
        k = np.arange(max(1, self.order // 4), self.order + 1)
        magnitudes = np.abs(self.coefficients[k])
        keep = magnitudes > floor * max(1.0, float(np.abs(self.coefficients).max()))
        if keep.sum() < 3:
            return None
        fit = stats.linregress(k[keep], np.log(magnitudes[keep]))
        return math.exp(fit.slope), float(fit.rvalue ** 2)


def quadrature_points(order: int) -> int:
    limits = get_settings().limits
    return max(limits.quadrature_min_points, limits.quadrature_points_per_order * order)


def _midpoint_fourier(samples: np.ndarray) -> np.ndarray:
    """(1/M) sum_m g(theta_m) e^{-ik theta_m} on theta_m = 2 pi (m + 1/2) / M."""
    points = samples.size
    k = np.arange(points // 2 + 1)
    return (fft.rfft(samples) * np.exp(-1j * math.pi * k / points)).real / points


def szego_coefficients(
    spec: CouplingSpec,
    order: int,
    classification: Optional[SpectralClassification] = None,
    tolerances: Optional[Tolerances] = None,
) -> SzegoCoefficients:
    """c_k = (1/2 pi) int ln lambda^{1/2}(theta) e^{-ik theta} d theta, k = 0..order.

    Regular symbols use the midpoint rule directly (exponentially convergent).
    Singular symbols are split: the smooth regular part goes through
    quadrature and each root contributes -m_r cos(k alpha_r) / (2k) exactly.
    """
    _require_1d(spec, "szego_coefficients")
    if order < 1:
        raise ValueError("order must be at least 1")
    if classification is None:
        classification = classify(spec, tolerances)
    points = quadrature_points(order)
    theta = TWO_PI * (np.arange(points) + 0.5) / points

    if classification.is_regular:
        coefficients = _midpoint_fourier(0.5 * np.log(spectral_eval(spec, theta)))
    else:
        logger.warning("Szego coefficients requested for a singular symbol; they decay like 1/k")
        coefficients = _midpoint_fourier(0.5 * np.log(regular_part_eval(spec, classification, theta)))
        k = np.arange(1, coefficients.size)
        for root in classification.roots:
            coefficients[1:] -= root.multiplicity * np.cos(k * root.angle) / (2.0 * k)

    kept = np.array(coefficients[: order + 1])
    kept.setflags(write=False)
    tail_k = np.arange(order + 1, coefficients.size)
    tail = float(np.sum(tail_k * coefficients[order + 1:] ** 2))
    return SzegoCoefficients(
        coefficients=kept,
        order=order,
        tail_estimate=tail,
        points=points,
        singular=not classification.is_regular,
    )


def szego_lower_bound(coeffs: SzegoCoefficients) -> float:
    """sum_{k=1}^{K} k c_k^2 plus the quadrature tail."""
    return coeffs.partial_sum() + coeffs.tail_estimate


def symbol_log_mean(spec: CouplingSpec, points: Optional[int] = None) -> float:
    """c_0 of ln lambda^{1/2} for any dimension (midpoint rule per axis)."""
    points = points or get_settings().scaling.symbol_grid
    axis = TWO_PI * (np.arange(points) + 0.5) / points
    grid = np.stack(np.meshgrid(*([axis] * spec.dimension), indexing="ij"), axis=-1)
    return float(np.mean(0.5 * np.log(spectral_eval(spec, grid))))


def symbol_minimum(spec: CouplingSpec, points: Optional[int] = None) -> Tuple[float, float]:
    """(min, max) of lambda on a uniform grid, any dimension."""
    points = points or get_settings().scaling.symbol_grid
    axis = TWO_PI * np.arange(points) / points
    grid = np.stack(np.meshgrid(*([axis] * spec.dimension), indexing="ij"), axis=-1)
    values = spectral_eval(spec, grid)
    return float(np.min(values)), float(np.max(values))
