"""Entanglement entropy, mutual information and bounds for a bipartition.

With A, D the inner blocks of V^{-1/2} and V^{1/2}, the reduced state of the
block is fixed by the eigenvalues mu_i >= 1 of A.D, and

    S = sum_i f(sqrt(mu_i)),
    f(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2).

All determinants are taken in log-space from Cholesky diagonals.
"""

import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, stats
from scipy.special import xlogy

from src.config import get_settings, resolve_tolerances
from src.config.settings import Tolerances
from src.core.errors import (
    FactorizationError,
    InsufficientDecayData,
    NumericalIntegrityError,
    SpectrumBelowOne,
    UnsupportedDimension,
)
from src.core.schemas import CorrelationEstimate
from src.kernels import LatticeKernel, Partition, PartitionBlocks, as_partition, kernel_row_decay
from src.utils.logger import get_logger

logger = get_logger(__name__)

Block = Union[int, Sequence[int], Partition]


def entropy_function(x, series_threshold: float = 1e-8):
    """f(x) for x >= 1, with f(1) = 0.

    Below ``1 + series_threshold`` the expansion in h = (x-1)/2,
    f = h (1 - ln h) + h^2/2, replaces the closed form.
    """
    x = np.asarray(x, dtype=float)
    h = np.maximum(x - 1.0, 0.0) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = np.log1p(h) + h * np.log((x + 1.0) / (x - 1.0))
    series = h - xlogy(h, h) + h * h / 2.0
    values = np.where(2.0 * h > series_threshold, closed, series)
    return float(values) if values.ndim == 0 else values


def log_det(matrix: np.ndarray, label: str = "block") -> float:
    """ln det of a symmetric positive definite matrix."""
    try:
        factor = linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as e:
        logger.error(f"Cholesky factorization of {label} failed")
        raise FactorizationError(f"{label} is not positive definite") from e
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def _blocks(kernel: LatticeKernel, block: Block) -> PartitionBlocks:
    return kernel.extract_blocks(as_partition(block, kernel.spec.dimension))


def mu_spectrum_of(blocks: PartitionBlocks, tolerances: Optional[Tolerances] = None) -> np.ndarray:
    """Ascending eigenvalues of L^T D L with A = L L^T (similar to A.D)."""
    tol = resolve_tolerances(tolerances)
    try:
        factor = linalg.cholesky(blocks.A, lower=True)
    except linalg.LinAlgError as e:
        logger.error("Cholesky factorization of block A failed")
        raise FactorizationError("block A of V^{-1/2} is not positive definite") from e
    product = factor.T @ blocks.D @ factor
    mu = linalg.eigvalsh(0.5 * (product + product.T))
    if mu[0] < 1.0 - tol.mu_floor:
        logger.error(f"mu-spectrum minimum {mu[0]!r} below 1")
        raise SpectrumBelowOne(float(mu[0]), tol.mu_floor)
    return np.maximum(mu, 1.0)


def entropy(
    kernel: LatticeKernel,
    block: Block,
    tolerances: Optional[Tolerances] = None,
) -> Tuple[np.ndarray, float]:
    """(mu_spectrum, S) for the block; S in nats."""
    tol = resolve_tolerances(tolerances)
    mu = mu_spectrum_of(_blocks(kernel, block), tol)
    value = float(np.sum(entropy_function(np.sqrt(mu), tol.entropy_series)))
    return mu, value


def mutual_information(
    kernel: LatticeKernel,
    block: Block,
    tolerances: Optional[Tolerances] = None,
) -> float:
    """I = 1/2 ln(det A det C / det V^{-1/2}), checked against its dual form.

    Raises:
        NumericalIntegrityError: if the V^{-1/2} and V^{1/2} forms disagree.
    """
    tol = resolve_tolerances(tolerances)
    blocks = _blocks(kernel, block)
    log_det_sqrt = kernel.log_det_sqrt()
    primary = 0.5 * (log_det(blocks.A, "A") + log_det(blocks.C, "C") + log_det_sqrt)
    dual = 0.5 * (log_det(blocks.F, "F") + log_det(blocks.D, "D") - log_det_sqrt)
    if abs(primary - dual) > tol.mutual_information_agreement * max(1.0, abs(primary)):
        logger.error(f"mutual information forms disagree: {primary!r} vs {dual!r}")
        raise NumericalIntegrityError(
            f"mutual information {primary:.12g} and its dual form {dual:.12g} disagree"
        )
    return max(0.0, primary)


def det_lower_bound(kernel: LatticeKernel, block: Block) -> float:
    """1/2 ln det(A.D) = 1/2 (ln det A + ln det D)."""
    blocks = _blocks(kernel, block)
    return 0.5 * (log_det(blocks.A, "A") + log_det(blocks.D, "D"))


def negativity_upper_bound(kernel: LatticeKernel, block: Block) -> float:
    """4 sqrt(max lambda) sum_{i inner, j outer} |V^{-1/2}_ij|."""
    partition = as_partition(block, kernel.spec.dimension)
    return 4.0 * math.sqrt(kernel.max_eigenvalue) * kernel.cross_abs_sum(partition)


def _fit_residual(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    fit = stats.linregress(x, y)
    residual = y - (fit.intercept + fit.slope * x)
    return float(fit.slope), float(np.sqrt(np.mean(residual ** 2)))


def _decay_window(magnitudes: np.ndarray, floor: float, n: int, minimum: int) -> Tuple[int, int]:
    """Fit window over lags 1..len(magnitudes), clipped at the noise floor."""
    above = magnitudes > floor
    cutoff = int(np.argmin(above)) if not above.all() else magnitudes.size
    lo, hi = max(1, n // 16), min(n // 4, cutoff)
    if hi - lo + 1 >= minimum:
        return lo, hi
    if cutoff < minimum:
        raise InsufficientDecayData(cutoff, minimum, (lo, n // 4))
    width = max(minimum, cutoff // 2)
    return max(1, cutoff - width + 1), cutoff


def correlation_length(kernel: LatticeKernel, tolerances: Optional[Tolerances] = None) -> CorrelationEstimate:
    """Decay class and length of |V^{-1/2}_{0l}| along a chain.

    The magnitudes are replaced by their running upper envelope (max over
    lags >= l) so oscillating rows are compared by their decay. Over the fit
    window, ln|.| is regressed on l and on ln l. Exponential (xi = -1/slope)
    needs a negative slope, at most half the log-log residual, and a fitted
    drop of at least ``decay_window_lengths`` correlation lengths across the
    window; anything else is PowerLaw with xi = inf.
    """
    if kernel.spec.dimension != 1:
        raise UnsupportedDimension("correlation_length is defined for 1D chains only")
    tol = resolve_tolerances(tolerances)
    minimum = get_settings().limits.min_decay_lags
    decay = kernel_row_decay(kernel)
    if len(decay) < minimum:
        raise InsufficientDecayData(len(decay), minimum)

    magnitudes = np.array([m for _, m in decay])
    floor = tol.correlation_noise_floor * max(abs(float(kernel.inv_sqrt_row[0])), np.finfo(float).tiny)
    if np.all(magnitudes <= floor):
        return CorrelationEstimate(xi=0.0, decay_class="Zero")

    envelope = np.maximum.accumulate(magnitudes[::-1])[::-1]
    lo, hi = _decay_window(envelope, floor, kernel.spec.n_sites, minimum)
    lags = np.arange(lo, hi + 1, dtype=float)
    log_values = np.log(envelope[lo - 1:hi])

    slope, linear_residual = _fit_residual(lags, log_values)
    power, power_residual = _fit_residual(np.log(lags), log_values)
    logger.debug(
        f"decay fit on [{lo}, {hi}]: linear residual {linear_residual:.3e}, log-log residual {power_residual:.3e}"
    )
    decays = slope < 0.0 and -slope * (hi - lo) >= tol.decay_window_lengths
    if decays and linear_residual <= 0.5 * power_residual:
        return CorrelationEstimate(
            xi=-1.0 / slope,
            decay_class="Exponential",
            fit_window=(lo, hi),
            fit_residual=linear_residual,
            slope=slope,
        )
    return CorrelationEstimate(
        xi=math.inf,
        decay_class="PowerLaw",
        fit_window=(lo, hi),
        fit_residual=power_residual,
        slope=power,
    )
