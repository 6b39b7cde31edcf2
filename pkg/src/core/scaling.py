"""Size sweeps and the fits that check the asymptotic laws.

- S against block size: saturation for gapped chains, ln growth at criticality
- I at half/half against ln N: slope sum_r m_r^2 / 4
- ln det D - c0 N1: Szego constant (regular) or Widom log term (singular)
- 2D blocks: entropy per unit boundary
"""

import math
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from src.config import get_settings, thread_cap
from src.core import entanglement
from src.core.errors import BadPartition, InsufficientDecayData, NotPositive, SpecError, UnsupportedDimension
from src.core.lattice_model import CouplingSpec
from src.core.report_engine import ReportEngine
from src.core.schemas import AreaLawRow, EntanglementReport, ScalingFit, SpectralClassification
from src.core.spectral import classify, symbol_log_mean, symbol_minimum, szego_coefficients, szego_lower_bound
from src.kernels import Partition, build_kernel
from src.utils.logger import get_logger

logger = get_logger(__name__)

SpecBuilder = Callable[[int], CouplingSpec]


class PartitionRule(str, Enum):
    HALF_HALF = "HalfHalf"
    FIXED_N_VARY_BLOCK = "FixedN_VaryBlock"


def _r_squared(value: float) -> float:
    return float(min(1.0, max(0.0, np.nan_to_num(value))))


def _regression(x: np.ndarray, y: np.ndarray):
    if np.ptp(x) == 0.0:
        raise ValueError("a fit needs at least two distinct abscissae")
    return stats.linregress(x, y)


def fit_log_growth(xs: Sequence[float], ys: Sequence[float], reference: Optional[float] = None) -> ScalingFit:
    """y = a ln x + b by least squares; a is reported with its standard error."""
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    fit = _regression(np.log(x), y)
    residual = y - (fit.intercept + fit.slope * np.log(x))
    return ScalingFit(
        model="LogGrowth",
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        slope_stderr=float(np.nan_to_num(fit.stderr)),
        r_squared=_r_squared(fit.rvalue ** 2),
        max_residual=float(np.max(np.abs(residual))),
        x_min=float(x.min()),
        x_max=float(x.max()),
        n_points=int(x.size),
        reference=reference,
        xs=x.tolist(),
        ys=y.tolist(),
    )


def chord_lengths(block_sizes: Sequence[int], n: int) -> np.ndarray:
    """(N/pi) sin(pi N1 / N), the length a block of N1 sites presents on an N-site ring."""
    sizes = np.asarray(block_sizes, dtype=float)
    if sizes.size and (sizes.min() < 1 or sizes.max() >= n):
        raise ValueError(f"block sizes must lie in [1, {n - 1}]")
    return (n / math.pi) * np.sin(math.pi * sizes / n)


def fit_chord_growth(
    block_sizes: Sequence[int], ys: Sequence[float], n: int, reference: Optional[float] = None
) -> ScalingFit:
    """fit_log_growth against the chord length instead of N1.

    At fixed N the entropy of a critical ring bends away from ln N1 as N1
    approaches N/4; in the chord variable it stays on a line.
    """
    return fit_log_growth(chord_lengths(block_sizes, n), ys, reference)


def fit_linear(xs: Sequence[float], ys: Sequence[float], reference: Optional[float] = None) -> ScalingFit:
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    fit = _regression(x, y)
    residual = y - (fit.intercept + fit.slope * x)
    return ScalingFit(
        model="Linear",
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        slope_stderr=float(np.nan_to_num(fit.stderr)),
        r_squared=_r_squared(fit.rvalue ** 2),
        max_residual=float(np.max(np.abs(residual))),
        x_min=float(x.min()),
        x_max=float(x.max()),
        n_points=int(x.size),
        reference=reference,
        xs=x.tolist(),
        ys=y.tolist(),
    )


def fit_saturation(
    xs: Sequence[float],
    ys: Sequence[float],
    tail_from: float,
    reference: Optional[float] = None,
) -> ScalingFit:
    """Plateau = mean of y over x >= tail_from (the last point if none qualify).

    ``max_residual`` is the spread of the tail around the plateau; R^2 is the
    share of the total variance that the plateau-plus-rise picture explains.
    """
    x, y = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    tail = x >= tail_from
    if not tail.any():
        tail = x == x.max()
    plateau = float(np.mean(y[tail]))
    spread = y[tail] - plateau
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - float(np.sum(spread ** 2)) / total
    return ScalingFit(
        model="Saturation",
        plateau=plateau,
        r_squared=_r_squared(r_squared),
        max_residual=float(np.max(np.abs(spread))),
        x_min=float(x[tail].min()),
        x_max=float(x[tail].max()),
        n_points=int(tail.sum()),
        reference=reference,
        xs=x.tolist(),
        ys=y.tolist(),
    )


def _parallel(n_jobs: Optional[int]) -> Parallel:
    return Parallel(n_jobs=n_jobs or thread_cap(), prefer="threads", return_as="generator")


def iter_entropy_sweep(
    spec_builder: SpecBuilder,
    sizes: Sequence[int],
    rule: PartitionRule = PartitionRule.HALF_HALF,
    n: Optional[int] = None,
    engine: Optional[ReportEngine] = None,
    n_jobs: Optional[int] = None,
) -> Iterator[EntanglementReport]:
    """Yields one report per size, in the order of ``sizes``.

    HalfHalf treats sizes as system sizes N; FixedN_VaryBlock treats them as
    block sizes N1 inside one system of size ``n``. Sizes whose spec is not
    positive (resonant N) are logged and skipped.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sweep sizes must be ascending")
    engine = engine or ReportEngine()
    rule = PartitionRule(rule)

    if rule is PartitionRule.HALF_HALF:
        def point(size: int) -> Optional[EntanglementReport]:
            try:
                spec = spec_builder(size)
            except NotPositive as e:
                logger.warning(f"Skipping N={size}: {e}")
                return None
            return engine.report(spec, Partition.half_half(size))
    else:
        if n is None:
            raise ValueError("FixedN_VaryBlock needs the system size n")
        spec = spec_builder(n)
        kernel = engine.kernel(spec)
        correlation = None
        if spec.dimension == 1:
            try:
                correlation = entanglement.correlation_length(kernel, engine.tolerances)
            except InsufficientDecayData as e:
                logger.warning(f"No correlation length for N={n}: {e}")

        def point(size: int) -> Optional[EntanglementReport]:
            report = engine.report(spec, size, kernel, with_correlation=False)
            return report.model_copy(update={"correlation": correlation})

    for report in _parallel(n_jobs)(delayed(point)(size) for size in sizes):
        if report is not None:
            logger.info(f"Sweep point N={report.n_sites}, N1={report.block_size}: S={report.entropy:.6f}")
            yield report


def entropy_sweep(
    spec_builder: SpecBuilder,
    sizes: Sequence[int],
    rule: PartitionRule = PartitionRule.HALF_HALF,
    n: Optional[int] = None,
    engine: Optional[ReportEngine] = None,
    n_jobs: Optional[int] = None,
) -> List[EntanglementReport]:
    return list(iter_entropy_sweep(spec_builder, sizes, rule, n, engine, n_jobs))


def snap_size(spec_builder: SpecBuilder, n: int, window: Optional[int] = None) -> int:
    """Odd size within +-window of n whose smallest circulant eigenvalue is largest.

    Ties (within 1e-9 relative) go to the candidate closest to n, so a
    regular chain keeps the requested odd size.
    """
    window = get_settings().scaling.size_snap_window if window is None else window
    scored = []
    for candidate in range(max(5, n - window), n + window + 1):
        if candidate % 2 == 0:
            continue
        try:
            scored.append((spec_builder(candidate).min_eigenvalue, candidate))
        except SpecError:
            continue
    if not scored:
        raise NotPositive((0,), 0.0, 0.0)
    best = max(score for score, _ in scored)
    ties = [c for score, c in scored if score >= best * (1.0 - 1e-9)]
    chosen = min(ties, key=lambda c: (abs(c - n), c))
    if chosen != n:
        logger.info(f"Snapped N={n} to N={chosen}")
    return chosen


def _half_half_information(spec_builder: SpecBuilder, size: int, backend: Optional[str]) -> Optional[float]:
    try:
        spec = spec_builder(size)
    except NotPositive as e:
        logger.warning(f"Skipping N={size}: {e}")
        return None
    return entanglement.mutual_information(build_kernel(spec, backend), Partition.half_half(size))


def widom_slope(
    spec_builder: SpecBuilder,
    sizes: Sequence[int],
    classification: Optional[SpectralClassification] = None,
    snap: bool = True,
    backend: Optional[str] = None,
    n_jobs: Optional[int] = None,
) -> ScalingFit:
    """LogGrowth fit of I(N) at half/half against ln N.

    The reference is the widom coefficient sum_r m_r^2 / 4 of the chain.
    With ``snap`` each N moves to its least resonant odd neighbour first.
    """
    sizes = sorted(sizes)
    if len(sizes) < 6 or sizes[-1] < 8 * sizes[0]:
        raise ValueError("widom_slope needs at least 6 sizes spanning a factor of 8")
    if snap:
        sizes = [snap_size(spec_builder, n) for n in sizes]
    if classification is None:
        classification = classify(spec_builder(sizes[-1]))

    values = list(_parallel(n_jobs)(delayed(_half_half_information)(spec_builder, n, backend) for n in sizes))
    kept = [(n, value) for n, value in zip(sizes, values) if value is not None]
    if len(kept) < 3:
        raise ValueError("too few non-resonant sizes left for a fit")
    fit = fit_log_growth([n for n, _ in kept], [v for _, v in kept], classification.widom_coefficient)
    logger.info(f"Widom slope {fit.slope:.4f} +- {fit.slope_stderr:.4f} (reference {fit.reference})")
    return fit


def _log_det_excess(spec: CouplingSpec, block_sizes: Sequence[int], c0: float, backend: Optional[str]) -> List[float]:
    kernel = build_kernel(spec, backend)
    excess = []
    for size in block_sizes:
        blocks = kernel.extract_blocks(Partition.interval(size))
        excess.append(entanglement.log_det(blocks.D, "D") - c0 * size)
    return excess


def szego_det_check(
    spec: CouplingSpec,
    block_sizes: Sequence[int],
    order: Optional[int] = None,
    backend: Optional[str] = None,
) -> ScalingFit:
    """ln det D(N1) - c0 N1 against N1, expected to plateau at sum_k k c_k^2."""
    classification = classify(spec)
    if not classification.is_regular:
        raise SpecError("szego_det_check needs a Regular spec; use widom_det_check")
    block_sizes = sorted(block_sizes)
    if block_sizes[-1] >= spec.n_sites:
        raise BadPartition(f"block {block_sizes[-1]} does not fit in N={spec.n_sites}")
    settings = get_settings()
    coefficients = szego_coefficients(spec, order or settings.scaling.szego_order, classification)
    excess = _log_det_excess(spec, block_sizes, coefficients.c0, backend)
    fit = fit_saturation(block_sizes, excess, settings.scaling.szego_plateau_min_block, szego_lower_bound(coefficients))
    logger.info(f"Szego plateau {fit.plateau:.8f} against sum k c_k^2 = {fit.reference:.8f}")
    return fit


def widom_det_check(
    spec: CouplingSpec,
    block_sizes: Sequence[int],
    backend: Optional[str] = None,
) -> ScalingFit:
    """ln det D(N1) - c0 N1 against ln N1; the slope should be the widom coefficient.

    c0 comes from the exact singular split, so it carries no quadrature error
    from the unit-circle zeros.
    """
    block_sizes = sorted(block_sizes)
    if spec.n_sites < 8 * block_sizes[-1]:
        raise BadPartition(f"N={spec.n_sites} is below 8 x {block_sizes[-1]}; wrap-around would bias the slope")
    classification = classify(spec)
    if classification.is_regular:
        logger.warning("widom_det_check on a Regular spec; the slope should vanish")
    coefficients = szego_coefficients(spec, 1, classification)
    excess = _log_det_excess(spec, block_sizes, coefficients.c0, backend)
    fit = fit_log_growth(block_sizes, excess, classification.widom_coefficient)
    logger.info(f"Widom det slope {fit.slope:.4f} against {fit.reference}")
    return fit


def area_law_2d(
    spec: CouplingSpec,
    sides: Sequence[int],
    backend: Optional[str] = None,
) -> List[AreaLawRow]:
    """Entropy of n x n blocks on a 2D torus, per unit boundary 4n.

    Each row also carries ln det D - c0 n^2 with c0 the 2D mean of
    ln lambda^{1/2}, the boundary term of the Szego asymptotics. Specs whose
    symbol touches zero get no reference and a warning.
    """
    if spec.dimension != 2:
        raise UnsupportedDimension(f"area_law_2d needs a 2D spec (got d={spec.dimension})")
    sides = sorted(sides)
    if min(spec.extents) < 4 * sides[-1]:
        raise BadPartition(f"torus {list(spec.extents)} is smaller than 4 x {sides[-1]}")
    settings = get_settings()
    low, high = symbol_minimum(spec)
    regular = low > settings.tolerances.positivity * high
    if not regular:
        logger.warning("2D symbol touches zero; area-law sweep is exploratory, no reference value")
    c0 = symbol_log_mean(spec)
    kernel = build_kernel(spec, backend)

    rows = []
    for side in sides:
        partition = Partition.hypercube(side, 2)
        _, value = entanglement.entropy(kernel, partition, settings.tolerances)
        blocks = kernel.extract_blocks(partition)
        excess = entanglement.log_det(blocks.D, "D") - c0 * side * side
        boundary = 4.0 * side
        rows.append(AreaLawRow(
            n=side,
            entropy=value,
            entropy_per_boundary=value / boundary,
            boundary_excess=excess,
            excess_per_boundary=excess / boundary,
            reference_available=regular,
        ))
        logger.info(f"Area law n={side}: S={value:.6f}, S/4n={value / boundary:.6f}")
    return rows


def saturation_spread(reports: Sequence[EntanglementReport], start: int) -> float:
    """Largest |S(N1) - S(N1_max)| over reports with N1 >= start."""
    tail = [r for r in reports if r.block_size >= start]
    if not tail:
        return math.nan
    last = max(tail, key=lambda r: r.block_size).entropy
    return max(abs(r.entropy - last) for r in tail)
