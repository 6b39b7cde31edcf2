"""Coupling specifications of translationally invariant harmonic lattices.

A spec stores the finite-range coefficients V_k of the potential
``1/2 sum_ij V_ij q_i q_j`` on a periodic chain or d-dimensional torus,
keyed by canonical lag vectors (|k_i| <= (N_i - 1)/2), symmetric under
k -> -k. Construction computes every circulant eigenvalue and rejects
couplings without a normalizable ground state.
"""

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft

from src.config import get_settings, resolve_tolerances
from src.config.settings import Tolerances
from src.core.errors import NotPositive, NotSymmetric, RangeTooLarge, SpecError, TooLarge
from src.core.schemas import CouplingDocument, CouplingEntry, EtaChainParams
from src.utils.logger import get_logger

logger = get_logger(__name__)

Lag = Tuple[int, ...]
CoefficientInput = Union[Mapping[Union[int, Sequence[int]], float], Iterable[Tuple[Union[int, Sequence[int]], float]]]


@dataclass(frozen=True)
class CouplingSpec:
    """Validated, immutable coupling specification.

    ``eigenvalues`` has shape ``extents``; entry j is lambda at
    theta_j = 2 pi j / N (per axis).
    """
    dimension: int
    extents: Tuple[int, ...]
    coefficients: Tuple[Tuple[Lag, float], ...]
    eigenvalues: np.ndarray = field(compare=False, repr=False)

    @property
    def n_sites(self) -> int:
        return math.prod(self.extents)

    @property
    def range(self) -> int:
        """Smallest R with V_k = 0 whenever some |k_i| >= R."""
        return 1 + max((max(abs(k) for k in lag) for lag, _ in self.coefficients), default=0)

    @property
    def lags(self) -> np.ndarray:
        return np.array([lag for lag, _ in self.coefficients], dtype=int).reshape(-1, self.dimension)

    @property
    def values(self) -> np.ndarray:
        return np.array([value for _, value in self.coefficients], dtype=float)

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues.max())

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues.min())

    def coefficient(self, lag: Union[int, Sequence[int]]) -> float:
        key = canonical_lag(lag, self.extents)
        return dict(self.coefficients).get(key, 0.0)

    def coefficient_array(self) -> np.ndarray:
        """Coefficients placed on the torus, entry k holding V_{k mod N}."""
        array = np.zeros(self.extents)
        for lag, value in self.coefficients:
            array[tuple(k % n for k, n in zip(lag, self.extents))] = value
        return array

    def resized(self, extents: Union[int, Sequence[int]]) -> "CouplingSpec":
        """Same coefficients on a torus of different extents."""
        return build_coupling(self.dimension, extents, dict(self.coefficients))

    def to_document(self) -> CouplingDocument:
        return CouplingDocument(
            dimension=self.dimension,
            extents=list(self.extents),
            coefficients=[CouplingEntry(lag=list(lag), value=value) for lag, value in self.coefficients],
        )

    def fingerprint(self) -> str:
        """Short stable hash of the coefficients and geometry."""
        payload = json.dumps(
            {"extents": self.extents, "coefficients": [[list(l), repr(v)] for l, v in self.coefficients]},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def _as_lag(lag: Union[int, Sequence[int]]) -> Lag:
    if isinstance(lag, (int, np.integer)):
        return (int(lag),)
    return tuple(int(k) for k in lag)


def canonical_lag(lag: Union[int, Sequence[int]], extents: Sequence[int]) -> Lag:
    """Maps a lag vector onto (-N_i/2, N_i/2) per axis.

    Raises RangeTooLarge when some component is congruent to N_i/2, the only
    lag that coincides with its own negation.
    """
    lag = _as_lag(lag)
    if len(lag) != len(extents):
        raise SpecError(f"lag {list(lag)} does not match dimension {len(extents)}")
    canonical = []
    for k, n in zip(lag, extents):
        k = k % n
        if 2 * k == n and n > 1:
            raise RangeTooLarge(f"lag {list(lag)} reaches half the period {n}; need 2R - 1 <= N")
        canonical.append(k - n if 2 * k > n else k)
    return tuple(canonical)


def _items(coefficients: CoefficientInput) -> Iterable[Tuple[Union[int, Sequence[int]], float]]:
    if isinstance(coefficients, Mapping):
        return coefficients.items()
    return coefficients


def circulant_eigenvalues(coefficient_array: np.ndarray) -> np.ndarray:
    """Spectral function sampled on the discrete torus grid."""
    return np.ascontiguousarray(fft.fftn(coefficient_array).real)


def build_coupling(
    dimension: int,
    extents: Union[int, Sequence[int]],
    coefficients: CoefficientInput,
    tolerances: Optional[Tolerances] = None,
) -> CouplingSpec:
    """Validates coefficients, completes them by symmetry and checks positivity.

    Raises:
        NotSymmetric: V_k and V_{-k} were both given and differ.
        NotPositive: some circulant eigenvalue is at or below
            ``positivity * max lambda``.
    """
    tol = resolve_tolerances(tolerances)
    extents = _as_lag(extents)
    if dimension < 1 or len(extents) != dimension:
        raise SpecError(f"extents {list(extents)} do not describe a {dimension}-dimensional lattice")
    if any(n < 1 for n in extents):
        raise SpecError(f"extents must be positive, got {list(extents)}")

    given: Dict[Lag, float] = {}
    for lag, value in _items(coefficients):
        key = canonical_lag(lag, extents)
        value = float(value)
        if key in given and given[key] != value:
            raise SpecError(f"lag {list(key)} given twice with values {given[key]} and {value}")
        given[key] = value

    completed: Dict[Lag, float] = {}
    scale = max((abs(v) for v in given.values()), default=1.0) or 1.0
    for key, value in given.items():
        mirror = canonical_lag(tuple(-k for k in key), extents)
        if mirror in given and abs(given[mirror] - value) > tol.symmetry * scale:
            raise NotSymmetric(key, value, given[mirror])
        completed[key] = value
        completed[mirror] = value

    items = tuple(sorted((lag, v) for lag, v in completed.items() if v != 0.0))
    array = np.zeros(extents)
    for lag, value in items:
        array[tuple(k % n for k, n in zip(lag, extents))] = value
    eigenvalues = circulant_eigenvalues(array)
    eigenvalues.setflags(write=False)

    top = float(eigenvalues.max()) if eigenvalues.size else 0.0
    threshold = tol.positivity * max(top, 0.0)
    low = int(np.argmin(eigenvalues))
    if top <= 0.0 or eigenvalues.flat[low] <= threshold:
        mode = tuple(int(j) for j in np.unravel_index(low, extents))
        raise NotPositive(mode, float(eigenvalues.flat[low]), threshold)

    spec = CouplingSpec(dimension=dimension, extents=extents, coefficients=items, eigenvalues=eigenvalues)
    logger.debug(f"Built coupling on {list(extents)} with range R={spec.range}, lambda in [{spec.min_eigenvalue:.3e}, {top:.3e}]")
    return spec


def spec_from_document(document: CouplingDocument, tolerances: Optional[Tolerances] = None) -> CouplingSpec:
    pairs = [(tuple(entry.lag), entry.value) for entry in document.coefficients]
    return build_coupling(document.dimension, document.extents, pairs, tolerances)


def eta_chain_coefficients(eta: float) -> Dict[Lag, float]:
    """Expansion of 1/2 sum_i (-2 eta q_i + q_{i+1} + q_{i-1})^2 into V_0, V_1, V_2."""
    return {(0,): 4.0 * eta * eta + 2.0, (1,): -4.0 * eta, (2,): 1.0}


def build_eta_chain(params: EtaChainParams, tolerances: Optional[Tolerances] = None) -> CouplingSpec:
    """Example chain with lambda^{1/2}(theta) = |2 eta - 2 cos theta|.

    Raises NotPositive when some grid angle satisfies cos theta_j = eta.
    """
    return build_coupling(1, params.n, eta_chain_coefficients(params.eta), tolerances)


def eta_chain_builder(eta: float, tolerances: Optional[Tolerances] = None) -> Callable[[int], CouplingSpec]:
    """Size-indexed family of eta chains for sweeps."""
    def build(n: int) -> CouplingSpec:
        return build_eta_chain(EtaChainParams(eta=eta, n=n), tolerances)
    return build


def build_separable(chains: Sequence[CouplingSpec], mode: str = "product",
                    tolerances: Optional[Tolerances] = None) -> CouplingSpec:
    """Combines 1D chains into a d-dimensional torus coupling.

    ``product`` gives V = V_1 x V_2 x ... (lambda multiplies), ``sum`` gives
    the Kronecker sum (lambda adds).
    """
    if any(chain.dimension != 1 for chain in chains):
        raise SpecError("separable couplings are built from 1D chains")
    dimension = len(chains)
    extents = tuple(chain.extents[0] for chain in chains)
    combined: Dict[Lag, float] = {}
    if mode == "product":
        for parts in itertools.product(*(chain.coefficients for chain in chains)):
            lag = tuple(lag[0] for lag, _ in parts)
            combined[lag] = math.prod(value for _, value in parts)
    elif mode == "sum":
        for axis, chain in enumerate(chains):
            for lag, value in chain.coefficients:
                key = tuple(lag[0] if a == axis else 0 for a in range(dimension))
                combined[key] = combined.get(key, 0.0) + value
    else:
        raise ValueError(f"Unknown separable mode: {mode}")
    return build_coupling(dimension, extents, combined, tolerances)


def site_coordinates(extents: Sequence[int]) -> np.ndarray:
    """Multi-indices of every site in C order, shape (n_sites, d)."""
    return np.indices(tuple(extents)).reshape(len(extents), -1).T


def lag_indices(rows: np.ndarray, cols: np.ndarray, extents: Sequence[int]) -> np.ndarray:
    """Flat index of (row - col) mod extents for every site pair."""
    flat = np.zeros((len(rows), len(cols)), dtype=np.intp)
    for axis, n in enumerate(extents):
        flat = flat * n + np.subtract.outer(rows[:, axis], cols[:, axis]) % n
    return flat


def dense_potential(spec: CouplingSpec, cap: Optional[int] = None) -> np.ndarray:
    """Full (block-)circulant matrix with V[i][j] = V_{i - j mod extents}."""
    cap = cap if cap is not None else get_settings().limits.dense_cap
    if spec.n_sites > cap:
        raise TooLarge(f"{spec.n_sites} sites exceed the dense cap {cap}")
    coords = site_coordinates(spec.extents)
    return spec.coefficient_array().ravel()[lag_indices(coords, coords, spec.extents)]
