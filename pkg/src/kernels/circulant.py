from typing import Optional

import numpy as np
from scipy import fft

from src.config import resolve_tolerances
from src.config.settings import Tolerances
from src.core.errors import NumericalIntegrityError
from src.core.lattice_model import CouplingSpec, lag_indices
from src.kernels.base import LatticeKernel, Which
from src.kernels.partition import Partition
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _inverse_transform(values: np.ndarray, tolerance: float, label: str) -> np.ndarray:
    row = fft.ifftn(values)
    residue = float(np.max(np.abs(row.imag)))
    scale = max(1.0, float(np.max(np.abs(row.real))))
    if residue > tolerance * scale:
        raise NumericalIntegrityError(
            f"{label} row has imaginary residue {residue:.3e} (limit {tolerance * scale:.3e})"
        )
    real = np.ascontiguousarray(row.real)
    real.setflags(write=False)
    return real


class CirculantKernel(LatticeKernel):
    """V^{+-1/2} through the eigenvalues of V: one inverse FFT per row.

    Every matrix element is a lookup into the first row by lag, so any block
    costs O(rows x cols) without forming an N x N matrix.
    """

    def __init__(self, spec: CouplingSpec, tolerances: Optional[Tolerances] = None):
        self.spec = spec
        tol = resolve_tolerances(tolerances)
        root = np.sqrt(spec.eigenvalues)
        self._sqrt_row = _inverse_transform(root, tol.kernel_imaginary, "V^{1/2}")
        self._inv_sqrt_row = _inverse_transform(1.0 / root, tol.kernel_imaginary, "V^{-1/2}")
        logger.debug(f"Circulant kernel ready for extents {list(spec.extents)}")

    @property
    def spectrum(self) -> np.ndarray:
        return self.spec.eigenvalues.ravel()

    @property
    def sqrt_row(self) -> np.ndarray:
        return self._sqrt_row

    @property
    def inv_sqrt_row(self) -> np.ndarray:
        return self._inv_sqrt_row

    def block(self, which: Which, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        row = self._sqrt_row if which == "sqrt" else self._inv_sqrt_row
        return row.ravel()[lag_indices(rows, cols, self.spec.extents)]

    def cross_abs_sum(self, partition: Partition) -> float:
        # Every inner row sums |row| over the whole torus; subtract the inner-inner part.
        inner, _ = partition.sites(self.spec.extents)
        inner_block = self.block("inv_sqrt", inner, inner)
        total = len(inner) * float(np.abs(self._inv_sqrt_row).sum())
        return max(0.0, total - float(np.abs(inner_block).sum()))
