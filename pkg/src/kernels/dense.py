from typing import Optional

import numpy as np
from scipy import linalg

from src.config import get_settings
from src.config.settings import Tolerances
from src.core.errors import NotPositive
from src.core.lattice_model import CouplingSpec, dense_potential
from src.kernels.base import LatticeKernel, Which
from src.utils.logger import get_logger

logger = get_logger(__name__)


class DenseKernel(LatticeKernel):
    """Reference kernel from a full eigendecomposition of V.

    Cubic in the number of sites and capped by ``limits.dense_cap``; used to
    cross-check the circulant path.
    """

    def __init__(self, spec: CouplingSpec, tolerances: Optional[Tolerances] = None, cap: Optional[int] = None):
        self.spec = spec
        cap = cap if cap is not None else get_settings().limits.dense_cap
        potential = dense_potential(spec, cap)
        eigenvalues, vectors = linalg.eigh(potential)
        if eigenvalues[0] <= 0.0:
            raise NotPositive((0,) * spec.dimension, float(eigenvalues[0]), 0.0)
        root = np.sqrt(eigenvalues)
        self._eigenvalues = eigenvalues
        self._sqrt = self._symmetrized((vectors * root) @ vectors.T)
        self._inv_sqrt = self._symmetrized((vectors / root) @ vectors.T)
        logger.debug(f"Dense kernel ready for {spec.n_sites} sites")

    @staticmethod
    def _symmetrized(matrix: np.ndarray) -> np.ndarray:
        matrix = 0.5 * (matrix + matrix.T)
        matrix.setflags(write=False)
        return matrix

    def _flat(self, coords: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(coords.T, self.spec.extents)

    @property
    def spectrum(self) -> np.ndarray:
        return self._eigenvalues

    @property
    def sqrt_row(self) -> np.ndarray:
        return self._sqrt[0].reshape(self.spec.extents)

    @property
    def inv_sqrt_row(self) -> np.ndarray:
        return self._inv_sqrt[0].reshape(self.spec.extents)

    def block(self, which: Which, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        matrix = self._sqrt if which == "sqrt" else self._inv_sqrt
        return matrix[np.ix_(self._flat(rows), self._flat(cols))]
