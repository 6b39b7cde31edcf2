from abc import ABC, abstractmethod
from functools import cached_property
from typing import Literal

import numpy as np

from src.core.lattice_model import CouplingSpec
from src.kernels.partition import Partition

Which = Literal["sqrt", "inv_sqrt"]


class LatticeKernel(ABC):
    """Abstract base class for representations of V^{1/2} and V^{-1/2}."""

    spec: CouplingSpec

    @property
    @abstractmethod
    def spectrum(self) -> np.ndarray:
        """Eigenvalues of V, flat, any order."""

    @property
    @abstractmethod
    def sqrt_row(self) -> np.ndarray:
        """First row of V^{1/2}, shaped like the lattice and indexed by lag."""

    @property
    @abstractmethod
    def inv_sqrt_row(self) -> np.ndarray:
        """First row of V^{-1/2}, shaped like the lattice and indexed by lag."""

    @abstractmethod
    def block(self, which: Which, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Sub-matrix of V^{1/2} or V^{-1/2} between two site-coordinate lists."""

    @property
    def name(self) -> str:
        return type(self).__name__

    @property
    def max_eigenvalue(self) -> float:
        return float(np.max(self.spectrum))

    def log_det_sqrt(self) -> float:
        """ln det V^{1/2} = 1/2 sum_j ln lambda_j."""
        return 0.5 * float(np.sum(np.log(self.spectrum)))

    def cross_abs_sum(self, partition: Partition) -> float:
        """sum_{i inner} sum_{j outer} |V^{-1/2}_ij|."""
        inner, outer = partition.sites(self.spec.extents)
        return float(np.abs(self.block("inv_sqrt", inner, outer)).sum())

    def extract_blocks(self, partition: Partition) -> "PartitionBlocks":
        partition.validate(self.spec.extents)
        return PartitionBlocks(self, partition)


class PartitionBlocks:
    """Blocks of V^{-1/2} = [[A, B], [B^T, C]] and V^{1/2} = [[D, E], [E^T, F]].

    Inner blocks come first. Every block is materialized on first access, so
    an entropy computation never pays for the complement-sized C and F.
    """

    def __init__(self, kernel: LatticeKernel, partition: Partition):
        self.kernel = kernel
        self.partition = partition
        self.inner, self.outer = partition.sites(kernel.spec.extents)

    @cached_property
    def A(self) -> np.ndarray:
        return self.kernel.block("inv_sqrt", self.inner, self.inner)

    @cached_property
    def B(self) -> np.ndarray:
        return self.kernel.block("inv_sqrt", self.inner, self.outer)

    @cached_property
    def C(self) -> np.ndarray:
        return self.kernel.block("inv_sqrt", self.outer, self.outer)

    @cached_property
    def D(self) -> np.ndarray:
        return self.kernel.block("sqrt", self.inner, self.inner)

    @cached_property
    def E(self) -> np.ndarray:
        return self.kernel.block("sqrt", self.inner, self.outer)

    @cached_property
    def F(self) -> np.ndarray:
        return self.kernel.block("sqrt", self.outer, self.outer)
