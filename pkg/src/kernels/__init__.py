from typing import List, Optional, Sequence, Tuple, Union

from src.config import get_settings
from src.config.settings import Tolerances
from src.core.errors import UnsupportedDimension
from src.core.lattice_model import CouplingSpec
from src.kernels.base import LatticeKernel, PartitionBlocks
from src.kernels.circulant import CirculantKernel
from src.kernels.dense import DenseKernel
from src.kernels.partition import Partition, as_partition


def build_kernel(
    spec: CouplingSpec,
    backend: Optional[str] = None,
    tolerances: Optional[Tolerances] = None,
) -> LatticeKernel:
    """Factory function to get the configured kernel backend."""
    backend = backend or get_settings().kernel.backend
    if backend == "circulant":
        return CirculantKernel(spec, tolerances)
    elif backend == "dense":
        return DenseKernel(spec, tolerances)
    else:
        raise ValueError(f"Unknown kernel backend: {backend}")


def extract_blocks(kernel: LatticeKernel, block: Union[int, Sequence[int], Partition]) -> PartitionBlocks:
    return kernel.extract_blocks(as_partition(block, kernel.spec.dimension))


def kernel_row_decay(kernel: LatticeKernel) -> List[Tuple[int, float]]:
    """(k, |V^{-1/2}_{0k}|) for k = 1..floor((N-1)/2) on a chain."""
    if kernel.spec.dimension != 1:
        raise UnsupportedDimension("kernel_row_decay is defined for 1D chains only")
    row = kernel.inv_sqrt_row
    return [(k, float(abs(row[k]))) for k in range(1, (kernel.spec.n_sites - 1) // 2 + 1)]


def kernel_rows_table(kernel: LatticeKernel) -> List[Tuple[int, float, float]]:
    """(k, V^{1/2}_{0k}, V^{-1/2}_{0k}) for every lag k = 0..N-1 of a chain."""
    if kernel.spec.dimension != 1:
        raise UnsupportedDimension("kernel rows export is defined for 1D chains only")
    return [
        (k, float(kernel.sqrt_row[k]), float(kernel.inv_sqrt_row[k]))
        for k in range(kernel.spec.n_sites)
    ]


__all__ = [
    "CirculantKernel",
    "DenseKernel",
    "LatticeKernel",
    "Partition",
    "PartitionBlocks",
    "as_partition",
    "build_kernel",
    "extract_blocks",
    "kernel_row_decay",
    "kernel_rows_table",
]
