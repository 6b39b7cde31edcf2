from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.core.errors import BadPartition


@dataclass(frozen=True)
class Partition:
    """Hyperrectangular block of sites on the torus.

    ``extents`` are the block sizes per axis, ``origin`` its first site; the
    block wraps around periodically.
    """
    extents: Tuple[int, ...]
    origin: Tuple[int, ...] = ()

    @classmethod
    def interval(cls, size: int, start: int = 0) -> "Partition":
        return cls((int(size),), (int(start),))

    @classmethod
    def half_half(cls, n: int) -> "Partition":
        """N1 = (N - 1)/2 for odd N, N/2 for even N."""
        return cls.interval((n - 1) // 2 if n % 2 else n // 2)

    @classmethod
    def hypercube(cls, side: int, dimension: int) -> "Partition":
        return cls((int(side),) * dimension, (0,) * dimension)

    @property
    def size(self) -> int:
        return int(np.prod(self.extents))

    def _origin(self) -> Tuple[int, ...]:
        return self.origin or (0,) * len(self.extents)

    def validate(self, lattice: Sequence[int]) -> None:
        if len(self.extents) != len(lattice) or len(self._origin()) != len(lattice):
            raise BadPartition(f"block {list(self.extents)} does not match lattice {list(lattice)}")
        if any(n < 1 or n > N for n, N in zip(self.extents, lattice)):
            raise BadPartition(f"block {list(self.extents)} must satisfy 1 <= n_i <= N_i on {list(lattice)}")
        if self.size >= int(np.prod(lattice)):
            raise BadPartition(f"block {list(self.extents)} covers the whole lattice")

    def sites(self, lattice: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinates of inner and outer sites, each shaped (count, d)."""
        self.validate(lattice)
        lattice = tuple(lattice)
        local = np.indices(self.extents).reshape(len(lattice), -1).T
        inner = (local + np.array(self._origin())) % np.array(lattice)
        inner_flat = np.ravel_multi_index(inner.T, lattice)
        outer_flat = np.setdiff1d(np.arange(int(np.prod(lattice))), inner_flat)
        outer = np.stack(np.unravel_index(outer_flat, lattice), axis=-1)
        return inner, outer


def as_partition(block: Union[int, Sequence[int], Partition], dimension: int) -> Partition:
    """Accepts a Partition, a 1D block size, or per-axis block extents."""
    if isinstance(block, Partition):
        return block
    if isinstance(block, (int, np.integer)):
        if dimension != 1:
            return Partition.hypercube(int(block), dimension)
        return Partition.interval(int(block))
    extents = tuple(int(n) for n in block)
    return Partition(extents, (0,) * len(extents))
