import math
from pathlib import Path

import numpy as np

from src.core.errors import NotPositive
from src.core.lattice_model import build_coupling

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "specs"


def closed_form_r(eta: float) -> float:
    """Smaller root of z^2 - 2 eta z + 1 for eta > 1."""
    return eta - math.sqrt(eta * eta - 1.0)


def random_valid_spec(rng: np.random.Generator, n: int, max_range: int = 5):
    """Chain with V_0 ~ U(0, 3) and V_k ~ N(0, 1), redrawn until positive at this N.

    Accepted draws are often close to gapless, unlike diagonally dominant ones.
    """
    while True:
        reach = int(rng.integers(2, max_range + 1))
        couplings = {k: float(rng.normal()) for k in range(1, reach)}
        couplings[0] = float(rng.uniform(0.0, 3.0))
        try:
            return build_coupling(1, n, couplings)
        except NotPositive:
            continue


def max_diagonal_variation(matrix: np.ndarray) -> float:
    """Largest spread of entries along any diagonal; zero for a Toeplitz matrix."""
    n = matrix.shape[0]
    spread = 0.0
    for offset in range(-(n - 1), n):
        diagonal = np.diagonal(matrix, offset)
        spread = max(spread, float(diagonal.max() - diagonal.min()))
    return spread
