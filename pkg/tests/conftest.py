import numpy as np
import pytest

from src.core.lattice_model import build_coupling, build_eta_chain, build_separable
from src.core.schemas import EtaChainParams
from tests.helpers import random_valid_spec


@pytest.fixture
def eta_chain():
    def make(eta: float, n: int):
        return build_eta_chain(EtaChainParams(eta=eta, n=n))
    return make


@pytest.fixture
def uncoupled():
    def make(n: int, omega_squared: float = 4.0, dimension: int = 1):
        return build_coupling(dimension, (n,) * dimension, {(0,) * dimension: omega_squared})
    return make


@pytest.fixture
def product_2d(eta_chain):
    def make(eta: float, n: int):
        chain = eta_chain(eta, n)
        return build_separable([chain, chain], "product")
    return make


@pytest.fixture
def random_specs():
    def make(count: int, seed: int, n_range=(16, 256)):
        rng = np.random.default_rng(seed)
        return [random_valid_spec(rng, int(rng.integers(n_range[0], n_range[1] + 1))) for _ in range(count)]
    return make
