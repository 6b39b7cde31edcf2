import numpy as np
import pytest
from scipy import linalg

from src.core.errors import NotPositive, NotSymmetric, RangeTooLarge, SpecError, TooLarge
from src.core.lattice_model import (
    build_coupling,
    build_separable,
    dense_potential,
    eta_chain_coefficients,
    spec_from_document,
)


def test_eta_chain_coefficients():
    assert eta_chain_coefficients(1.2) == pytest.approx({(0,): 7.76, (1,): -4.8, (2,): 1.0})
    assert eta_chain_coefficients(0.0) == {(0,): 2.0, (1,): 0.0, (2,): 1.0}


def test_eta_zero_chain_is_not_positive_when_pi_half_is_on_the_grid():
    with pytest.raises(NotPositive) as info:
        build_coupling(1, 64, eta_chain_coefficients(0.0))
    assert info.value.mode in ((16,), (48,))


@pytest.mark.parametrize("n", [5, 16, 63, 64])
def test_eta_one_chain_has_a_zero_mode(eta_chain, n):
    with pytest.raises(NotPositive) as info:
        eta_chain(1.0, n)
    assert info.value.mode == (0,)


def test_negative_coefficient_sum_is_not_positive():
    with pytest.raises(NotPositive) as info:
        build_coupling(1, 8, {0: 2.0, 1: -1.5})
    assert info.value.mode == (0,)
    assert info.value.value == pytest.approx(-1.0)


def test_symmetry_is_completed(eta_chain):
    spec = build_coupling(1, 16, {0: 3.0, 1: -1.0})
    assert spec.coefficient(-1) == -1.0
    assert spec.coefficient(15) == -1.0
    assert spec.range == 2


def test_conflicting_mirror_values_are_rejected():
    with pytest.raises(NotSymmetric):
        build_coupling(1, 16, {0: 3.0, 1: -1.0, -1: -0.5})


def test_duplicate_lag_with_other_value_is_rejected():
    with pytest.raises(SpecError):
        build_coupling(1, 16, [(1, -1.0), (17, -0.5), (0, 3.0)])


def test_range_must_fit_the_ring():
    with pytest.raises(RangeTooLarge):
        build_coupling(1, 4, {0: 3.0, 2: 0.5})


def test_eigenvalues_follow_the_spectral_function(eta_chain):
    spec = eta_chain(1.2, 32)
    theta = 2 * np.pi * np.arange(32) / 32
    assert np.allclose(spec.eigenvalues, (2.4 - 2 * np.cos(theta)) ** 2, atol=1e-12)
    assert spec.min_eigenvalue == pytest.approx(0.16)
    assert not spec.eigenvalues.flags.writeable


def test_dense_potential_matches_circulant_spectrum(eta_chain):
    spec = eta_chain(0.6, 40)
    dense = dense_potential(spec)
    assert np.allclose(dense, dense.T)
    assert np.allclose(dense[0], spec.coefficient_array())
    assert np.allclose(linalg.eigvalsh(dense), np.sort(spec.eigenvalues.ravel()), atol=1e-10)


def test_dense_potential_of_small_ring():
    dense = dense_potential(build_coupling(1, 4, {0: 3.0, 1: -1.0}))
    assert np.allclose(dense[0], [3.0, -1.0, 0.0, -1.0])
    for i in range(4):
        assert np.allclose(dense[i], np.roll(dense[0], i))
    # the zero-mode version of the same ring has no valid spec
    with pytest.raises(NotPositive):
        build_coupling(1, 4, {0: 2.0, 1: -1.0})


def test_dense_potential_of_small_torus():
    spec = build_coupling(2, (3, 3), {(0, 0): 5.0, (1, 0): -1.0, (0, 1): -1.0})
    dense = dense_potential(spec)
    assert dense.shape == (9, 9)
    assert np.allclose(dense, dense.T)
    assert np.allclose(dense.sum(axis=1), 1.0)
    assert spec.min_eigenvalue == pytest.approx(1.0)


@pytest.mark.parametrize("shape", [(24,), (6, 5)])
def test_dense_potential_commutes_with_cyclic_shift(eta_chain, shape):
    chain = eta_chain(1.2, shape[0])
    if len(shape) == 1:
        spec = chain
        shift = np.roll(np.eye(shape[0]), 1, axis=1)
    else:
        spec = build_separable([chain, eta_chain(1.6, shape[1])], "sum")
        shift = np.kron(np.roll(np.eye(shape[0]), 1, axis=1), np.eye(shape[1]))
    dense = dense_potential(spec)
    assert np.max(np.abs(shift @ dense - dense @ shift)) < 1e-12


def test_dense_potential_respects_cap(eta_chain):
    with pytest.raises(TooLarge):
        dense_potential(eta_chain(1.2, 16), cap=10)


def test_separable_product_and_sum(eta_chain):
    x, y = eta_chain(1.2, 12), eta_chain(1.6, 10)
    product = build_separable([x, y], "product")
    total = build_separable([x, y], "sum")
    assert product.extents == (12, 10)
    assert np.allclose(product.eigenvalues, np.multiply.outer(x.eigenvalues, y.eigenvalues))
    assert np.allclose(total.eigenvalues, np.add.outer(x.eigenvalues, y.eigenvalues))
    with pytest.raises(ValueError):
        build_separable([x, y], "tensor")


def test_document_round_trip_and_fingerprint(eta_chain):
    spec = eta_chain(1.2, 64)
    again = spec_from_document(spec.to_document())
    assert again.coefficients == spec.coefficients
    assert again.fingerprint() == spec.fingerprint()
    assert spec.resized(65).fingerprint() != spec.fingerprint()
