import numpy as np
import pytest

from src.core.errors import BadPartition, NumericalIntegrityError, TooLarge
from src.core.lattice_model import dense_potential, site_coordinates
from src.kernels import (
    CirculantKernel,
    DenseKernel,
    Partition,
    build_kernel,
    extract_blocks,
    kernel_row_decay,
    kernel_rows_table,
)
from src.kernels.circulant import _inverse_transform
from tests.helpers import closed_form_r, max_diagonal_variation


def test_uncoupled_rows_are_scalar(uncoupled):
    kernel = build_kernel(uncoupled(16, 4.0))
    expected_sqrt = np.zeros(16)
    expected_sqrt[0] = 2.0
    assert np.allclose(kernel.sqrt_row, expected_sqrt, atol=1e-14)
    assert np.allclose(kernel.inv_sqrt_row, expected_sqrt / 4.0, atol=1e-14)


def test_gapped_chain_has_tridiagonal_square_root(eta_chain):
    row = build_kernel(eta_chain(1.2, 64)).sqrt_row
    assert row[0] == pytest.approx(2.4)
    assert row[1] == pytest.approx(-1.0)
    assert row[63] == pytest.approx(-1.0)
    assert np.allclose(row[2:63], 0.0, atol=1e-12)


def test_rows_are_symmetric_under_lag_reversal(eta_chain):
    kernel = build_kernel(eta_chain(0.6, 50))
    for row in (kernel.sqrt_row, kernel.inv_sqrt_row):
        assert np.allclose(row[1:], row[1:][::-1], atol=1e-14)


def test_circulant_matches_dense(eta_chain):
    spec = eta_chain(1.2, 64)
    circulant, dense = build_kernel(spec, "circulant"), build_kernel(spec, "dense")
    assert isinstance(dense, DenseKernel)
    assert np.allclose(circulant.sqrt_row, dense.sqrt_row, atol=1e-10)
    assert np.allclose(circulant.inv_sqrt_row, dense.inv_sqrt_row, atol=1e-10)
    assert np.allclose(extract_blocks(circulant, 20).A, extract_blocks(dense, 20).A, atol=1e-10)
    assert circulant.log_det_sqrt() == pytest.approx(dense.log_det_sqrt(), rel=1e-10)


def test_square_roots_compose_to_the_potential(eta_chain):
    spec = eta_chain(0.6, 40)
    kernel = CirculantKernel(spec)
    coords = site_coordinates(spec.extents)
    root = kernel.block("sqrt", coords, coords)
    inverse_root = kernel.block("inv_sqrt", coords, coords)
    assert np.allclose(root @ root, dense_potential(spec), atol=1e-9)
    assert np.allclose(root @ inverse_root, np.eye(40), atol=1e-9)


def test_blocks_of_uncoupled_lattice(uncoupled):
    blocks = extract_blocks(build_kernel(uncoupled(4, 4.0)), 2)
    assert np.allclose(blocks.A, 0.5 * np.eye(2))
    assert np.allclose(blocks.D, 2.0 * np.eye(2))
    assert np.allclose(blocks.B, 0.0)
    assert np.allclose(blocks.E, 0.0)
    assert blocks.C.shape == (2, 2)


def test_inner_blocks_are_toeplitz(eta_chain):
    spec = eta_chain(0.6, 64)
    for backend in ("circulant", "dense"):
        blocks = extract_blocks(build_kernel(spec, backend), 24)
        assert max_diagonal_variation(blocks.A) < 1e-10
        assert max_diagonal_variation(blocks.D) < 1e-10


def test_schur_complement_identity(eta_chain):
    blocks = extract_blocks(build_kernel(eta_chain(1.6, 32)), 10)
    complement = blocks.A - blocks.B @ np.linalg.solve(blocks.C, blocks.B.T)
    assert np.allclose(blocks.D, np.linalg.inv(complement), atol=1e-8)


def test_blocks_are_translation_invariant(eta_chain):
    kernel = build_kernel(eta_chain(0.6, 64))
    first = kernel.extract_blocks(Partition.interval(10, 0))
    shifted = kernel.extract_blocks(Partition.interval(10, 57))
    assert np.array_equal(first.A, shifted.A)
    assert np.array_equal(first.D, shifted.D)


@pytest.mark.parametrize("size", [0, 64])
def test_bad_partition_is_rejected(eta_chain, size):
    with pytest.raises(BadPartition):
        extract_blocks(build_kernel(eta_chain(1.2, 64)), size)


def test_partition_half_half():
    assert Partition.half_half(65).extents == (32,)
    assert Partition.half_half(64).extents == (32,)


def test_inverse_root_decays_with_closed_form_rate(eta_chain):
    decay = dict(kernel_row_decay(build_kernel(eta_chain(1.2, 256))))
    lags = np.arange(5, 41)
    slope = np.polyfit(lags, np.log([decay[k] for k in lags]), 1)[0]
    assert slope == pytest.approx(np.log(closed_form_r(1.2)), abs=1e-4)


def test_kernel_rows_table_covers_every_lag(eta_chain):
    table = kernel_rows_table(build_kernel(eta_chain(1.2, 16)))
    assert [k for k, _, _ in table] == list(range(16))
    assert table[0][1] == pytest.approx(2.4)


def test_separable_product_blocks_factorize(eta_chain, product_2d):
    chain_blocks = extract_blocks(build_kernel(eta_chain(1.2, 16)), 3)
    torus_blocks = extract_blocks(build_kernel(product_2d(1.2, 16)), 3)
    assert torus_blocks.A.shape == (9, 9)
    assert np.allclose(torus_blocks.A, np.kron(chain_blocks.A, chain_blocks.A), atol=1e-12)
    assert np.allclose(torus_blocks.D, np.kron(chain_blocks.D, chain_blocks.D), atol=1e-12)


def test_circulant_cross_sum_matches_direct_sum(eta_chain, product_2d):
    for spec, block in ((eta_chain(0.6, 48), Partition.interval(12, 5)), (product_2d(1.2, 12), Partition.hypercube(4, 2))):
        kernel = build_kernel(spec)
        inner, outer = block.sites(spec.extents)
        direct = float(np.abs(kernel.block("inv_sqrt", inner, outer)).sum())
        assert kernel.cross_abs_sum(block) == pytest.approx(direct, rel=1e-10)


def test_dense_kernel_respects_cap(eta_chain):
    with pytest.raises(TooLarge):
        DenseKernel(eta_chain(1.2, 16), cap=10)


def test_unknown_backend(eta_chain):
    with pytest.raises(ValueError):
        build_kernel(eta_chain(1.2, 16), "lanczos")


def test_imaginary_residue_is_an_integrity_failure():
    with pytest.raises(NumericalIntegrityError):
        _inverse_transform(np.array([1.0, 2.0, 3.0, 4.0]), 1e-10, "probe")
