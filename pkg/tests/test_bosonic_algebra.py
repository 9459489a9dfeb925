import numpy as np
import pytest

from modules.bosonic_algebra.bosonic_algebra import (
    FockSpaceLayout, OperatorMatrix, annihilation, number_operator, ladder,
    tensor_embed, embed_product, identity, interior_mask, mode_expectation,
    matrix_exp, displacement, squeeze, quadrature, quadrature_extent, vacuum,
)
from validation import (
    InvalidDimensionError, LayoutMismatchError, HermiticityViolationError,
)


def test_annihilation_small_dims():
    assert np.array_equal(annihilation(2).entries, np.array([[0, 1], [0, 0]], dtype=complex))
    a3 = annihilation(3).entries
    assert np.allclose(np.diag(a3, k=1), [1.0, np.sqrt(2.0)])
    assert np.count_nonzero(a3) == 2


def test_annihilation_rejects_dim_below_two():
    with pytest.raises(InvalidDimensionError):
        annihilation(1)


def test_commutator_truncation_artifact():
    a = annihilation(8)
    comm = a.commutator(a.dagger()).entries
    expected = np.eye(8, dtype=complex)
    expected[7, 7] = -7.0
    assert np.allclose(comm, expected, atol=1e-14)


def test_number_operator_is_exact_diagonal():
    a = annihilation(6)
    assert np.allclose((a.dagger() @ a).entries, number_operator(6).entries)


def test_layout_invariants():
    layout = FockSpaceLayout((3, 4), ('cavity', 'mechanical'))
    assert layout.total_dim == 12
    assert layout.index_of('mechanical') == 1
    with pytest.raises(InvalidDimensionError):
        FockSpaceLayout((1, 4))
    with pytest.raises(LayoutMismatchError):
        FockSpaceLayout((3, 4), ('cavity', 'cavity'))


def test_tensor_embed_ordering():
    layout = FockSpaceLayout((2, 2), ('cavity', 'mechanical'))
    a = annihilation(2)
    embedded = tensor_embed(a, 0, layout).entries
    assert np.array_equal(embedded, np.kron(a.entries, np.eye(2)))


def test_embedding_identity_is_global_identity():
    layout = FockSpaceLayout((3, 2, 4))
    assert np.array_equal(tensor_embed(np.eye(2), 1, layout).entries, identity(layout).entries)


def test_modes_commute_exactly():
    layout = FockSpaceLayout((4, 4))
    a = tensor_embed(ladder(4), 0, layout)
    b = tensor_embed(ladder(4), 1, layout)
    assert np.max(np.abs(a.commutator(b).entries)) == 0.0


def test_embed_dimension_mismatch():
    layout = FockSpaceLayout((4, 5))
    with pytest.raises(LayoutMismatchError):
        tensor_embed(ladder(4), 1, layout)
    with pytest.raises(LayoutMismatchError):
        embed_product(layout, {2: ladder(4)})


def test_operator_matrix_is_read_only():
    a = annihilation(3)
    with pytest.raises(ValueError):
        a.entries[0, 1] = 5.0


def test_check_hermitian():
    x = OperatorMatrix(FockSpaceLayout((5,)), quadrature(5))
    assert x.check_hermitian() is x
    with pytest.raises(HermiticityViolationError):
        annihilation(5).check_hermitian()


def test_matrix_exp_of_zero_is_identity():
    layout = FockSpaceLayout((5,))
    zero = OperatorMatrix(layout, np.zeros((5, 5)))
    assert np.allclose(matrix_exp(zero).entries, np.eye(5), atol=1e-15)


def test_matrix_exp_parity_operator():
    parity = matrix_exp(1j * np.pi * number_operator(4))
    assert np.allclose(parity.entries, np.diag([1, -1, 1, -1]), atol=1e-12)


def test_displacement_inverse_and_unitarity():
    d_plus = displacement(40, 0.5)
    d_minus = displacement(40, -0.5)
    assert np.allclose((d_plus @ d_minus).entries, np.eye(40), atol=1e-10)
    assert d_plus.unitarity_error() < 1e-10


def test_displacement_zero_is_identity():
    assert np.allclose(displacement(10, 0.0).entries, np.eye(10), atol=1e-15)


def test_displaced_vacuum_occupation():
    d = displacement(60, 1.2)
    n = number_operator(60)
    psi = d.entries[:, 0]
    assert np.vdot(psi, n.entries @ psi).real == pytest.approx(1.44, abs=1e-8)


def test_displacement_conjugation_interior():
    dim, x = 60, 0.3
    d = displacement(dim, x)
    b = annihilation(dim)
    shifted = (d.dagger() @ b @ d).entries
    expected = b.entries - x * np.eye(dim)
    interior = slice(0, dim - 20)
    assert np.allclose(shifted[interior, interior], expected[interior, interior], atol=1e-9)


def test_squeezed_vacuum_quadrature_variance():
    dim, r = 80, 0.3
    s = squeeze(dim, r)
    psi = s.entries[:, 0]
    x = quadrature(dim)
    assert np.vdot(psi, x @ x @ psi).real == pytest.approx(np.exp(2 * r), abs=1e-6)


def test_squeeze_zero_and_inverse():
    z = 0.4 + 0.3j
    assert np.allclose(squeeze(12, 0.0).entries, np.eye(12), atol=1e-15)
    assert np.allclose((squeeze(60, z) @ squeeze(60, -z)).entries, np.eye(60), atol=1e-9)
    assert squeeze(60, z).unitarity_error() < 1e-10


@pytest.mark.parametrize('dim', [2, 5, 17, 40])
def test_quadrature_extent_is_top_eigenvalue(dim):
    assert quadrature_extent(dim) == pytest.approx(np.max(np.linalg.eigvalsh(quadrature(dim))), abs=1e-9)


def test_quadrature_extent_grows_with_dimension():
    extents = [quadrature_extent(d) for d in range(2, 30)]
    assert extents[0] == pytest.approx(1.0)
    assert all(b > a for a, b in zip(extents, extents[1:]))
    with pytest.raises(InvalidDimensionError):
        quadrature_extent(1)


def test_interior_mask_counts():
    layout = FockSpaceLayout((4, 5))
    mask = interior_mask(layout, (1, 2))
    assert mask.sum() == 3 * 3
    assert mask[0] and not mask[-1]


def test_mode_expectation_matches_embedded_operator():
    layout = FockSpaceLayout((3, 4), ('cavity', 'mechanical'))
    rng = np.random.default_rng(7)
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi /= np.linalg.norm(psi)
    op = quadrature(4)
    direct = np.vdot(psi, tensor_embed(op, 1, layout).entries @ psi)
    assert mode_expectation(psi, layout, 1, op) == pytest.approx(direct, abs=1e-12)


def test_vacuum_state():
    state = vacuum(FockSpaceLayout((3, 3)))
    assert state[0] == 1.0 and np.count_nonzero(state) == 1
