import json

import numpy as np
import pytest

from hermitian_ops import (
    DimensionMismatchError,
    HermitianOperator,
    NonHermitianError,
    NotPSDError,
    eig,
    kron,
    matrix_power,
    op_norm,
    subset_check,
    support_projector,
    trace,
)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_psd(rng: np.random.Generator, dim: int, rank: int = 0) -> np.ndarray:
    g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    return g @ g.conj().T


class TestHermitianOperator:
    """Tests for HermitianOperator construction and the JSON codec."""

    def test_symmetrizes_small_asymmetry(self) -> None:
        op = HermitianOperator.from_matrix([[1.0, 2.0 + 1e-13], [2.0, 3.0]])
        assert np.array_equal(op.entries, op.entries.conj().T)

    def test_rejects_non_hermitian(self) -> None:
        with pytest.raises(NonHermitianError):
            HermitianOperator.from_matrix([[0.0, 1.0], [0.0, 0.0]])

    def test_rejects_non_square(self) -> None:
        with pytest.raises(DimensionMismatchError):
            HermitianOperator.from_matrix(np.zeros((2, 3)))

    def test_entries_are_read_only(self) -> None:
        op = HermitianOperator.identity(2)
        with pytest.raises(ValueError):
            op.entries[0, 0] = 5

    def test_json_round_trip(self) -> None:
        op = HermitianOperator.from_matrix([[1.0, -1j], [1j, 2.0]])
        parsed = HermitianOperator.from_json(op.to_json())
        assert parsed == op

    def test_json_rejects_length_mismatch(self) -> None:
        text = json.dumps({"dim": 2, "entries": [[1, 0], [0, 0], [0, 0]]})
        with pytest.raises(DimensionMismatchError):
            HermitianOperator.from_json(text)

    def test_json_rejects_non_finite(self) -> None:
        data = {"dim": 1, "entries": [[float("nan"), 0.0]]}
        with pytest.raises(ValueError):
            HermitianOperator.from_json_dict(data)


class TestSpectral:
    """Tests for eig and matrix functions."""

    def test_diagonal_spectrum(self) -> None:
        decomposition = eig(HermitianOperator.diag([1, 2]))
        assert np.allclose(decomposition.eigenvalues, [1, 2])
        assert np.allclose(np.abs(decomposition.eigenvectors), np.eye(2))

    def test_pauli_x_spectrum(self) -> None:
        decomposition = eig(HermitianOperator.from_matrix([[0, 1], [1, 0]]))
        assert np.allclose(decomposition.eigenvalues, [-1, 1])

    def test_random_reconstruction(self) -> None:
        rng = np.random.default_rng(11)
        h = random_hermitian(rng, 6)
        decomposition = eig(h)
        u = decomposition.eigenvectors
        scale = 1 + np.max(np.abs(h))
        assert np.max(np.abs(decomposition.reconstruct() - h)) <= 1e-10 * scale
        assert np.max(np.abs(u.conj().T @ u - np.eye(6))) <= 1e-10
        assert np.all(np.diff(decomposition.eigenvalues) >= 0)

    def test_square_root(self) -> None:
        result = matrix_power(HermitianOperator.diag([4, 9]), 0.5)
        assert np.allclose(result.entries, np.diag([2, 3]))

    def test_generalized_inverse(self) -> None:
        result = matrix_power(HermitianOperator.diag([2, 0]), -1)
        assert np.allclose(result.entries, np.diag([0.5, 0]))

    def test_cube_root_identity(self) -> None:
        rng = np.random.default_rng(3)
        h = random_psd(rng, 5)
        root = matrix_power(h, 1 / 3).entries
        assert np.max(np.abs(root @ root @ root - h)) <= 1e-9 * max(1.0, op_norm(h))

    def test_power_composition_on_support(self) -> None:
        rng = np.random.default_rng(5)
        h = random_psd(rng, 4, rank=2)
        nested = matrix_power(matrix_power(h, 0.5), -2)
        direct = matrix_power(h, -1)
        assert np.allclose(nested.entries, direct.entries, atol=1e-9 * op_norm(direct))

    def test_rejects_negative_operator(self) -> None:
        with pytest.raises(NotPSDError):
            matrix_power(HermitianOperator.diag([1, -1]), 0.5)


class TestStructure:
    """Tests for norms, Kronecker products and supports."""

    def test_op_norm(self) -> None:
        assert op_norm(HermitianOperator.diag([-3, 2])) == pytest.approx(3)

    def test_kron_diagonal(self) -> None:
        result = kron(HermitianOperator.diag([1, 2]), HermitianOperator.diag([3, 4]))
        assert np.allclose(result.entries, np.diag([3, 4, 6, 8]))

    def test_kron_trace_multiplicative(self) -> None:
        rng = np.random.default_rng(8)
        a, b = random_hermitian(rng, 3), random_hermitian(rng, 2)
        assert trace(kron(a, b)) == pytest.approx(trace(a) * trace(b), abs=1e-10)

    def test_kron_associative(self) -> None:
        rng = np.random.default_rng(9)
        a, b, c = (random_hermitian(rng, 2) for _ in range(3))
        left = kron(kron(a, b), c).entries
        right = kron(a, kron(b, c)).entries
        assert np.allclose(left, right)

    def test_support_projector_drops_tiny_eigenvalues(self) -> None:
        projector = support_projector(HermitianOperator.diag([1, 1e-14, 0]))
        assert np.allclose(projector.entries, np.diag([1, 0, 0]))

    def test_subset_check(self) -> None:
        inner, outer = HermitianOperator.diag([1, 0]), HermitianOperator.diag([2, 3])
        assert subset_check(inner, outer)
        assert not subset_check(
            HermitianOperator.diag([0, 1]), HermitianOperator.diag([1, 0])
        )
        plus = np.full((2, 2), 0.5)
        assert not subset_check(plus, HermitianOperator.diag([1, 0]))

    def test_subset_check_reflexive(self) -> None:
        rng = np.random.default_rng(21)
        for rank in (1, 2, 4):
            a = random_psd(rng, 4, rank=rank)
            assert subset_check(a, a)
