import math

import numpy as np
import pytest

from satsvm import (
    CapacityError,
    KernelSpec,
    ShapeError,
    gram_matrix,
    kernel_eval,
    kernel_row,
)


class TestKernelEval:
    def test_gaussian_zero_distance(self):
        x = np.array([0.3, -1.2, 4.0])
        assert kernel_eval(KernelSpec.gaussian(1.0), x, x) == 1.0

    def test_gaussian_known_value(self):
        k = kernel_eval(KernelSpec.gaussian(2.0), np.array([0.0, 0.0]), np.array([2.0, 0.0]))
        assert k == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_linear_dot(self):
        assert kernel_eval(KernelSpec.linear(), np.array([1.0, 2.0]), np.array([3.0, -1.0])) == 1.0

    def test_dimension_mismatch_reports_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2,\).*\(3,\)"):
            kernel_eval(KernelSpec.gaussian(1.0), np.zeros(2), np.zeros(3))

    def test_sigma_validation(self):
        from satsvm import ParameterError

        with pytest.raises(ParameterError, match="sigma"):
            KernelSpec.gaussian(0.0)


class TestGramMatrix:
    def test_identical_rows(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0]])
        K = gram_matrix(KernelSpec.gaussian(1.0), X)
        assert (K.entries == np.ones((2, 2))).all()

    def test_linear_identity_rows(self):
        X = np.eye(2)
        K = gram_matrix(KernelSpec.linear(), X)
        assert (K.entries == np.eye(2)).all()

    def test_gaussian_chain(self):
        X = np.array([[0.0], [1.0], [2.0]])
        K = gram_matrix(KernelSpec.gaussian(1.0), X).entries
        assert (np.diag(K) == 1.0).all()
        assert K[0, 1] == pytest.approx(math.exp(-1.0), abs=1e-15)
        assert K[1, 2] == pytest.approx(math.exp(-1.0), abs=1e-15)
        assert K[0, 2] == pytest.approx(math.exp(-4.0), abs=1e-15)

    def test_symmetry_bit_exact(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((30, 4))
        for spec in (KernelSpec.gaussian(0.7), KernelSpec.linear()):
            K = gram_matrix(spec, X).entries
            assert (K == K.T).all()

    def test_gaussian_diagonal_exactly_one_and_range(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((25, 3))
        K = gram_matrix(KernelSpec.gaussian(1.3), X).entries
        assert (np.diag(K) == 1.0).all()
        assert (K > 0).all() and (K <= 1.0).all()

    def test_positive_semidefinite_smoke(self):
        rng = np.random.default_rng(42)
        X = rng.standard_normal((5, 2))
        K = gram_matrix(KernelSpec.gaussian(1.0), X).entries
        assert np.linalg.eigvalsh(K).min() >= -1e-9

    def test_entries_read_only(self):
        K = gram_matrix(KernelSpec.gaussian(1.0), np.zeros((3, 2)))
        with pytest.raises(ValueError):
            K.entries[0, 0] = 5.0

    def test_ragged_and_empty_rejected(self):
        with pytest.raises(ShapeError):
            gram_matrix(KernelSpec.gaussian(1.0), np.zeros((0, 2)))
        with pytest.raises((ShapeError, ValueError)):
            gram_matrix(KernelSpec.gaussian(1.0), [[1.0, 2.0], [3.0]])

    def test_capacity_cap(self):
        X = np.zeros((20001, 1))
        with pytest.raises(CapacityError, match="20000"):
            gram_matrix(KernelSpec.gaussian(1.0), X)


class TestKernelRow:
    def test_row_values(self):
        X = np.array([[0.0], [1.0], [2.0]])
        K = gram_matrix(KernelSpec.gaussian(1.0), X)
        row = kernel_row(K, 1)
        assert row == pytest.approx([math.exp(-1.0), 1.0, math.exp(-1.0)], abs=1e-15)

    def test_identity_like_first_row(self):
        K = gram_matrix(KernelSpec.linear(), np.eye(2))
        assert (kernel_row(K, 0) == np.array([1.0, 0.0])).all()

    def test_out_of_range(self):
        K = gram_matrix(KernelSpec.linear(), np.eye(2))
        with pytest.raises(IndexError):
            kernel_row(K, 2)
        with pytest.raises(IndexError):
            kernel_row(K, -1)

    def test_row_matches_eval(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((12, 3))
        spec = KernelSpec.gaussian(0.8)
        K = gram_matrix(spec, X)
        for j, i in [(0, 7), (5, 5), (11, 2)]:
            assert kernel_row(K, j)[i] == pytest.approx(kernel_eval(spec, X[j], X[i]), abs=1e-15)
