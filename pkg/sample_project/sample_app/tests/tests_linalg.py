import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from django_dominative_laplace import exceptions
from django_dominative_laplace.linalg import (
    as_symmetric,
    is_orthonormal,
    jacobi_eigen,
    jacobi_eigenvalues,
    largest_eig,
    rayleigh,
    smallest_eig,
)
from django_dominative_laplace.sampling import make_rng, random_symmetric
from django_dominative_laplace.tests.tests_base import NumericAssertionsMixin


class AsSymmetricTest(SimpleTestCase):
    def test_mirrors_upper_triangle(self):
        matrix = as_symmetric([[1.0, 2.0], [5.0, 3.0]])
        np.testing.assert_array_equal([[1.0, 2.0], [2.0, 3.0]], matrix)

    def test_rejects_non_square(self):
        with self.assertRaises(exceptions.DimensionError):
            as_symmetric([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_rejects_large_dimension(self):
        with self.assertRaises(exceptions.DimensionError):
            as_symmetric(np.eye(17))

    def test_rejects_non_finite(self):
        with self.assertRaises(exceptions.DomainError):
            as_symmetric([[1.0, math.nan], [0.0, 1.0]])


class JacobiEigenTest(NumericAssertionsMixin, SimpleTestCase):
    def test_diagonal_matrix_needs_no_sweep(self):
        spectrum = jacobi_eigen(np.diag([3.0, -1.0, 2.0]))
        np.testing.assert_array_equal([-1.0, 2.0, 3.0], spectrum.eigenvalues)
        self.assertEqual(0, spectrum.sweeps)
        self.assertArrayClose([1.0, 0.0, 0.0], np.abs(spectrum.top_vector))

    def test_two_by_two(self):
        spectrum = jacobi_eigen([[2.0, 1.0], [1.0, 2.0]])
        self.assertArrayClose([1.0, 3.0], spectrum.eigenvalues, atol=1e-12)
        self.assertArrayClose([1 / math.sqrt(2), 1 / math.sqrt(2)], np.abs(spectrum.top_vector), atol=1e-12)

    def test_one_by_one(self):
        spectrum = jacobi_eigen([[5.0]])
        self.assertEqual(5.0, spectrum.largest)
        self.assertEqual(5.0, spectrum.smallest)

    def test_random_matrices_agree_with_lapack(self):
        rng = make_rng(2024)
        for n in range(1, 17):
            matrix = random_symmetric(rng, n, scale=3.0)
            spectrum = jacobi_eigen(matrix)
            scale = 1.0 + float(np.linalg.norm(matrix))
            self.assertArrayClose(np.linalg.eigvalsh(matrix), spectrum.eigenvalues, atol=1e-10 * scale, rtol=0)
            self.assertTrue(is_orthonormal(spectrum.eigenvectors, tol=1e-10))
            self.assertLessEqual(spectrum.residual(matrix), 1e-10 * scale)
            self.assertTrue(np.all(np.diff(spectrum.eigenvalues) >= 0))

    def test_badly_scaled_matrix_converges(self):
        matrix = np.array([[1e8, 3e7, 0.0], [3e7, -2e8, 1e7], [0.0, 1e7, 5e7]])
        spectrum = jacobi_eigen(matrix)
        self.assertArrayClose(np.linalg.eigvalsh(matrix), spectrum.eigenvalues, atol=1e-10 * np.linalg.norm(matrix))

    def test_sweep_budget_exhausted(self):
        with self.assertLogs("django_dominative_laplace.linalg", level="ERROR"):
            with self.assertRaises(exceptions.EigenSolverError) as context:
                jacobi_eigen([[1.0, 1.0], [1.0, 2.0]], max_sweeps=0)
        self.assertEqual(0, context.exception.sweeps)
        self.assertGreater(context.exception.off_diagonal, 0)

    def test_rejects_nonpositive_tolerance(self):
        with self.assertRaises(exceptions.DomainError):
            jacobi_eigen(np.eye(2), tol=0.0)

    def test_symmetrizes_input(self):
        spectrum = jacobi_eigen([[0.0, 1.0], [-7.0, 0.0]])
        self.assertArrayClose([-1.0, 1.0], spectrum.eigenvalues, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False),
            min_size=9,
            max_size=9,
        )
    )
    def test_trace_is_sum_of_eigenvalues(self, entries):
        matrix = as_symmetric(np.reshape(entries, (3, 3)))
        spectrum = jacobi_eigen(matrix)
        scale = 1.0 + float(np.linalg.norm(matrix))
        self.assertLessEqual(abs(float(np.sum(spectrum.eigenvalues)) - float(np.trace(matrix))), 1e-10 * scale)
        self.assertLessEqual(spectrum.residual(matrix), 1e-10 * scale)


class BatchedJacobiTest(NumericAssertionsMixin, SimpleTestCase):
    def test_stack_agrees_with_single_matrices(self):
        rng = make_rng(77)
        for n in (1, 2, 3, 5, 8):
            stack = np.array([random_symmetric(rng, n, scale=3.0) for _ in range(25)])
            eigenvalues = jacobi_eigenvalues(stack)
            self.assertEqual((25, n), eigenvalues.shape)
            for matrix, row in zip(stack, eigenvalues):
                scale = 1.0 + float(np.linalg.norm(matrix))
                self.assertArrayClose(np.linalg.eigvalsh(matrix), row, atol=1e-10 * scale, rtol=0)
                self.assertArrayClose(jacobi_eigen(matrix).eigenvalues, row, atol=1e-10 * scale, rtol=0)

    def test_mixed_scales_and_diagonal_members(self):
        stack = np.array(
            [
                np.diag([3.0, -1.0, 2.0]),
                [[1e8, 3e7, 0.0], [3e7, -2e8, 1e7], [0.0, 1e7, 5e7]],
                [[1e-6, 2e-6, 0.0], [2e-6, 1e-6, 0.0], [0.0, 0.0, 0.0]],
            ]
        )
        eigenvalues = jacobi_eigenvalues(stack)
        np.testing.assert_array_equal([-1.0, 2.0, 3.0], eigenvalues[0])
        self.assertArrayClose(np.linalg.eigvalsh(stack[1]), eigenvalues[1], atol=1e-10 * np.linalg.norm(stack[1]))
        self.assertArrayClose([-1e-6, 0.0, 3e-6], eigenvalues[2], atol=1e-15)

    def test_symmetrizes_input(self):
        eigenvalues = jacobi_eigenvalues([[[0.0, 1.0], [-7.0, 0.0]]])
        self.assertArrayClose([[-1.0, 1.0]], eigenvalues, atol=1e-12)

    def test_empty_stack(self):
        self.assertEqual((0, 3), jacobi_eigenvalues(np.zeros((0, 3, 3))).shape)

    def test_sweep_budget_exhausted(self):
        with self.assertLogs("django_dominative_laplace.linalg", level="ERROR"):
            with self.assertRaises(exceptions.EigenSolverError):
                jacobi_eigenvalues([np.eye(2), [[1.0, 1.0], [1.0, 2.0]]], max_sweeps=0)

    def test_rejects_invalid_stacks(self):
        with self.assertRaises(exceptions.DimensionError):
            jacobi_eigenvalues(np.eye(3))
        with self.assertRaises(exceptions.DimensionError):
            jacobi_eigenvalues(np.zeros((2, 17, 17)))
        with self.assertRaises(exceptions.DomainError):
            jacobi_eigenvalues([[[1.0, math.inf], [0.0, 1.0]]])
        with self.assertRaises(exceptions.DomainError):
            jacobi_eigenvalues([np.eye(2)], tol=0.0)


class EigenHelpersTest(NumericAssertionsMixin, SimpleTestCase):
    def test_largest_and_smallest(self):
        matrix = np.diag([1.0, -4.0, 2.5])
        top, top_vector = largest_eig(matrix)
        bottom, bottom_vector = smallest_eig(matrix)
        self.assertEqual(2.5, top)
        self.assertEqual(-4.0, bottom)
        self.assertArrayClose([0.0, 0.0, 1.0], np.abs(top_vector))
        self.assertArrayClose([0.0, 1.0, 0.0], np.abs(bottom_vector))

    def test_rayleigh_quotient(self):
        matrix = np.diag([1.0, 3.0])
        self.assertClose(2.0, rayleigh(matrix, [1.0, 1.0]))
        self.assertClose(3.0, rayleigh(matrix, [0.0, -2.0]))

    def test_rayleigh_of_zero_vector(self):
        with self.assertRaises(exceptions.DomainError):
            rayleigh(np.eye(2), [0.0, 0.0])

    def test_rayleigh_is_bounded_by_top_eigenvalue(self):
        rng = make_rng(5)
        matrix = random_symmetric(rng, 4)
        top, _ = largest_eig(matrix)
        for _ in range(20):
            self.assertLessEqual(rayleigh(matrix, rng.standard_normal(4)), top + 1e-12)
