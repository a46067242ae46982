import unittest
from unittest.mock import patch

import numpy as np

from src.config import Config
from src.doi import (
    DOIKernel,
    ResidualOperator,
    derivative_term_sa,
    derivative_term_unitary,
    doi_apply,
    koplienko_residual_direct,
    koplienko_residual_doi,
    koplienko_residual_sa,
    neidhardt_residual_unitary,
    perturbation_diff_sa,
    perturbation_diff_unitary,
)
from src.exceptions import PreconditionError
from src.families import circle_family, line_family
from src.funcmodel import CircleFunction, LineFunction
from src.spectral_core import dagger, eig_hermitian, eig_unitary, matrix_function, s2
from src.verify import InstanceSpec, gen_pair_sa, gen_pair_unitary


def sa_pair(dim, seed, eps=0.1):
    return gen_pair_sa(InstanceSpec("sa", dim, seed, eps))


def unitary_pair(dim, seed, eps=0.1):
    return gen_pair_unitary(InstanceSpec("unitary", dim, seed, eps))


class TestDoiApply(unittest.TestCase):
    """Test the finite double operator integral"""

    def test_constant_kernel_is_identity(self):
        a, k = sa_pair(5, 1)
        b = a + k
        result = doi_apply(eig_hermitian(b), eig_hermitian(a), DOIKernel.constant(), k)
        np.testing.assert_allclose(result, k, atol=1e-13)

    def test_separable_kernel(self):
        a, k = sa_pair(5, 2)
        b = a + k
        f = np.cos
        g = lambda x: x ** 2 + 1j * x  # noqa: E731
        result = doi_apply(eig_hermitian(b), eig_hermitian(a), DOIKernel.separable(f, g), k)
        expected = matrix_function(eig_hermitian(b), f) @ k @ matrix_function(eig_hermitian(a), g)
        np.testing.assert_allclose(result, expected, atol=1e-12)

    def test_hilbert_schmidt_bound(self):
        a, _ = sa_pair(6, 3)
        b, _ = sa_pair(6, 4)
        rng = np.random.default_rng(5)
        t = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        result = doi_apply(eig_hermitian(a), eig_hermitian(b), DOIKernel(lambda u, v: np.sin(u * v)), t)
        self.assertLessEqual(s2(result), s2(t) * (1 + 1e-12))

    def test_linear_in_kernel_and_matrix(self):
        a, k = sa_pair(4, 6)
        spectral = eig_hermitian(a)
        first = DOIKernel(lambda u, v: np.exp(1j * (u - v)))
        second = DOIKernel(lambda u, v: u * v)
        both = DOIKernel(lambda u, v: np.exp(1j * (u - v)) + 2.0 * u * v)
        lhs = doi_apply(spectral, spectral, both, k + 3.0 * a)
        rhs = sum(
            weight * doi_apply(spectral, spectral, kernel, t)
            for weight, kernel in ((1.0, first), (2.0, second))
            for t in (k, 3.0 * a)
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-11)

    def test_dimension_mismatch(self):
        spectral = eig_hermitian(np.eye(3))
        with self.assertRaises(PreconditionError):
            doi_apply(spectral, spectral, DOIKernel.constant(), np.eye(2))


class TestPerturbationFormulas(unittest.TestCase):
    """Test first-order perturbation and derivative formulas"""

    def test_equal_operators(self):
        a, _ = sa_pair(4, 7)
        np.testing.assert_allclose(perturbation_diff_sa(a, a, LineFunction.exponential(1.0)), 0, atol=1e-14)

    def test_linear_function(self):
        a, k = sa_pair(4, 8)
        result = perturbation_diff_sa(a, a + k, LineFunction.build([1.0, 2.5]))
        np.testing.assert_allclose(result, 2.5 * k, atol=1e-13)

    def test_square_by_hand(self):
        a = np.diag([0.0, 1.0])
        k = np.array([[0.0, 1.0], [1.0, 0.0]])
        b = a + k
        result = perturbation_diff_sa(a, b, LineFunction.build([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(result, b @ b - a @ a, atol=1e-13)

    def test_matches_matrix_function_difference(self):
        for index, (name, phi) in enumerate(line_family()):
            a, k = sa_pair(2 + index % 10, 50 + index)
            b = a + k
            direct = matrix_function(eig_hermitian(b), phi.evaluate) - matrix_function(eig_hermitian(a), phi.evaluate)
            error = np.linalg.norm(perturbation_diff_sa(a, b, phi) - direct)
            self.assertLessEqual(error, 1e-9 * (1 + np.linalg.norm(direct)), name)

    def test_unitary_perturbation(self):
        u, v = unitary_pair(6, 9)
        for name, phi in circle_family():
            direct = matrix_function(eig_unitary(v), phi.evaluate) - matrix_function(eig_unitary(u), phi.evaluate)
            error = np.linalg.norm(perturbation_diff_unitary(u, v, phi) - direct)
            self.assertLessEqual(error, 1e-9 * (1 + np.linalg.norm(direct)), name)

    def test_derivative_of_square(self):
        a, k = sa_pair(5, 10)
        result = derivative_term_sa(a, k, LineFunction.build([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(result, a @ k + k @ a, atol=1e-12)

    def test_derivative_commuting(self):
        a = np.diag([0.2, -1.0, 3.0])
        k = np.diag([1.0, 2.0, -0.5])
        phi = LineFunction.exponential(1.5)
        expected = np.diag(1.5j * np.exp(1.5j * np.diag(a))) @ k
        np.testing.assert_allclose(derivative_term_sa(a, k, phi), expected, atol=1e-12)

    def test_unitary_derivative_identity_function(self):
        u, _ = unitary_pair(5, 11)
        a, _ = sa_pair(5, 12)
        np.testing.assert_allclose(
            derivative_term_unitary(u, a, CircleFunction.monomial(1)), 1j * a @ u, atol=1e-12
        )

    def test_unitary_derivative_constant_and_scalar(self):
        u, _ = unitary_pair(3, 13)
        a, _ = sa_pair(3, 14)
        np.testing.assert_allclose(derivative_term_unitary(u, a, CircleFunction.monomial(0, 2.0)), 0, atol=1e-15)
        scalar = derivative_term_unitary(np.eye(1), np.array([[0.3]]), CircleFunction.monomial(2))
        self.assertAlmostEqual(complex(scalar[0, 0]), 0.6j, places=15)


class TestResiduals(unittest.TestCase):
    """Test second-order residual operators"""

    def test_square_gives_k_squared(self):
        a, k = sa_pair(6, 15)
        residual = koplienko_residual_sa(a, k, LineFunction.build([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(residual.value, k @ k, atol=1e-15)

    def test_linear_gives_zero(self):
        a, k = sa_pair(6, 16)
        residual = koplienko_residual_sa(a, k, LineFunction.build([3.0, -2.0]))
        self.assertEqual(residual.s1, 0.0)

    def test_scalar_exponential(self):
        residual = koplienko_residual_sa(np.zeros((1, 1)), np.array([[0.7]]), LineFunction.exponential(1.0))
        self.assertAlmostEqual(residual.trace, np.exp(0.7j) - 1 - 0.7j, places=13)

    def test_additive_and_direct_pathways_agree(self):
        a, k = sa_pair(7, 17)
        phi = LineFunction.build([0.0, 0.0, 0.5], [(1.0, 1.0)])
        additive = koplienko_residual_sa(a, k, phi).value
        direct = koplienko_residual_direct(a, k, phi)
        self.assertLessEqual(np.linalg.norm(additive - direct), 1e-10)

    def test_doi_form_agrees(self):
        for index, (name, phi) in enumerate(line_family()):
            a, k = sa_pair(3 + index % 6, 70 + index)
            doi_form = koplienko_residual_doi(a, k, phi).value
            direct = koplienko_residual_sa(a, k, phi).value
            self.assertLessEqual(np.linalg.norm(doi_form - direct), 1e-10, name)

    def test_unitary_equal_pair(self):
        u, _ = unitary_pair(4, 18)
        residual = neidhardt_residual_unitary(u, u, CircleFunction.monomial(3))
        self.assertLessEqual(residual.s1, 1e-12)

    def test_unitary_scalar(self):
        a = 0.4
        v = np.array([[np.exp(1j * a)]])
        for n in (1, 2):
            residual = neidhardt_residual_unitary(np.eye(1), v, CircleFunction.monomial(n))
            self.assertAlmostEqual(residual.trace, np.exp(1j * n * a) - 1 - 1j * n * a, places=13)

    def test_unitary_decomposition(self):
        u, v = unitary_pair(8, 19)
        for name, phi in circle_family():
            residual = neidhardt_residual_unitary(u, v, phi)
            self.assertEqual(len(residual.terms), 3)
            self.assertTrue(residual.decomposition_holds(), name)

    def test_decomposition_tolerance_read_at_call_time(self):
        value = np.eye(2, dtype=complex)
        residual = ResidualOperator(value, (value, 1e-12 * value, np.zeros((2, 2), dtype=complex)))
        self.assertTrue(residual.decomposition_holds())
        with patch.object(Config, "DECOMPOSITION_TOL", 1e-14):
            self.assertFalse(residual.decomposition_holds())
        self.assertTrue(residual.decomposition_holds(1e-12))

    def test_residual_scales_quadratically(self):
        u, _ = unitary_pair(6, 20)
        a, _ = sa_pair(6, 21)
        a = a / s2(a)
        phi = CircleFunction.from_dict({2: 1.0, -3: 0.5})
        norms = []
        for eps in (1e-2, 5e-3):
            v = matrix_function(eig_hermitian(eps * a), lambda x: np.exp(1j * x)) @ u
            norms.append(neidhardt_residual_unitary(u, v, phi).s1)
        self.assertAlmostEqual(norms[0] / norms[1], 4.0, delta=0.1)

    def test_unitary_requires_unitary(self):
        with self.assertRaises(PreconditionError):
            neidhardt_residual_unitary(np.eye(2), 2 * np.eye(2), CircleFunction.monomial(1))


if __name__ == '__main__':
    unittest.main()
