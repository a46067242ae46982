import math
import unittest

import numpy as np

from src.exceptions import DomainError, PreconditionError
from src.funcmodel import (
    CircleFunction,
    LineFunction,
    breve_eval,
    derivative,
    difference,
    difference_integral,
    mode_sup_norm,
    positive_shift,
)


class TestCircleFunction(unittest.TestCase):
    """Test trigonometric polynomials"""

    def test_zero_coefficients_dropped(self):
        phi = CircleFunction.from_dict({2: 1.0, 3: 0.0, -1: 0.5j})
        self.assertEqual(phi.coeffs, ((-1, 0.5j), (2, 1 + 0j)))
        self.assertEqual(phi.max_degree, 2)

    def test_evaluate_on_circle(self):
        phi = CircleFunction.from_dict({1: 1.0, -1: 1.0})
        theta = np.linspace(0, 2 * np.pi, 7)
        np.testing.assert_allclose(phi(np.exp(1j * theta)), 2 * np.cos(theta), atol=1e-14)

    def test_arithmetic(self):
        a = CircleFunction.monomial(2, 3.0)
        b = CircleFunction.monomial(2, 1.0) + CircleFunction.monomial(-1)
        self.assertEqual((a - b).as_dict(), {-1: -1 + 0j, 2: 2 + 0j})
        self.assertTrue((a - a).is_zero)

    def test_sup_norm(self):
        self.assertEqual(CircleFunction.monomial(5, 2.0).sup_norm(), 2.0)
        phi = CircleFunction.from_dict({3: 0.5, -3: 0.5})
        self.assertAlmostEqual(phi.sup_norm(), 1.0, places=12)
        self.assertEqual(CircleFunction().sup_norm(), 0.0)

    def test_sup_bound_covers_off_grid_maximum(self):
        points = 1024
        w = np.exp(-1j * np.pi / points)
        phi = CircleFunction.from_dict({0: 1.0, 1: w, 2: w ** 2})
        self.assertLess(phi.sup_norm(points), 3.0 - 1e-6)
        bound = phi.sup_bound(points)
        self.assertGreaterEqual(bound, 3.0)
        self.assertLessEqual(bound, 3.0 * (1.0 + 1e-5))
        self.assertEqual(CircleFunction.monomial(3, 2.0).sup_bound(), 2.0)

    def test_positive_shift_coefficients(self):
        phi = CircleFunction.from_dict({-2: 1.0, 0: 2.0, 1: 3.0, 4: 4.0})
        self.assertEqual(positive_shift(phi).as_dict(), {0: 3 + 0j, 3: 4 + 0j})
        self.assertEqual(positive_shift(phi, 2).as_dict(), {2: 4 + 0j})


class TestLineFunction(unittest.TestCase):
    """Test polynomial plus exponential sums on the line"""

    def test_build_merges_modes(self):
        phi = LineFunction.build([1.0], [(2.0, 1.0), (2.0, 0.5), (1.0, 1.0), (1.0, -1.0)])
        self.assertEqual(phi.poly, (1 + 0j, 0j, 0j))
        self.assertEqual(phi.modes, ((2.0, 1.5 + 0j),))

    def test_zero_frequency_rejected(self):
        with self.assertRaises(PreconditionError):
            LineFunction.exponential(0.0)

    def test_too_many_polynomial_terms(self):
        with self.assertRaises(PreconditionError):
            LineFunction.build([0, 0, 0, 1])

    def test_evaluate(self):
        phi = LineFunction.build([1.0, 2.0, 3.0], [(1.0, 1.0)])
        x = np.array([0.0, 1.0, -2.0])
        np.testing.assert_allclose(phi(x), 1 + 2 * x + 3 * x ** 2 + np.exp(1j * x), atol=1e-14)

    def test_dilate(self):
        phi = LineFunction.build([0.0, 1.0, 1.0], [(1.5, 2.0)])
        x = np.linspace(-3, 3, 11)
        np.testing.assert_allclose(phi.dilate(2.0)(x), phi(2.0 * x), atol=1e-13)

    def test_sup_norm(self):
        self.assertEqual(LineFunction.build([0.0, 1.0]).sup_norm(), math.inf)
        self.assertEqual(LineFunction.exponential(3.0, 2.0).sup_norm(), 2.0)
        two_modes = LineFunction.build(modes=[(1.0, 1.0), (2.0, 1.0)])
        self.assertAlmostEqual(two_modes.sup_norm(), 2.0, places=6)

    def test_mode_sup_norm_with_constant(self):
        self.assertEqual(mode_sup_norm(np.array([1.0]), np.array([2j]), 1.0), 3.0)
        self.assertEqual(mode_sup_norm(np.array([]), np.array([]), -4.0), 4.0)


class TestDerivative(unittest.TestCase):
    """Test derivative conventions"""

    def test_complex_derivative_of_cube(self):
        self.assertEqual(derivative(CircleFunction.monomial(3)).as_dict(), {2: 3 + 0j})

    def test_tangential_second_derivative(self):
        for n in (1, 4, -3):
            result = derivative(CircleFunction.monomial(n), 2, "tangential")
            self.assertEqual(result.as_dict(), {n: complex(-n * n)})

    def test_line_second_derivative(self):
        phi = LineFunction.build([0.0, 0.0, 1.0], [(1.0, 1.0)])
        result = derivative(phi, 2)
        self.assertEqual(result.poly, (2 + 0j, 0j, 0j))
        self.assertEqual(result.modes, ((1.0, -1 + 0j),))

    def test_invalid_requests(self):
        with self.assertRaises(PreconditionError):
            derivative(CircleFunction.monomial(1), 3)
        with self.assertRaises(PreconditionError):
            derivative(LineFunction.exponential(1.0), 1, "tangential")
        with self.assertRaises(PreconditionError):
            derivative(CircleFunction.monomial(1), 1, "radial")


class TestBreveEval(unittest.TestCase):
    """Test divided differences"""

    def test_circle_square(self):
        phi = CircleFunction.monomial(2)
        self.assertAlmostEqual(complex(breve_eval(phi, 1.0, 1j)), 1 + 1j, places=14)

    def test_diagonal_is_derivative(self):
        phi = CircleFunction.from_dict({3: 1.0, -1: 2.0})
        z = np.exp(0.7j)
        expected = 3 * z ** 2 - 2.0 / z ** 2
        self.assertAlmostEqual(complex(breve_eval(phi, z, z)), expected, places=12)
        line = LineFunction.build([0.0, 0.0, 1.0], [(2.0, 1.0)])
        self.assertAlmostEqual(complex(breve_eval(line, 0.4, 0.4)), 0.8 + 2j * np.exp(0.8j), places=12)

    def test_linear_gives_slope(self):
        phi = LineFunction.build([5.0, -3.0])
        values = breve_eval(phi, np.array([0.0, 1.0, 7.0]), np.array([2.0, 1.0, -4.0]))
        np.testing.assert_allclose(values, -3.0, atol=1e-14)

    def test_symmetry_and_broadcasting(self):
        phi = LineFunction.build(modes=[(1.0, 1.0), (-2.5, 0.3j)])
        u = np.linspace(-2, 2, 9)[:, None]
        v = np.linspace(-1, 3, 5)[None, :]
        forward = breve_eval(phi, u, v)
        self.assertEqual(forward.shape, (9, 5))
        backward = breve_eval(phi, v.T, u.T)
        self.assertEqual(backward.shape, (5, 9))
        np.testing.assert_allclose(forward, backward.T, rtol=1e-14, atol=1e-15)

    def test_continuity_across_tolerance(self):
        phi = LineFunction.build(modes=[(1.0, 1.0), (3.0, 0.5)])
        u = 0.3
        delta = 1e-8 * (1 + 2 * abs(u))
        inside = complex(breve_eval(phi, u + 0.999 * delta, u))
        outside = complex(breve_eval(phi, u + 1.001 * delta, u))
        self.assertLessEqual(abs(inside - outside), 1e-6)


class TestDifferences(unittest.TestCase):
    """Test finite differences and the difference integral"""

    def test_difference_matches_definition(self):
        phi = LineFunction.build([1.0, 2.0, 3.0], [(1.3, 1.0 - 1j)])
        t = 0.7
        x = np.linspace(-2, 2, 9)
        second = difference(phi, t, 2)
        expected = phi(x + 2 * t) - 2 * phi(x + t) + phi(x)
        np.testing.assert_allclose(second(x), expected, atol=1e-12)

    def test_difference_is_linear(self):
        f = LineFunction.build([0.0, 1.0], [(1.0, 2.0)])
        g = LineFunction.build([0.0, 0.0, 1.0], [(0.5, 1j)])
        x = np.linspace(-1, 1, 5)
        lhs = difference(f + g.scale(3.0), 0.4, 3)(x)
        rhs = difference(f, 0.4, 3)(x) + 3.0 * difference(g, 0.4, 3)(x)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_third_difference_annihilates_quadratic(self):
        quadratic = LineFunction.build([1.0, 2.0, 3.0])
        self.assertEqual(difference_integral(quadratic, 3), 0.0)

    def test_zero_function(self):
        self.assertEqual(difference_integral(LineFunction(), 3), 0.0)

    def test_second_order_rejects_quadratic(self):
        with self.assertRaises(DomainError):
            difference_integral(LineFunction.build([0.0, 0.0, 1.0], [(1.0, 1.0)]), 2)

    def test_single_mode_grid_refinement(self):
        phi = LineFunction.exponential(1.0)
        coarse = difference_integral(phi, 3)
        fine = difference_integral(phi, 3, t_nodes=20480, tail_points_per_period=640)
        self.assertGreater(coarse, 0.0)
        self.assertLessEqual(abs(coarse - fine), 1e-6 * fine)

    def test_dilation_scaling(self):
        # the integrand scales so that dilating by 2 multiplies the integral by 4
        base = difference_integral(LineFunction.exponential(1.0), 3)
        dilated = difference_integral(LineFunction.exponential(2.0), 3)
        self.assertAlmostEqual(dilated / base, 4.0, places=5)


if __name__ == '__main__':
    unittest.main()
