import unittest

import numpy as np

from src.doi import neidhardt_residual_unitary
from src.exceptions import DomainError, PreconditionError
from src.families import circle_family
from src.funcmodel import CircleFunction, LineFunction
from src.shift import (
    cluster_weights,
    eta_negativity,
    koplienko_eta,
    krein_xi,
    neidhardt_eta,
    pair_complex_convention,
    pair_shift,
    sample_eta,
    sample_unitary_eta,
    sample_xi,
    trace_square,
    unitary_moment_traces,
)
from src.verify import InstanceSpec, gen_pair_sa, gen_pair_unitary

ONE = np.array([[1.0]])
ZERO = np.array([[0.0]])


class TestKreinXi(unittest.TestCase):
    """Test the first-order shift function"""

    def test_equal_operators(self):
        a, _ = gen_pair_sa(InstanceSpec("sa", 4, 1))
        xi = krein_xi(a, a)
        self.assertTrue(np.all(xi.values == 0))
        self.assertEqual(xi.integral(), 0.0)

    def test_scalar_step(self):
        xi = krein_xi(ZERO, ONE)
        np.testing.assert_array_equal(xi.breakpoints, [0.0, 1.0])
        np.testing.assert_array_equal(sample_xi(xi, np.array([-0.5, 0.0, 0.5, 1.0, 2.0])), [0, 1, 1, 0, 0])
        self.assertEqual(xi.integral(), 1.0)

    def test_integral_is_trace_of_perturbation(self):
        a, k = gen_pair_sa(InstanceSpec("sa", 6, 2))
        xi = krein_xi(a, a + k)
        self.assertAlmostEqual(xi.integral(), float(np.real(np.trace(k))), places=12)

    def test_first_order_pairing(self):
        a, k = gen_pair_sa(InstanceSpec("sa", 5, 3))
        b = a + k
        phi = LineFunction.build([0.0, 1.0, 0.5], [(1.3, 0.4j)])
        xi = krein_xi(a, b)
        exact = np.sum(phi.evaluate(np.linalg.eigvalsh(b))) - np.sum(phi.evaluate(np.linalg.eigvalsh(a)))
        self.assertLessEqual(abs(pair_shift(phi, xi, 1) - exact), 1e-10)

    def test_dimension_mismatch(self):
        with self.assertRaises(PreconditionError):
            krein_xi(np.eye(2), np.eye(3))


class TestKoplienkoEta(unittest.TestCase):
    """Test the closed-form second-order shift function"""

    def test_zero_perturbation(self):
        a, _ = gen_pair_sa(InstanceSpec("sa", 4, 4))
        eta = koplienko_eta(a, np.zeros((4, 4)))
        np.testing.assert_array_equal(eta.values, 0.0)
        self.assertEqual(eta.integral(), 0.0)

    def test_scalar_ramp(self):
        eta = koplienko_eta(ZERO, ONE)
        x = np.linspace(-0.5, 1.5, 21)
        expected = np.where((x >= 0) & (x < 1), 1.0 - x, 0.0)
        np.testing.assert_allclose(sample_eta(eta, x), expected, atol=1e-15)
        self.assertEqual(eta.integral(), 0.5)

    def test_degenerate_cluster(self):
        eta = koplienko_eta(np.zeros((2, 2)), np.eye(2))
        np.testing.assert_array_equal(eta.breakpoints, [0.0, 1.0])
        self.assertAlmostEqual(eta.jumps[0], 2.0, places=14)
        np.testing.assert_allclose(sample_eta(eta, np.array([0.0, 0.25, 1.0])), [2.0, 1.5, 0.0], atol=1e-15)

    def test_cluster_weights_sum_to_trace(self):
        a, k = gen_pair_sa(InstanceSpec("sa", 7, 5))
        points, kappa = cluster_weights(a, k)
        self.assertEqual(points.size, 7)
        self.assertAlmostEqual(float(np.sum(kappa)), float(np.real(np.trace(k))), places=12)

    def test_trace_of_square_is_twice_integral(self):
        for dim, seed in ((1, 6), (4, 7), (9, 8)):
            a, k = gen_pair_sa(InstanceSpec("sa", dim, seed))
            eta = koplienko_eta(a, k)
            k2 = trace_square(k)
            self.assertLessEqual(abs(k2 - 2.0 * eta.integral()), 1e-10 * k2)

    def test_eta_vanishes_at_top_and_is_nonnegative(self):
        a, k = gen_pair_sa(InstanceSpec("sa", 6, 9))
        eta = koplienko_eta(a, k)
        self.assertEqual(eta.values[-1], 0.0)
        self.assertEqual(eta.slopes[-1], 0.0)
        self.assertIsNone(eta_negativity(eta, k))

    def test_pairings(self):
        eta = koplienko_eta(ZERO, ONE)
        self.assertAlmostEqual(pair_shift(LineFunction.build([0.0, 0.0, 1.0]), eta, 2), 1.0, places=15)
        a, k = gen_pair_sa(InstanceSpec("sa", 5, 10))
        self.assertAlmostEqual(abs(pair_shift(LineFunction.build([2.0, -1.0]), koplienko_eta(a, k), 2)), 0.0, places=12)

    def test_incompatible_pairings(self):
        eta = koplienko_eta(ZERO, ONE)
        with self.assertRaises(DomainError):
            pair_shift(CircleFunction.monomial(2), eta, 2)
        with self.assertRaises(DomainError):
            pair_shift(LineFunction.exponential(1.0), eta, 1)


class TestUnitaryEta(unittest.TestCase):
    """Test the moment representation of the unitary shift function"""

    def test_equal_operators(self):
        u, _ = gen_pair_unitary(InstanceSpec("unitary", 5, 11))
        moments = neidhardt_eta(u, u, 6)
        np.testing.assert_allclose(moments.moments, 0.0, atol=1e-12)
        self.assertFalse(moments.near_branch_cut)

    def test_scalar_moments(self):
        angle = 0.4
        v = np.array([[np.exp(1j * angle)]])
        moments = neidhardt_eta(np.eye(1), v, 8)
        self.assertEqual(moments.moment(0), 0j)
        for n in range(1, 9):
            expected = np.exp(1j * n * angle) - 1 - 1j * n * angle
            self.assertAlmostEqual(pair_shift(CircleFunction.monomial(n), moments, 2), expected, places=13)
        self.assertEqual(moments.moment(20), 0j)

    def test_pairing_matches_residual_trace(self):
        u, v = gen_pair_unitary(InstanceSpec("unitary", 6, 12))
        moments = neidhardt_eta(u, v, 32)
        for name, phi in circle_family():
            trace = neidhardt_residual_unitary(u, v, phi).trace
            self.assertLessEqual(abs(trace - pair_shift(phi, moments, 2)), 1e-8, name)

    def test_linearity_on_cosine(self):
        u, v = gen_pair_unitary(InstanceSpec("unitary", 4, 13))
        moments = neidhardt_eta(u, v, 4)
        cosine = CircleFunction.from_dict({3: 0.5, -3: 0.5})
        parts = pair_shift(CircleFunction.monomial(3), moments, 2) + pair_shift(CircleFunction.monomial(-3), moments, 2)
        self.assertAlmostEqual(pair_shift(cosine, moments, 2), 0.5 * parts, places=13)

    def test_reality(self):
        u, v = gen_pair_unitary(InstanceSpec("unitary", 8, 14))
        moments = neidhardt_eta(u, v, 16)
        self.assertLessEqual(moments.reality_defect(), 1e-8)
        theta = np.linspace(-np.pi, np.pi, 33)
        values = sample_unitary_eta(moments, theta)
        self.assertLessEqual(float(np.max(np.abs(values.imag))), 1e-8 * (1 + float(np.max(np.abs(values)))))

    def test_traces_vanish_at_zero_order(self):
        u, v = gen_pair_unitary(InstanceSpec("unitary", 3, 15))
        traces, near_cut = unitary_moment_traces(u, v, 3)
        self.assertEqual(traces.size, 7)
        self.assertAlmostEqual(abs(traces[3]), 0.0, places=13)
        self.assertFalse(near_cut)

    def test_degree_too_small(self):
        with self.assertRaises(PreconditionError):
            neidhardt_eta(np.eye(2), np.eye(2), 0)
        moments = neidhardt_eta(np.eye(1), np.array([[1j]]), 2)
        with self.assertRaises(DomainError):
            pair_shift(CircleFunction.monomial(3), moments, 2)

    def test_complex_convention_differs_from_tangential(self):
        moments = neidhardt_eta(np.eye(1), np.array([[np.exp(0.3j)]]), 4)
        phi = CircleFunction.monomial(2)
        self.assertGreater(abs(pair_shift(phi, moments, 2) - pair_complex_convention(phi, moments)), 1e-3)


if __name__ == '__main__':
    unittest.main()
