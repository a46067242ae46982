"""Full-count verification runs over seeded instances and sweeps"""
import logging
import math
import unittest

import numpy as np

from src.config import Config
from src.doi import neidhardt_residual_unitary
from src.factorize import rflat_l1
from src.families import circle_family, line_family
from src.funcmodel import CircleFunction
from src.shift import neidhardt_eta, pair_complex_convention, pair_shift
from src.verify import constant_sweep, instance_specs, run_batch_sa, run_batch_unitary

logger = logging.getLogger(__name__)

INSTANCES = 500
DIMS = list(range(1, 13))


def failures(reports):
    return [
        (report.spec.index, report.spec.dim, [row.name for row in report.rows if not row.passed], report.instance_checks)
        for report in reports if not report.passed
    ]


class TestSelfAdjointAcceptance(unittest.TestCase):
    """Koplienko identity, trace K^2 = 2 int eta and the first-order identity"""

    def test_all_instances_pass(self):
        specs = instance_specs("sa", INSTANCES, DIMS, Config.DEFAULT_SEED, 0.1)
        reports = run_batch_sa(specs, line_family())
        self.assertEqual(len(reports), INSTANCES)
        self.assertEqual(failures(reports), [])
        worst = max(report.instance_details["k2_error"] / report.instance_details["trace_k2"] for report in reports)
        logger.info("worst relative trace K^2 error %r", worst)
        self.assertLessEqual(worst, Config.K2_REL_TOL)


class TestUnitaryAcceptance(unittest.TestCase):
    """Unitary trace formula and the three-term decomposition"""

    def test_all_instances_pass(self):
        specs = instance_specs("unitary", INSTANCES, DIMS, Config.DEFAULT_SEED, 0.1)
        reports = run_batch_unitary(specs, circle_family())
        self.assertEqual(failures(reports), [])
        for report in reports:
            self.assertFalse(report.flags["near_branch_cut"])
            self.assertTrue(all(row.checks["decomposition"] for row in report.rows))

    def test_scalar_monomials_are_exact(self):
        for angle in (0.1, 1.0, 2.5):
            v = np.array([[np.exp(1j * angle)]])
            moments = neidhardt_eta(np.eye(1), v, 8)
            for n in range(-8, 9):
                phi = CircleFunction.monomial(n)
                trace = neidhardt_residual_unitary(np.eye(1), v, phi).trace
                self.assertLessEqual(abs(trace - pair_shift(phi, moments, 2)), 1e-12)

    def test_complex_derivative_reading_fails(self):
        v = np.array([[np.exp(1j)]])
        phi = CircleFunction.monomial(1)
        moments = neidhardt_eta(np.eye(1), v, 2)
        trace = neidhardt_residual_unitary(np.eye(1), v, phi).trace
        self.assertAlmostEqual(trace, np.exp(1j) - 1 - 1j, places=14)
        self.assertGreaterEqual(abs(trace - pair_complex_convention(phi, moments)), 0.4)


class TestBoundedConstants(unittest.TestCase):
    """Empirical constants over the default sweep grids"""

    def test_certificate_ratios_are_stable(self):
        circle = constant_sweep("circle-certificate", [1], [float(d) for d in Config.DEFAULT_DEGREES], [1])
        line = constant_sweep("line-certificate", [1], Config.DEFAULT_BANDS, [1])
        for table in (circle, line):
            logger.info("%s: %s", table.kind, table.summary)
            self.assertTrue(table.stable, table.summary)

    def test_residual_ratios_are_stable(self):
        seeds = [1, 2, 3]
        tables = [
            constant_sweep("sa", Config.DEFAULT_DIMS, Config.DEFAULT_BANDS, seeds, 0.1),
            constant_sweep("unitary", Config.DEFAULT_DIMS, [float(d) for d in Config.DEFAULT_DEGREES], seeds, 0.01),
        ]
        for table in tables:
            logger.info("%s: %s", table.kind, table.summary)
            self.assertTrue(all(row.ratio is not None and math.isfinite(row.ratio) for row in table.rows))
            self.assertGreater(table.summary["max"], 0.0)
            self.assertTrue(table.stable, table.summary)

    def test_rflat_norms_bounded(self):
        norms = [rflat_l1(2 ** p) for p in range(9)]
        self.assertLessEqual(max(norms) / min(norms), 8.0)


if __name__ == '__main__':
    unittest.main()
