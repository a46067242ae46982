import unittest
import os
from unittest.mock import patch

from src.config import Config


class TestConfig(unittest.TestCase):
    """Test configuration module"""

    def tearDown(self):
        Config.reload()

    def test_config_defaults(self):
        """Test default tolerances and grids"""
        self.assertEqual(Config.TRACE_FORMULA_TOL, 1e-8)
        self.assertEqual(Config.K2_REL_TOL, 1e-10)
        self.assertEqual(Config.MAX_DIM, 256)
        self.assertEqual(Config.DEFAULT_DIMS, [2, 4, 8, 12])
        self.assertEqual(Config.DEFAULT_OPEN_DIMS[-1], 64)

    @patch.dict(os.environ, {
        'SHIFTLAB_THREADS': '4',
        'SHIFTLAB_EPS': '0.05',
        'SHIFTLAB_SEED': '7',
        'SHIFTLAB_LOG_LEVEL': 'debug'
    })
    def test_environment_overrides(self):
        """Test that reload picks up the environment"""
        Config.reload()
        self.assertEqual(Config.THREADS, 4)
        self.assertEqual(Config.DEFAULT_EPS, 0.05)
        self.assertEqual(Config.DEFAULT_SEED, 7)
        self.assertTrue(Config.is_valid())

    @patch.dict(os.environ, {'SHIFTLAB_THREADS': 'many', 'SHIFTLAB_EPS': ''})
    def test_unparsable_values_fall_back(self):
        """Test defaults for unparsable values"""
        Config.reload()
        self.assertEqual(Config.THREADS, 1)
        self.assertEqual(Config.DEFAULT_EPS, 0.1)

    @patch.dict(os.environ, {
        'SHIFTLAB_THREADS': '0',
        'SHIFTLAB_EPS': '-1',
        'SHIFTLAB_LOG_LEVEL': 'LOUD',
        'SHIFTLAB_MEMORY_THRESHOLD': '150'
    })
    def test_config_validation_failure(self):
        """Test configuration validation with unusable values"""
        Config.reload()
        validation_results = Config.validate()
        self.assertFalse(validation_results['threads'])
        self.assertFalse(validation_results['eps'])
        self.assertFalse(validation_results['log_level'])
        self.assertFalse(validation_results['memory_threshold'])
        self.assertFalse(Config.is_valid())


if __name__ == '__main__':
    unittest.main()
