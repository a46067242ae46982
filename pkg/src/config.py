import os
from typing import Dict, List
from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        return default


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return float(value)
    except ValueError:
        return default


class Config:
    """Configuration management for the shiftlab toolkit"""

    # Runtime (environment driven)
    THREADS = _env_int("SHIFTLAB_THREADS", 1)
    LOG_LEVEL = os.getenv("SHIFTLAB_LOG_LEVEL", "INFO")
    DEFAULT_EPS = _env_float("SHIFTLAB_EPS", 0.1)
    DEFAULT_SEED = _env_int("SHIFTLAB_SEED", 42)
    OUTPUT_DIR = os.getenv("SHIFTLAB_OUTPUT_DIR", ".")
    MEMORY_THRESHOLD = _env_float("SHIFTLAB_MEMORY_THRESHOLD", 85.0)

    # Input guards
    MAX_DIM = 256

    # Eigensolver
    JACOBI_MAX_SWEEPS = 100
    HERMITIAN_TOL = 1e-12  # relative, ||H - H*||_F <= tol * (1 + ||H||_F)
    UNITARY_TOL = 1e-10  # ||U*U - I||_F <= tol * dim
    PHASE_CLUSTER_TOL = 1e-2  # clustering of cos(theta) in the unitary solver
    DECOMPOSITION_CACHE = 512  # cached eigendecompositions per kind
    BRANCH_CUT_TOL = 1e-12  # eigenvalue of VU* this close to -1 warns
    BRANCH_FLAG_TOL = 1e-6  # moments near the cut are flagged

    # Divided differences and clustering
    DIAGONAL_REL_TOL = 1e-8  # delta = tol * (1 + |u| + |v|)
    CLUSTER_REL_TOL = 1e-9  # eigenvalue clusters: tol * (1 + ||A||)

    # Quadrature and grids
    DIFF_T_NODES = 2048
    DIFF_X_GRID = 4096
    DIFF_TAIL_POINTS_PER_PERIOD = 64
    DIFF_TAIL_PERIODS = 64
    DIFF_OCTAVES = 20
    LINE_FACTOR_NODES = 4096
    RFLAT_GRID = 2 ** 16
    CIRCLE_SUP_GRID = 1024
    LINE_SUP_GRID = 4096

    # Verification tolerances
    TRACE_FORMULA_TOL = 1e-8
    K2_REL_TOL = 1e-10
    DECOMPOSITION_TOL = 1e-9
    PERTURBATION_REL_TOL = 1e-9
    CONVERGENCE_ORDER_MIN = 1.9
    STABILITY_FACTOR = 4.0

    # Default grids
    DEFAULT_DIMS: List[int] = [2, 4, 8, 12]
    DEFAULT_BANDS: List[float] = [1.0, 2.0, 4.0, 8.0]
    DEFAULT_DEGREES: List[int] = [4, 8, 16, 32, 64]
    DEFAULT_OPEN_DIMS: List[int] = [1, 2, 4, 8, 16, 32, 64]

    @classmethod
    def validate(cls) -> Dict[str, bool]:
        """Validate configuration values"""
        validation_results = {
            "threads": cls.THREADS >= 1,
            "eps": cls.DEFAULT_EPS > 0.0,
            "log_level": cls.LOG_LEVEL.upper() in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"),
            "memory_threshold": 0.0 < cls.MEMORY_THRESHOLD <= 100.0,
        }
        return validation_results

    @classmethod
    def is_valid(cls) -> bool:
        """Check if every configuration value is usable"""
        results = cls.validate()
        return all(results.values())

    @classmethod
    def reload(cls) -> None:
        """Re-read the environment driven settings"""
        cls.THREADS = _env_int("SHIFTLAB_THREADS", 1)
        cls.LOG_LEVEL = os.getenv("SHIFTLAB_LOG_LEVEL", "INFO")
        cls.DEFAULT_EPS = _env_float("SHIFTLAB_EPS", 0.1)
        cls.DEFAULT_SEED = _env_int("SHIFTLAB_SEED", 42)
        cls.OUTPUT_DIR = os.getenv("SHIFTLAB_OUTPUT_DIR", ".")
        cls.MEMORY_THRESHOLD = _env_float("SHIFTLAB_MEMORY_THRESHOLD", 85.0)
