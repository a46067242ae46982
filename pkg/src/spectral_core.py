"""Complex linear algebra substrate: eigendecompositions, spectral calculus,
Schatten norms and the unitary logarithm.

All eigendecompositions go through a cyclic Jacobi solver for Hermitian
matrices. Unitary matrices are reduced to it through their Hermitian and
skew-Hermitian parts, which commute with each other.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from .config import Config
from .exceptions import BranchCutWarning, EigenConvergenceError, PreconditionError

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
ScalarFunction = Callable[[NDArray[np.generic]], NDArray[np.generic]]

_EPS = float(np.finfo(float).eps)

# Generic rotation used to split clusters of the Hermitian part; any angle
# away from 0 and pi separates e^{i theta} from e^{-i theta}.
_SPLIT_ANGLE = 2.399963229728653


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues with an orthonormal system of eigenvectors (columns)"""

    eigenvalues: NDArray[np.generic]
    eigenvectors: ComplexMatrix
    kind: str  # "hermitian" or "unitary"

    @property
    def dim(self) -> int:
        return int(self.eigenvectors.shape[0])

    def reconstruct(self) -> ComplexMatrix:
        q = self.eigenvectors
        result: ComplexMatrix = (q * self.eigenvalues) @ q.conj().T
        return result

    def residual(self, source: ComplexMatrix) -> float:
        """Frobenius norm of M Q - Q diag(lambda)"""
        q = self.eigenvectors
        return float(np.linalg.norm(source @ q - q * self.eigenvalues))

    def orthonormality_defect(self) -> float:
        q = self.eigenvectors
        return float(np.linalg.norm(q.conj().T @ q - np.eye(self.dim)))


@dataclass(frozen=True)
class SchattenNorm:
    p: float
    value: float


def as_matrix(data: Union[ComplexMatrix, NDArray[np.generic], List[List[complex]]]) -> ComplexMatrix:
    """Coerce input to a finite square complex matrix"""
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise PreconditionError(f"Expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise PreconditionError("Matrix has non-finite entries")
    return matrix


def dagger(matrix: ComplexMatrix) -> ComplexMatrix:
    result: ComplexMatrix = matrix.conj().T
    return result


def hermitian_defect(matrix: ComplexMatrix) -> float:
    return float(np.linalg.norm(matrix - dagger(matrix)))


def unitary_defect(matrix: ComplexMatrix) -> float:
    return float(np.linalg.norm(dagger(matrix) @ matrix - np.eye(matrix.shape[0])))


def is_hermitian(matrix: ComplexMatrix, tol: float = Config.HERMITIAN_TOL) -> bool:
    return hermitian_defect(matrix) <= tol * (1.0 + float(np.linalg.norm(matrix)))


def is_unitary(matrix: ComplexMatrix, tol: float = Config.UNITARY_TOL) -> bool:
    return unitary_defect(matrix) <= tol * matrix.shape[0]


def _off_norm(a: ComplexMatrix) -> float:
    # summed directly; subtracting the diagonal mass from the total cancels
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _jacobi(h: ComplexMatrix, max_sweeps: int) -> "tuple[NDArray[np.float64], ComplexMatrix]":
    """Cyclic Jacobi with threshold sweeps for a complex Hermitian matrix.

    Each rotation first removes the phase of a[p, q] with a diagonal unitary
    and then applies the real symmetric rotation that annihilates it.
    """
    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    q = np.eye(n, dtype=np.complex128)
    scale = float(np.linalg.norm(a))
    target = 4.0 * _EPS * n * scale

    sweep = 0
    off = _off_norm(a)
    while off > target:
        sweep += 1
        if sweep > max_sweeps:
            raise EigenConvergenceError(max_sweeps, off, target)
        threshold = 0.2 * off / (n * n) if sweep < 4 else 0.0
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                mag = abs(apr)
                if mag == 0.0 or mag <= threshold:
                    continue
                app = a[p, p].real
                arr = a[r, r].real
                # negligible compared to both diagonal entries
                if sweep > 4 and abs(app) + 100.0 * mag == abs(app) and abs(arr) + 100.0 * mag == abs(arr):
                    a[p, r] = 0.0
                    a[r, p] = 0.0
                    continue
                theta = 0.5 * math.atan2(2.0 * mag, arr - app)
                c = math.cos(theta)
                s = math.sin(theta)
                dq = np.conj(apr) / mag
                g = np.array([[c, s], [-s * dq, c * dq]], dtype=np.complex128)
                idx = [p, r]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, r] = 0.0
                a[r, p] = 0.0
                a[p, p] = a[p, p].real
                a[r, r] = a[r, r].real
                q[:, idx] = q[:, idx] @ g
        off = _off_norm(a)

    logger.debug("Jacobi converged in %s sweeps (dim %s)", sweep, n)
    return np.real(np.diag(a)).copy(), q


def eig_hermitian(h: ComplexMatrix) -> SpectralDecomposition:
    """
    Eigendecomposition of a Hermitian matrix

    Args:
        h: Hermitian matrix

    Returns:
        Real eigenvalues in ascending order with orthonormal eigenvectors

    Raises:
        PreconditionError: If the input is not Hermitian
        EigenConvergenceError: If the sweep cap is reached
    """
    matrix = as_matrix(h)
    if not is_hermitian(matrix):
        logger.error("eig_hermitian called with non-Hermitian input (defect %s)", hermitian_defect(matrix))
        raise PreconditionError("Matrix is not Hermitian")
    return _eig_hermitian_cached(matrix.shape, matrix.tobytes())


def _from_key(shape: Tuple[int, ...], data: bytes) -> ComplexMatrix:
    return np.frombuffer(data, dtype=np.complex128).reshape(shape)


def _frozen(decomposition: SpectralDecomposition) -> SpectralDecomposition:
    # cached results are shared between callers
    decomposition.eigenvalues.setflags(write=False)
    decomposition.eigenvectors.setflags(write=False)
    return decomposition


@lru_cache(maxsize=Config.DECOMPOSITION_CACHE)
def _eig_hermitian_cached(shape: Tuple[int, ...], data: bytes) -> SpectralDecomposition:
    matrix = _from_key(shape, data)
    values, vectors = _jacobi(0.5 * (matrix + dagger(matrix)), Config.JACOBI_MAX_SWEEPS)
    order = np.argsort(values, kind="stable")
    return _frozen(SpectralDecomposition(values[order], vectors[:, order], "hermitian"))


def _chain_clusters(values: NDArray[np.float64], tol: float) -> List[NDArray[np.intp]]:
    """Group consecutive entries of a sorted array whose gaps are at most tol"""
    if values.size == 0:
        return []
    clusters: List[NDArray[np.intp]] = []
    start = 0
    for i in range(1, values.size):
        if values[i] - values[i - 1] > tol:
            clusters.append(np.arange(start, i))
            start = i
    clusters.append(np.arange(start, values.size))
    return clusters


def principal_argument(values: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Argument in (-pi, pi]; -1 maps to +pi"""
    args = np.angle(values)
    result: NDArray[np.float64] = np.where(args <= -np.pi, np.pi, args)
    return result


def eig_unitary(u: ComplexMatrix) -> SpectralDecomposition:
    """
    Eigendecomposition of a unitary matrix

    The Hermitian part (U + U*)/2 is diagonalized first; each cluster of
    nearly equal cosines is then split inside its eigenspace by a fixed
    generic combination of the commuting Hermitian and skew parts.

    Args:
        u: Unitary matrix

    Returns:
        Unimodular eigenvalues sorted by principal argument in (-pi, pi]

    Raises:
        PreconditionError: If the input is not unitary
    """
    matrix = as_matrix(u)
    if not is_unitary(matrix):
        logger.error("eig_unitary called with non-unitary input (defect %s)", unitary_defect(matrix))
        raise PreconditionError("Matrix is not unitary")
    return _eig_unitary_cached(matrix.shape, matrix.tobytes())


@lru_cache(maxsize=Config.DECOMPOSITION_CACHE)
def _eig_unitary_cached(shape: Tuple[int, ...], data: bytes) -> SpectralDecomposition:
    matrix = _from_key(shape, data)
    herm = 0.5 * (matrix + dagger(matrix))
    skew = -0.5j * (matrix - dagger(matrix))
    cosines, q = _jacobi(herm, Config.JACOBI_MAX_SWEEPS)
    order = np.argsort(cosines, kind="stable")
    cosines = cosines[order]
    q = q[:, order]

    split = math.cos(_SPLIT_ANGLE) * herm + math.sin(_SPLIT_ANGLE) * skew
    for cluster in _chain_clusters(cosines, Config.PHASE_CLUSTER_TOL):
        if cluster.size < 2:
            continue
        qc = q[:, cluster]
        compressed = dagger(qc) @ split @ qc
        _, w = _jacobi(0.5 * (compressed + dagger(compressed)), Config.JACOBI_MAX_SWEEPS)
        q[:, cluster] = qc @ w

    diagonal = np.einsum("ji,jk,ki->i", q.conj(), matrix, q)
    eigenvalues = diagonal / np.abs(diagonal)
    args = principal_argument(eigenvalues)
    order = np.argsort(args, kind="stable")
    return _frozen(SpectralDecomposition(eigenvalues[order], q[:, order], "unitary"))


def matrix_function(decomposition: SpectralDecomposition, f: ScalarFunction) -> ComplexMatrix:
    """Q diag(f(lambda_i)) Q* for a spectral decomposition"""
    values = np.asarray(f(decomposition.eigenvalues), dtype=np.complex128)
    q = decomposition.eigenvectors
    result: ComplexMatrix = (q * values) @ q.conj().T
    return result


def _normalize_p(p: Union[int, float, str]) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "oo"):
            return math.inf
        p = float(p)
    if p in (1, 2) or p == math.inf:
        return float(p)
    raise PreconditionError(f"Schatten index must be 1, 2 or inf, got {p!r}")


def singular_values(t: ComplexMatrix) -> NDArray[np.float64]:
    values: NDArray[np.float64] = np.linalg.svd(np.asarray(t, dtype=np.complex128), compute_uv=False)
    return values


def schatten_norm(t: ComplexMatrix, p: Union[int, float, str] = 2) -> SchattenNorm:
    """
    Schatten p-norm for p in {1, 2, inf}

    Args:
        t: Matrix
        p: 1 (trace norm), 2 (Hilbert-Schmidt) or inf (operator norm)

    Returns:
        SchattenNorm with the computed value
    """
    index = _normalize_p(p)
    matrix = np.asarray(t, dtype=np.complex128)
    if matrix.size == 0:
        return SchattenNorm(index, 0.0)
    if index == 2:
        # Frobenius sum; agrees with the singular value formula
        return SchattenNorm(index, float(np.sqrt(np.sum(np.abs(matrix) ** 2))))
    sigma = singular_values(matrix)
    if index == 1:
        return SchattenNorm(index, float(np.sum(sigma)))
    return SchattenNorm(index, float(np.max(sigma)) if sigma.size else 0.0)


def s1(t: ComplexMatrix) -> float:
    return schatten_norm(t, 1).value


def s2(t: ComplexMatrix) -> float:
    return schatten_norm(t, 2).value


def branch_distance(u: ComplexMatrix, v: ComplexMatrix) -> float:
    """Distance from the spectrum of V U* to the branch point -1"""
    ratio = eig_unitary(as_matrix(v) @ dagger(as_matrix(u)))
    return float(np.min(np.abs(ratio.eigenvalues + 1.0)))


def unitary_log(u: ComplexMatrix, v: ComplexMatrix) -> ComplexMatrix:
    """
    Hermitian A with spectrum in [-pi, pi] and exp(iA) U = V

    Args:
        u: Unitary matrix
        v: Unitary matrix of the same dimension

    Returns:
        A built from the principal arguments of the spectrum of V U*

    Raises:
        PreconditionError: On dimension mismatch or non-unitary input
    """
    left = as_matrix(u)
    right = as_matrix(v)
    if left.shape != right.shape:
        raise PreconditionError(f"Dimension mismatch: {left.shape} vs {right.shape}")
    if not (is_unitary(left) and is_unitary(right)):
        raise PreconditionError("unitary_log requires unitary inputs")
    ratio = eig_unitary(right @ dagger(left))
    distance = float(np.min(np.abs(ratio.eigenvalues + 1.0)))
    if distance <= Config.BRANCH_CUT_TOL:
        message = f"V U* has an eigenvalue within {distance!r} of -1; +pi chosen"
        logger.warning(message)
        warnings.warn(BranchCutWarning(message, distance), stacklevel=2)
    angles = principal_argument(ratio.eigenvalues)
    angles = np.where(np.abs(ratio.eigenvalues + 1.0) <= Config.BRANCH_CUT_TOL, np.pi, angles)
    q = ratio.eigenvectors
    a = (q * angles) @ dagger(q)
    result: ComplexMatrix = 0.5 * (a + dagger(a))
    return result
