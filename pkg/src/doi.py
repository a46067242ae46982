"""
Double operator integrals at finite dimension

A double operator integral of a kernel psi against spectral decompositions
E_L and E_R is the Schur product of the kernel table psi(lambda_i, mu_j)
with T written in the two eigenbases. Everything here is built on
doi_apply: the perturbation and derivative formulas, and the second-order
residual operators whose traces the trace formulae pair against eta.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from .config import Config
from .exceptions import PreconditionError
from .funcmodel import AnyFunction, CircleFunction, LineFunction, breve_eval
from .spectral_core import (
    ComplexMatrix,
    SpectralDecomposition,
    as_matrix,
    dagger,
    eig_hermitian,
    eig_unitary,
    matrix_function,
    s1,
    s2,
    unitary_log,
)

if TYPE_CHECKING:
    from .factorize import TensorFactorization

logger = logging.getLogger(__name__)

KernelEvaluator = Callable[[NDArray[np.generic], NDArray[np.generic]], NDArray[np.complex128]]


@dataclass(frozen=True)
class DOIKernel:
    """Kernel psi(x, y) evaluated on pairs of eigenvalues"""

    evaluator: KernelEvaluator
    domain: str = "line"
    label: str = ""

    def table(self, left: NDArray[np.generic], right: NDArray[np.generic]) -> NDArray[np.complex128]:
        """psi(left_i, right_j) as a len(left) x len(right) table"""
        u, v = np.meshgrid(left, right, indexing="ij")
        return np.asarray(self.evaluator(u, v), dtype=np.complex128)

    @classmethod
    def constant(cls, value: complex = 1.0) -> "DOIKernel":
        return cls(lambda u, v: np.full(np.shape(u), value, dtype=np.complex128), label=f"const({value})")

    @classmethod
    def separable(cls, f: Callable[..., NDArray[np.generic]], g: Callable[..., NDArray[np.generic]]) -> "DOIKernel":
        return cls(lambda u, v: np.asarray(f(u) * g(v), dtype=np.complex128), label="separable")

    @classmethod
    def divided_difference(cls, f: AnyFunction, delta: Optional[float] = None) -> "DOIKernel":
        return cls(lambda u, v: breve_eval(f, u, v, delta), domain=f.domain, label="breve")

    @classmethod
    def weighted_divided_difference(cls, f: CircleFunction, delta: Optional[float] = None) -> "DOIKernel":
        """tau * breve(phi)(zeta, tau), the kernel of the unitary formulas"""
        return cls(lambda u, v: v * breve_eval(f, u, v, delta), domain="circle", label="tau*breve")


@dataclass(frozen=True)
class ResidualOperator:
    """Second-order residual with optional proof decomposition terms"""

    value: ComplexMatrix
    terms: Optional[Tuple[ComplexMatrix, ...]] = None

    @property
    def s1(self) -> float:
        return s1(self.value)

    @property
    def s2(self) -> float:
        return s2(self.value)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.value))

    def decomposition_defect(self) -> float:
        """||sum of terms - value||_F / (1 + ||value||_F); 0 without terms"""
        if not self.terms:
            return 0.0
        total = np.sum(np.stack(self.terms), axis=0)
        return float(np.linalg.norm(total - self.value) / (1.0 + np.linalg.norm(self.value)))

    def decomposition_holds(self, tol: Optional[float] = None) -> bool:
        """Config.DECOMPOSITION_TOL is read at call time so run overrides apply"""
        limit = Config.DECOMPOSITION_TOL if tol is None else tol
        return self.decomposition_defect() <= limit


def doi_apply(
    left: SpectralDecomposition,
    right: SpectralDecomposition,
    kernel: DOIKernel,
    t: ComplexMatrix
) -> ComplexMatrix:
    """
    Finite double operator integral sum_{i,j} psi(lambda_i, mu_j) P_i T Q_j

    Args:
        left: Decomposition acting on the left of T
        right: Decomposition acting on the right of T
        kernel: Kernel psi
        t: Matrix T

    Returns:
        Q_L (psi o (Q_L* T Q_R)) Q_R*
    """
    matrix = as_matrix(t)
    if left.dim != matrix.shape[0] or right.dim != matrix.shape[1]:
        raise PreconditionError(
            f"Dimension mismatch: left {left.dim}, T {matrix.shape}, right {right.dim}"
        )
    ql, qr = left.eigenvectors, right.eigenvectors
    table = kernel.table(left.eigenvalues, right.eigenvalues)
    result: ComplexMatrix = ql @ (table * (dagger(ql) @ matrix @ qr)) @ dagger(qr)
    return result


def _check_same_dim(*matrices: ComplexMatrix) -> None:
    shapes = {m.shape for m in matrices}
    if len(shapes) != 1:
        raise PreconditionError(f"Dimension mismatch: {sorted(shapes)}")


def perturbation_diff_sa(a: ComplexMatrix, b: ComplexMatrix, phi: LineFunction) -> ComplexMatrix:
    """phi(B) - phi(A) as the double operator integral of breve(phi) against B - A"""
    left, right = as_matrix(b), as_matrix(a)
    _check_same_dim(left, right)
    return doi_apply(eig_hermitian(left), eig_hermitian(right), DOIKernel.divided_difference(phi), left - right)


def perturbation_diff_unitary(u: ComplexMatrix, v: ComplexMatrix, phi: CircleFunction) -> ComplexMatrix:
    """phi(V) - phi(U) as the double operator integral of breve(phi) against V - U"""
    left, right = as_matrix(v), as_matrix(u)
    _check_same_dim(left, right)
    return doi_apply(eig_unitary(left), eig_unitary(right), DOIKernel.divided_difference(phi), left - right)


def derivative_term_sa(a: ComplexMatrix, k: ComplexMatrix, phi: LineFunction) -> ComplexMatrix:
    """d/ds phi(A + sK) at s = 0"""
    base, direction = as_matrix(a), as_matrix(k)
    _check_same_dim(base, direction)
    spectral = eig_hermitian(base)
    return doi_apply(spectral, spectral, DOIKernel.divided_difference(phi), direction)


def derivative_term_unitary(u: ComplexMatrix, a: ComplexMatrix, phi: CircleFunction) -> ComplexMatrix:
    """d/ds phi(exp(isA) U) at s = 0, equal to i times the DOI of tau * breve(phi) against A"""
    base, direction = as_matrix(u), as_matrix(a)
    _check_same_dim(base, direction)
    spectral = eig_unitary(base)
    result: ComplexMatrix = 1j * doi_apply(
        spectral, spectral, DOIKernel.weighted_divided_difference(phi), direction
    )
    return result


def koplienko_residual_direct(a: ComplexMatrix, k: ComplexMatrix, phi: LineFunction) -> ComplexMatrix:
    """phi(A + K) - phi(A) - d/ds phi(A + sK)|_0 from matrix functions of the whole of phi"""
    base, direction = as_matrix(a), as_matrix(k)
    _check_same_dim(base, direction)
    result: ComplexMatrix = (
        matrix_function(eig_hermitian(base + direction), phi.evaluate)
        - matrix_function(eig_hermitian(base), phi.evaluate)
        - derivative_term_sa(base, direction, phi)
    )
    return result


def koplienko_residual_sa(a: ComplexMatrix, k: ComplexMatrix, phi: LineFunction) -> ResidualOperator:
    """
    Second-order residual phi(A + K) - phi(A) - d/ds phi(A + sK)|_0

    Assembled additively: the quadratic part contributes c2 K^2 exactly, the
    linear part nothing and the mode part its direct difference.

    Args:
        a: Hermitian matrix A
        k: Hermitian perturbation K
        phi: Line function

    Returns:
        ResidualOperator without decomposition terms
    """
    base, direction = as_matrix(a), as_matrix(k)
    _check_same_dim(base, direction)
    value = phi.poly[2] * (direction @ direction)
    modes = phi.mode_part()
    if not modes.is_zero:
        value = value + koplienko_residual_direct(base, direction, modes)
    return ResidualOperator(np.asarray(value, dtype=np.complex128))


def koplienko_residual_doi(a: ComplexMatrix, k: ComplexMatrix, phi: LineFunction) -> ResidualOperator:
    """The same residual as a difference of two double operator integrals against K"""
    base, direction = as_matrix(a), as_matrix(k)
    _check_same_dim(base, direction)
    value = phi.poly[2] * (direction @ direction)
    modes = phi.mode_part()
    if not modes.is_zero:
        kernel = DOIKernel.divided_difference(modes)
        spectral_a = eig_hermitian(base)
        spectral_b = eig_hermitian(base + direction)
        value = value + doi_apply(spectral_b, spectral_a, kernel, direction) - doi_apply(
            spectral_a, spectral_a, kernel, direction
        )
    return ResidualOperator(np.asarray(value, dtype=np.complex128))


def _exp_i(a: ComplexMatrix) -> ComplexMatrix:
    return matrix_function(eig_hermitian(a), lambda x: np.exp(1j * x))


def neidhardt_residual_unitary(
    u: ComplexMatrix,
    v: ComplexMatrix,
    phi: CircleFunction,
    log: Optional[ComplexMatrix] = None
) -> ResidualOperator:
    """
    Second-order residual phi(V) - phi(U) - d/ds phi(exp(isA) U)|_0 with V = exp(iA) U

    The terms are the three pieces of
        -DOI_{V,U}(tau breve, I - e^{iA}) + DOI_{U,U}(tau breve, I - e^{iA})
        + DOI_{U,U}(tau breve, e^{iA} - I - iA)
    whose sum is the residual.

    Args:
        u: Unitary U
        v: Unitary V
        phi: Circle function
        log: Precomputed unitary_log(U, V), computed when omitted

    Returns:
        ResidualOperator with terms (T1, T2, T3)
    """
    left, right = as_matrix(u), as_matrix(v)
    _check_same_dim(left, right)
    a = unitary_log(left, right) if log is None else as_matrix(log)

    spectral_u = eig_unitary(left)
    spectral_v = eig_unitary(right)
    kernel = DOIKernel.weighted_divided_difference(phi)
    identity = np.eye(left.shape[0], dtype=np.complex128)
    exp_ia = _exp_i(a)

    derivative = 1j * doi_apply(spectral_u, spectral_u, kernel, a)
    value = (
        matrix_function(spectral_v, phi.evaluate)
        - matrix_function(spectral_u, phi.evaluate)
        - derivative
    )
    first = -doi_apply(spectral_v, spectral_u, kernel, identity - exp_ia)
    second = doi_apply(spectral_u, spectral_u, kernel, identity - exp_ia)
    third = doi_apply(spectral_u, spectral_u, kernel, exp_ia - identity - 1j * a)
    residual = ResidualOperator(value, (first, second, third))
    logger.debug("neidhardt residual s1=%s decomposition defect=%s", residual.s1, residual.decomposition_defect())
    return residual


@dataclass(frozen=True)
class TransformerBound:
    """sum weight f(L) T g(R) with the data bounding its trace norm"""

    result: ComplexMatrix
    result_s1: float
    certificate: float
    t_s1: float
    t_s2: float


def transformer_bound(
    fact: "TensorFactorization",
    left: SpectralDecomposition,
    right: SpectralDecomposition,
    t: ComplexMatrix
) -> TransformerBound:
    """
    Assemble the transformer of a tensor factorization on T

    Args:
        fact: Factorization psi = sum weight f (x) g
        left: Decomposition for the f factors
        right: Decomposition for the g factors
        t: Matrix T

    Returns:
        TransformerBound with the assembled matrix and its norms
    """
    matrix = as_matrix(t)
    if left.dim != matrix.shape[0] or right.dim != matrix.shape[1]:
        raise PreconditionError("Dimension mismatch in transformer_bound")
    ql, qr = left.eigenvectors, right.eigenvectors
    inner = dagger(ql) @ matrix @ qr
    table = np.zeros(inner.shape, dtype=np.complex128)
    for term in fact.terms:
        table = table + term.weight * np.outer(term.f.evaluate(left.eigenvalues), term.g.evaluate(right.eigenvalues))
    result: ComplexMatrix = ql @ (table * inner) @ dagger(qr)
    return TransformerBound(result, s1(result), fact.certificate, s1(matrix), s2(matrix))


def factorized_residual(fact: "TensorFactorization", a: ComplexMatrix, k: ComplexMatrix) -> Tuple[ComplexMatrix, float]:
    """
    sum weight (f(A + K) - f(A)) K g(A) and its bound certificate ||K||_S2^2

    With fact a factorization of breve(phi) this reproduces the DOI form of
    the self-adjoint residual.
    """
    base, direction = as_matrix(a), as_matrix(k)
    _check_same_dim(base, direction)
    spectral_a = eig_hermitian(base)
    spectral_b = eig_hermitian(base + direction)
    moved = transformer_bound(fact, spectral_b, spectral_a, direction)
    fixed = transformer_bound(fact, spectral_a, spectral_a, direction)
    return moved.result - fixed.result, fact.certificate * moved.t_s2 ** 2
