"""
Spectral shift functions for finite pairs

KreinXi is the counting-function difference of A and B. KoplienkoEta is
built in closed form,

    eta(x) = sum_{lambda_i <= x} kappa_i - int_{-inf}^x xi(t) dt,

with kappa_i = trace(P_i K P_i) over the eigenvalue clusters of A. The
unitary eta is carried by its Fourier moments, normalized by c_0 = 0.
Pairings against derivatives of test functions are evaluated with exact
antiderivatives on every breakpoint interval.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from .config import Config
from .exceptions import DomainError, PreconditionError
from .funcmodel import AnyFunction, CircleFunction, LineFunction, mode_sup_norm
from .spectral_core import (
    ComplexMatrix,
    _chain_clusters,
    as_matrix,
    branch_distance,
    dagger,
    eig_hermitian,
    eig_unitary,
    s2,
    unitary_log,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KreinXi:
    """xi(x) = #{eig A <= x} - #{eig B <= x}, constant on [b_k, b_{k+1})"""

    breakpoints: NDArray[np.float64]
    values: NDArray[np.int64]

    def integral(self) -> float:
        widths = np.diff(self.breakpoints)
        return float(np.sum(self.values[:-1] * widths))


@dataclass(frozen=True)
class KoplienkoEta:
    """
    Right-continuous piecewise linear eta

    On [b_k, b_{k+1}) eta(x) = values[k] + slopes[k] (x - b_k); jumps[k] is
    the jump at b_k. eta vanishes left of b_0 and from the last breakpoint on.
    """

    breakpoints: NDArray[np.float64]
    jumps: NDArray[np.float64]
    slopes: NDArray[np.float64]
    values: NDArray[np.float64]

    def integral(self) -> float:
        widths = np.diff(self.breakpoints)
        return float(np.sum(self.values[:-1] * widths + 0.5 * self.slopes[:-1] * widths ** 2))

    def left_limits(self) -> NDArray[np.float64]:
        """eta(b_{k+1}-) for every interval"""
        widths = np.diff(self.breakpoints)
        result: NDArray[np.float64] = self.values[:-1] + self.slopes[:-1] * widths
        return result


@dataclass(frozen=True)
class UnitaryEtaMoments:
    """Fourier moments c_m, |m| <= N, of the unitary eta"""

    degree: int
    moments: NDArray[np.complex128]  # index m + N holds c_m
    near_branch_cut: bool = False

    def moment(self, m: int) -> complex:
        if abs(m) > self.degree:
            return 0j
        return complex(self.moments[m + self.degree])

    def reality_defect(self) -> float:
        """max |c_{-m} - conj(c_m)| relative to 1 + max |c|"""
        if self.moments.size == 0:
            return 0.0
        defect = np.max(np.abs(self.moments[::-1] - np.conj(self.moments)))
        return float(defect / (1.0 + np.max(np.abs(self.moments))))

    @property
    def decay_exponent(self) -> float:
        """Least-squares slope of log|c_m| against log m over nonzero moments, m >= 1"""
        m = np.arange(1, self.degree + 1)
        size = np.abs(self.moments[self.degree + 1:])
        keep = size > 0
        if np.count_nonzero(keep) < 2:
            return math.nan
        slope, _ = np.polyfit(np.log(m[keep]), np.log(size[keep]), 1)
        return float(slope)


ShiftFunction = Union[KreinXi, KoplienkoEta, UnitaryEtaMoments]


def _hermitian_pair(a: ComplexMatrix, b: ComplexMatrix) -> Tuple[ComplexMatrix, ComplexMatrix]:
    left, right = as_matrix(a), as_matrix(b)
    if left.shape != right.shape:
        raise PreconditionError(f"Dimension mismatch: {left.shape} vs {right.shape}")
    return left, right


def _counting_difference(
    breakpoints: NDArray[np.float64], spec_a: NDArray[np.float64], spec_b: NDArray[np.float64]
) -> NDArray[np.int64]:
    count_a = np.searchsorted(np.sort(spec_a), breakpoints, side="right")
    count_b = np.searchsorted(np.sort(spec_b), breakpoints, side="right")
    result: NDArray[np.int64] = (count_a - count_b).astype(np.int64)
    return result


def krein_xi(a: ComplexMatrix, b: ComplexMatrix) -> KreinXi:
    """
    Krein spectral shift function of the pair (A, B)

    Args:
        a: Hermitian A
        b: Hermitian B

    Returns:
        KreinXi on the union of both spectra
    """
    left, right = _hermitian_pair(a, b)
    spec_a = eig_hermitian(left).eigenvalues.astype(np.float64)
    spec_b = eig_hermitian(right).eigenvalues.astype(np.float64)
    breakpoints = np.unique(np.concatenate([spec_a, spec_b]))
    values = _counting_difference(breakpoints, spec_a, spec_b)
    return KreinXi(breakpoints, values)


def cluster_weights(a: ComplexMatrix, k: ComplexMatrix) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Eigenvalue clusters of A with kappa = trace(P K P) per cluster

    Clusters chain eigenvalues whose gaps are at most 1e-9 (1 + ||A||); the
    smallest eigenvalue represents its cluster.
    """
    spectral = eig_hermitian(a)
    values = spectral.eigenvalues.astype(np.float64)
    q = spectral.eigenvectors
    diagonal = np.real(np.einsum("ji,jk,ki->i", q.conj(), as_matrix(k), q))
    scale = 1.0 + float(np.max(np.abs(values))) if values.size else 1.0
    points: List[float] = []
    kappa: List[float] = []
    for cluster in _chain_clusters(values, Config.CLUSTER_REL_TOL * scale):
        points.append(float(values[cluster[0]]))
        kappa.append(float(np.sum(diagonal[cluster])))
    return np.array(points), np.array(kappa)


def koplienko_eta(a: ComplexMatrix, k: ComplexMatrix) -> KoplienkoEta:
    """
    Koplienko shift function of A and the perturbation K

    Args:
        a: Hermitian A
        k: Hermitian K, B = A + K

    Returns:
        KoplienkoEta with jumps kappa at the clusters of A and slope -xi
    """
    base, direction = _hermitian_pair(a, k)
    points, kappa = cluster_weights(base, direction)
    spec_a = eig_hermitian(base).eigenvalues.astype(np.float64)
    spec_b = eig_hermitian(base + direction).eigenvalues.astype(np.float64)

    breakpoints = np.unique(np.concatenate([points, spec_a, spec_b]))
    jumps = np.zeros(breakpoints.size)
    np.add.at(jumps, np.searchsorted(breakpoints, points), kappa)
    slopes = -_counting_difference(breakpoints, spec_a, spec_b).astype(np.float64)

    values = np.empty(breakpoints.size)
    current = 0.0
    for i in range(breakpoints.size):
        if i > 0:
            current += slopes[i - 1] * (breakpoints[i] - breakpoints[i - 1])
        current += jumps[i]
        values[i] = current
    logger.debug("koplienko_eta closing value %s", values[-1])
    # eta is exactly zero from the top of the joint spectrum on
    values[-1] = 0.0
    slopes[-1] = 0.0
    return KoplienkoEta(breakpoints, jumps, slopes, values)


def unitary_moment_traces(u: ComplexMatrix, v: ComplexMatrix, degree: int) -> Tuple[NDArray[np.complex128], bool]:
    """
    Traces T_n of the unitary second-order residual for z^n, n = -N..N

    trace(V^n) - trace(U^n) - i n sum_j u_j^n <e_j, A e_j> with u_j the
    eigenvalues of U and A = unitary_log(U, V).
    """
    left, right = as_matrix(u), as_matrix(v)
    if left.shape != right.shape:
        raise PreconditionError(f"Dimension mismatch: {left.shape} vs {right.shape}")
    log = unitary_log(left, right)
    near_cut = branch_distance(left, right) <= Config.BRANCH_FLAG_TOL
    spectral_u = eig_unitary(left)
    spectral_v = eig_unitary(right)
    q = spectral_u.eigenvectors
    weights = np.real(np.einsum("ji,jk,ki->i", q.conj(), log, q))
    n = np.arange(-degree, degree + 1)
    powers_u = spectral_u.eigenvalues[None, :] ** n[:, None]
    powers_v = spectral_v.eigenvalues[None, :] ** n[:, None]
    traces = np.sum(powers_v, axis=1) - np.sum(powers_u, axis=1) - 1j * n * (powers_u @ weights)
    return traces.astype(np.complex128), near_cut


def neidhardt_eta(u: ComplexMatrix, v: ComplexMatrix, degree: int) -> UnitaryEtaMoments:
    """
    Moments of the unitary eta: c_{-n} = -T_n / n^2 for n != 0, c_0 = 0

    Args:
        u: Unitary U
        v: Unitary V
        degree: Truncation N >= 1

    Returns:
        UnitaryEtaMoments, flagged when V U* has spectrum near -1
    """
    if degree < 1:
        raise PreconditionError("neidhardt_eta needs N >= 1")
    traces, near_cut = unitary_moment_traces(u, v, degree)
    n = np.arange(-degree, degree + 1)
    moments = np.zeros(2 * degree + 1, dtype=np.complex128)
    nonzero = n != 0
    # c_m = -T_{-m} / m^2
    moments[nonzero] = -traces[::-1][nonzero] / (n[nonzero] ** 2)
    if near_cut:
        logger.warning("Unitary pair within %s of the branch cut; eta moments flagged", Config.BRANCH_FLAG_TOL)
    return UnitaryEtaMoments(degree, moments, near_cut)


def _pair_xi(phi: LineFunction, xi: KreinXi) -> complex:
    ends = phi.evaluate(xi.breakpoints)
    return complex(np.sum(xi.values[:-1] * np.diff(ends)))


def _pair_eta(phi: LineFunction, eta: KoplienkoEta) -> complex:
    """sum over intervals of phi'(b) eta(b-) - phi'(a) eta(a+) - s (phi(b) - phi(a))"""
    b = eta.breakpoints
    if b.size < 2:
        return 0j
    values = phi.evaluate(b)
    slopes = phi.first_derivative().evaluate(b)
    total = (
        slopes[1:] * eta.left_limits()
        - slopes[:-1] * eta.values[:-1]
        - eta.slopes[:-1] * np.diff(values)
    )
    return complex(np.sum(total))


def _pair_moments(phi: CircleFunction, moments: UnitaryEtaMoments) -> complex:
    if phi.max_degree > moments.degree:
        raise DomainError(f"Degree {phi.max_degree} exceeds the moment truncation {moments.degree}")
    return complex(sum(c * (-n * n) * moments.moment(-n) for n, c in phi.coeffs))


def pair_shift(phi: AnyFunction, shift: ShiftFunction, order: int) -> complex:
    """
    Pairing int phi^(order) against a shift function

    Args:
        phi: Line function for xi and eta, circle function for unitary moments
        shift: KreinXi (order 1), KoplienkoEta or UnitaryEtaMoments (order 2)
        order: 1 or 2

    Returns:
        Exact value of the pairing

    Raises:
        DomainError: If phi, shift and order are incompatible
    """
    if isinstance(shift, KreinXi) and order == 1 and isinstance(phi, LineFunction):
        return _pair_xi(phi, shift)
    if isinstance(shift, KoplienkoEta) and order == 2 and isinstance(phi, LineFunction):
        return _pair_eta(phi, shift)
    if isinstance(shift, UnitaryEtaMoments) and order == 2 and isinstance(phi, CircleFunction):
        return _pair_moments(phi, shift)
    raise DomainError(
        f"Cannot pair {type(phi).__name__} with {type(shift).__name__} at order {order}"
    )


def pair_complex_convention(phi: CircleFunction, moments: UnitaryEtaMoments) -> complex:
    """Pairing with phi'' read as the complex second derivative sum n(n-1) phi(n) z^(n-2)"""
    return complex(sum(c * n * (n - 1) * moments.moment(-(n - 2)) for n, c in phi.coeffs))


def sample_xi(xi: KreinXi, x: NDArray[np.float64]) -> NDArray[np.float64]:
    points = np.asarray(x, dtype=np.float64)
    index = np.searchsorted(xi.breakpoints, points, side="right") - 1
    inside = (index >= 0) & (index < xi.breakpoints.size - 1)
    result: NDArray[np.float64] = np.where(inside, xi.values[np.clip(index, 0, None)], 0).astype(np.float64)
    return result


def sample_eta(eta: KoplienkoEta, x: NDArray[np.float64]) -> NDArray[np.float64]:
    points = np.asarray(x, dtype=np.float64)
    index = np.searchsorted(eta.breakpoints, points, side="right") - 1
    safe = np.clip(index, 0, eta.breakpoints.size - 1)
    linear = eta.values[safe] + eta.slopes[safe] * (points - eta.breakpoints[safe])
    inside = (index >= 0) & (index < eta.breakpoints.size - 1)
    result: NDArray[np.float64] = np.where(inside, linear, 0.0)
    return result


def sample_unitary_eta(moments: UnitaryEtaMoments, theta: NDArray[np.float64]) -> NDArray[np.complex128]:
    """eta(e^{i theta}) = sum_m c_m e^{i m theta}; the imaginary part is roundoff"""
    angles = np.asarray(theta, dtype=np.float64)
    m = np.arange(-moments.degree, moments.degree + 1)
    result: NDArray[np.complex128] = np.exp(1j * np.multiply.outer(angles, m)) @ moments.moments
    return result


def second_derivative_norm(phi: AnyFunction) -> float:
    """sup |phi''|, tangential on the circle"""
    if isinstance(phi, CircleFunction):
        return phi.tangential_derivative().tangential_derivative().sup_norm()
    return mode_sup_norm(phi.frequencies, -phi.amplitudes * phi.frequencies ** 2, 2.0 * phi.poly[2])


def koplienko_tolerance(k: ComplexMatrix, phi: LineFunction) -> float:
    """1e-8 (1 + ||K||_S2^2 ||phi''||_inf)"""
    return Config.TRACE_FORMULA_TOL * (1.0 + s2(k) ** 2 * second_derivative_norm(phi))


def eta_negativity(eta: KoplienkoEta, k: ComplexMatrix, samples: int = 1001) -> Optional[float]:
    """Most negative sampled value of eta beyond -1e-9 (1 + ||K||^2), None otherwise"""
    if eta.breakpoints.size < 2:
        return None
    grid = np.linspace(eta.breakpoints[0], eta.breakpoints[-1], samples)
    grid = np.concatenate([grid, eta.breakpoints])
    lowest = float(min(np.min(sample_eta(eta, grid)), np.min(eta.left_limits())))
    floor = -1e-9 * (1.0 + s2(k) ** 2)
    return lowest if lowest < floor else None


def trace_square(k: ComplexMatrix) -> float:
    matrix = as_matrix(k)
    return float(np.real(np.trace(dagger(matrix) @ matrix)))
