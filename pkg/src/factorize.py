"""
Tensor factorizations of divided-difference kernels

A factorization writes breve(phi)(x, y) as a finite sum of
weight * f(x) * g(y) and carries the nuclear certificate
sum weight * Lip(f) * sup|g|, which bounds the trace norm of the
associated transformer.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from .config import Config
from .exceptions import DomainError, PreconditionError
from .funcmodel import AnyFunction, CircleFunction, LineFunction, breve_eval, positive_shift

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CutoffPair:
    """The cutoffs q and r with r(x) = q(x - 1)"""

    def q(self, x: Union[float, NDArray[np.float64]]) -> NDArray[np.float64]:
        points = np.asarray(x, dtype=np.float64)
        ramp = (2.0 * points - 1.0) / np.where(points > -1.0, points + 1.0, 1.0)
        result: NDArray[np.float64] = np.where(points <= 0.5, 0.0, np.where(points >= 2.0, 1.0, ramp))
        return result

    def r(self, x: Union[float, NDArray[np.float64]]) -> NDArray[np.float64]:
        points = np.asarray(x, dtype=np.float64)
        ramp = (2.0 * points - 3.0) / np.where(points != 0.0, points, 1.0)
        result: NDArray[np.float64] = np.where(points <= 1.5, 0.0, np.where(points >= 3.0, 1.0, ramp))
        return result

    def r_flat(self, x: Union[float, NDArray[np.float64]]) -> NDArray[np.float64]:
        result: NDArray[np.float64] = 1.0 - self.r(np.abs(np.asarray(x, dtype=np.float64)))
        return result


CUTOFFS = CutoffPair()


def _q(x: float) -> float:
    return float(CUTOFFS.q(x))


def beta_coeff(j: int, k: int) -> float:
    if j < 0 or k < 0:
        raise PreconditionError("alpha/beta indices must be nonnegative")
    if j == 0:
        return 0.5 if k == 0 else 1.0
    return _q(k / j)


def alpha_coeff(j: int, k: int) -> float:
    """alpha_{jk} = 1 - beta_{jk}; beta_{jk} = q(k/j), beta_{00} = 1/2, beta_{0k} = 1"""
    return 1.0 - beta_coeff(j, k)


@dataclass(frozen=True)
class FactorTerm:
    f: AnyFunction
    g: AnyFunction
    weight: float
    f_lip: float
    g_sup: float

    @property
    def contribution(self) -> float:
        return self.weight * self.f_lip * self.g_sup


@dataclass(frozen=True)
class TensorFactorization:
    terms: Tuple[FactorTerm, ...] = ()
    domain: str = "circle"
    certificate: float = field(default=0.0)

    @classmethod
    def from_terms(cls, terms: List[FactorTerm], domain: str) -> "TensorFactorization":
        return cls(tuple(terms), domain, math.fsum(t.contribution for t in terms))

    def evaluate(self, u: NDArray[np.generic], v: NDArray[np.generic]) -> NDArray[np.complex128]:
        """sum weight f(u) g(v), broadcasting u against v"""
        left, right = np.broadcast_arrays(np.asarray(u), np.asarray(v))
        total = np.zeros(left.shape, dtype=np.complex128)
        for term in self.terms:
            total = total + term.weight * term.f.evaluate(left) * term.g.evaluate(right)
        return total

    def coefficient_table(self) -> Dict[Tuple[int, int], complex]:
        """Double Laurent coefficients of sum weight f(zeta) g(tau) (circle only)"""
        if self.domain != "circle":
            raise PreconditionError("Coefficient tables exist for circle factorizations only")
        table: Dict[Tuple[int, int], complex] = {}
        for term in self.terms:
            for j, fj in term.f.coeffs:  # type: ignore[union-attr]
                for k, gk in term.g.coeffs:  # type: ignore[union-attr]
                    table[(j, k)] = table.get((j, k), 0j) + term.weight * fj * gk
        return table


def certificate_norm(fact: TensorFactorization) -> float:
    """sum weight * Lip(f) * sup|g|"""
    return math.fsum(t.contribution for t in fact.terms)


def breve_coefficients(phi: CircleFunction) -> Dict[Tuple[int, int], complex]:
    """
    Double Laurent coefficients of breve(phi)

    Analytic part: phi(j + k + 1) for j, k >= 0; anti-analytic part:
    -phi(j + k + 1) for j, k < 0.
    """
    table: Dict[Tuple[int, int], complex] = {}
    for n, c in phi.coeffs:
        if n >= 1:
            for j in range(n):
                table[(j, n - 1 - j)] = table.get((j, n - 1 - j), 0j) + c
        elif n <= -1:
            for a in range(-n):
                key = (-1 - a, -1 - (-n - 1 - a))
                table[key] = table.get(key, 0j) - c
    return table


def multiply_q(f: CircleFunction, n: int) -> CircleFunction:
    """Convolution with Q_n = sum_{j >= 0} q(j/n) z^j (Q_0 = 1/2 + z + z^2 + ...)"""
    return CircleFunction.from_dict(
        {m: c * beta_coeff(n, m) for m, c in f.coeffs if m >= 0}
    )


def _circle_lip(f: CircleFunction) -> float:
    """Lipschitz constant on the circle: an upper bound for sup|f'| of an analytic polynomial"""
    if f.max_degree == 0:
        return 0.0
    if len(f.coeffs) == 1:
        n, c = f.coeffs[0]
        return abs(n * c)
    return f.complex_derivative().sup_bound()


def _conjugate_variable(f: CircleFunction) -> CircleFunction:
    """z -> f(conj(z)) for an analytic polynomial"""
    return CircleFunction.from_dict({-n: c for n, c in f.coeffs})


def _split_terms(psi: CircleFunction, conjugate: bool) -> List[FactorTerm]:
    """
    beta/alpha split of sum_{j,k >= 0} psi(j + k) zeta^j tau^k

    With G_n = (S*)^n psi convolved with Q_n the beta part is
    sum_n zeta^n G_n(tau) and the alpha part sum_n G_n(zeta) tau^n. In the
    conjugate case both variables are conjugated and multiplied by
    conj(zeta) conj(tau).
    """
    terms: List[FactorTerm] = []
    top = max((n for n, _ in psi.coeffs), default=-1)
    extra = 1 if conjugate else 0
    for n in range(top + 1):
        g_n = multiply_q(positive_shift(psi, n), n)
        if g_n.is_zero:
            continue
        power = CircleFunction.monomial(n + extra)
        shifted = CircleFunction.from_dict({m + extra: c for m, c in g_n.coeffs})
        if conjugate:
            power = _conjugate_variable(power)
            shifted = _conjugate_variable(shifted)
        # beta: zeta^n (x) G_n(tau)
        terms.append(FactorTerm(power, shifted, 1.0, float(n + extra), shifted.sup_bound()))
        # alpha: G_n(zeta) (x) tau^n
        terms.append(FactorTerm(shifted, power, 1.0, _circle_lip(shifted), 1.0))
    return terms


def circle_factorize(phi: CircleFunction) -> TensorFactorization:
    """
    Factorize breve(phi) on the circle

    The analytic double series uses psi = P_+ conj(z) phi. The anti-analytic
    one uses theta with theta(m) = -phi(-m), m >= 1, and psi_theta =
    P_+ conj(z) theta, in conjugated variables.

    Args:
        phi: Trigonometric polynomial

    Returns:
        Factorization whose double Laurent coefficients equal those of breve(phi)
    """
    analytic = positive_shift(phi)
    mirrored = CircleFunction.from_dict({-n: -c for n, c in phi.coeffs if n <= -1})
    anti = positive_shift(mirrored)
    terms = _split_terms(analytic, conjugate=False) + _split_terms(anti, conjugate=True)
    fact = TensorFactorization.from_terms(terms, "circle")
    logger.debug("circle_factorize: %s terms, certificate %s", len(terms), fact.certificate)
    return fact


def line_factorize(phi: LineFunction, m: float, nodes: int = Config.LINE_FACTOR_NODES) -> TensorFactorization:
    """
    Factorize breve(phi) on the line for phi with Fourier support in [M/2, 2M]

    Quadrature of
        breve(phi)(x, y) = i int_0^{4M/3} F_t(x) e^{ity} dt + i int_0^{4M/3} e^{itx} F_t(y) dt
    with F_t = (S*_t phi) * Q_t, i.e. F_t(x) = sum_k a_k q((w_k - t)/t) e^{i(w_k - t)x},
    by the composite midpoint rule. The factor i is carried by F_t.

    Args:
        phi: Line function with zero polynomial part
        m: Band parameter M > 0
        nodes: Number of midpoint nodes

    Returns:
        Line factorization with two terms per node

    Raises:
        DomainError: If the polynomial part is nonzero or a frequency is out of band
    """
    if m <= 0 or nodes < 1:
        raise PreconditionError("line_factorize needs M > 0 and at least one node")
    if any(c != 0 for c in phi.poly):
        raise DomainError("line_factorize requires a zero polynomial part")
    freqs = phi.frequencies
    if freqs.size and (np.any(freqs < 0.5 * m) or np.any(freqs > 2.0 * m)):
        raise DomainError(f"Frequencies {freqs.tolist()} are outside [{0.5 * m}, {2.0 * m}]")
    if freqs.size == 0:
        return TensorFactorization((), "line", 0.0)

    amps = phi.amplitudes
    upper = 4.0 * m / 3.0
    step = upper / nodes
    terms: List[FactorTerm] = []
    for t in (np.arange(nodes) + 0.5) * step:
        weights = CUTOFFS.q((freqs - t) / t)
        keep = weights > 0.0
        if not np.any(keep):
            continue
        shifted = freqs[keep] - t
        coeffs = 1j * amps[keep] * weights[keep]
        factor = LineFunction.build(modes=zip(shifted.tolist(), coeffs.tolist()))
        wave = LineFunction.exponential(float(t))
        coeff_sum = float(np.sum(np.abs(coeffs)))
        lip_sum = float(np.sum(np.abs(coeffs * shifted)))
        terms.append(FactorTerm(factor, wave, step, lip_sum, 1.0))
        terms.append(FactorTerm(wave, factor, step, float(t), coeff_sum))
    fact = TensorFactorization.from_terms(terms, "line")
    logger.debug("line_factorize M=%s nodes=%s certificate=%s", m, nodes, fact.certificate)
    return fact


def line_reconstruction_error(
    phi: LineFunction, fact: TensorFactorization, x: NDArray[np.float64], y: NDArray[np.float64]
) -> float:
    """Maximum of |sum weight f(x) g(y) - breve(phi)(x, y)| over the grid x times y"""
    u, v = np.meshgrid(x, y, indexing="ij")
    return float(np.max(np.abs(fact.evaluate(u, v) - breve_eval(phi, u, v))))


def rflat_coefficients(n: int) -> Dict[int, float]:
    """Coefficients r_flat(j/n) of R_flat_n, nonzero for |j| < 3n"""
    if n < 1:
        raise PreconditionError("rflat needs n >= 1")
    j = np.arange(-3 * n + 1, 3 * n)
    values = CUTOFFS.r_flat(j / n)
    return {int(a): float(b) for a, b in zip(j, values) if b != 0.0}


def rflat_l1(n: int, grid: int = Config.RFLAT_GRID) -> float:
    """L^1 norm of R_flat_n on the circle by grid quadrature"""
    coefficients = rflat_coefficients(n)
    if 6 * n >= grid:
        raise PreconditionError("Quadrature grid too small for R_flat_n")
    spectrum = np.zeros(grid, dtype=np.complex128)
    for j, c in coefficients.items():
        spectrum[j % grid] = c
    values = np.fft.ifft(spectrum) * grid
    return float(np.mean(np.abs(values)))
