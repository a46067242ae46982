"""Exact test functions on the circle and the line.

CircleFunction is a trigonometric (Laurent) polynomial; LineFunction is a
polynomial of degree at most two plus a finite exponential sum. Both are
immutable and hashable so derived quantities can be cached per function.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from .config import Config
from .exceptions import DomainError, PreconditionError

logger = logging.getLogger(__name__)

ArrayLike = Union[complex, float, NDArray[np.generic]]


@dataclass(frozen=True)
class CircleFunction:
    """phi(z) = sum_n coeffs[n] z^n on the unit circle"""

    coeffs: Tuple[Tuple[int, complex], ...] = ()

    @classmethod
    def from_dict(cls, coefficients: Dict[int, complex]) -> "CircleFunction":
        items = tuple(
            (int(n), complex(c)) for n, c in sorted(coefficients.items()) if complex(c) != 0
        )
        return cls(items)

    @classmethod
    def monomial(cls, n: int, amplitude: complex = 1.0) -> "CircleFunction":
        return cls.from_dict({n: amplitude})

    @property
    def domain(self) -> str:
        return "circle"

    def as_dict(self) -> Dict[int, complex]:
        return dict(self.coeffs)

    def coefficient(self, n: int) -> complex:
        return self.as_dict().get(n, 0j)

    @property
    def max_degree(self) -> int:
        return max((abs(n) for n, _ in self.coeffs), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, z: ArrayLike) -> NDArray[np.complex128]:
        points = np.asarray(z, dtype=np.complex128)
        result = np.zeros(points.shape, dtype=np.complex128)
        for n, c in self.coeffs:
            result = result + c * points ** n
        return result

    def __call__(self, z: ArrayLike) -> NDArray[np.complex128]:
        return self.evaluate(z)

    def __add__(self, other: "CircleFunction") -> "CircleFunction":
        merged = self.as_dict()
        for n, c in other.coeffs:
            merged[n] = merged.get(n, 0j) + c
        return CircleFunction.from_dict(merged)

    def scale(self, factor: complex) -> "CircleFunction":
        return CircleFunction.from_dict({n: factor * c for n, c in self.coeffs})

    def __sub__(self, other: "CircleFunction") -> "CircleFunction":
        return self + other.scale(-1.0)

    def complex_derivative(self) -> "CircleFunction":
        return CircleFunction.from_dict({n - 1: n * c for n, c in self.coeffs if n != 0})

    def tangential_derivative(self) -> "CircleFunction":
        """d/dtheta of theta -> phi(e^{i theta})"""
        return CircleFunction.from_dict({n: 1j * n * c for n, c in self.coeffs if n != 0})

    def sup_norm(self, grid: Optional[int] = None) -> float:
        """Exact for a single monomial, grid maximum otherwise"""
        if not self.coeffs:
            return 0.0
        if len(self.coeffs) == 1:
            return abs(self.coeffs[0][1])
        return self._grid_max(self._sup_points(grid))

    def sup_bound(self, grid: Optional[int] = None) -> float:
        """
        Upper bound for sup|phi| on the circle

        The grid maximum over m points is inflated by 1 / (1 - N^2 h^2 / 8)
        with h = 2 pi / m and N half the spread of the frequencies. Near a
        maximiser the real part of the rotated polynomial has zero slope and
        curvature at most N^2 sup|phi| (Bernstein), and some grid point lies
        within h / 2 of it.
        """
        if len(self.coeffs) <= 1:
            return self.sup_norm()
        points = self._sup_points(grid)
        degrees = [n for n, _ in self.coeffs]
        half_spread = 0.5 * (max(degrees) - min(degrees))
        defect = (half_spread * 2.0 * np.pi / points) ** 2 / 8.0
        if defect >= 1.0:
            raise PreconditionError(f"Grid of {points} points too coarse for a sup bound")
        return self._grid_max(points) / (1.0 - defect)

    def _sup_points(self, grid: Optional[int]) -> int:
        return max(grid or Config.CIRCLE_SUP_GRID, 16 * (self.max_degree + 1))

    def _grid_max(self, points: int) -> float:
        theta = 2.0 * np.pi * np.arange(points) / points
        return float(np.max(np.abs(self.evaluate(np.exp(1j * theta)))))


def _merge_modes(modes: Iterable[Tuple[float, complex]]) -> Tuple[Tuple[float, complex], ...]:
    merged: Dict[float, complex] = {}
    for omega, amplitude in modes:
        omega = float(omega)
        if omega == 0.0:
            raise PreconditionError("Mode frequencies must be nonzero; use the polynomial part")
        merged[omega] = merged.get(omega, 0j) + complex(amplitude)
    return tuple((w, a) for w, a in sorted(merged.items()) if a != 0)


@dataclass(frozen=True)
class LineFunction:
    """phi(x) = c0 + c1 x + c2 x^2 + sum_k a_k exp(i omega_k x)"""

    poly: Tuple[complex, complex, complex] = (0j, 0j, 0j)
    modes: Tuple[Tuple[float, complex], ...] = ()

    @classmethod
    def build(
        cls,
        poly: Sequence[complex] = (0.0, 0.0, 0.0),
        modes: Iterable[Tuple[float, complex]] = ()
    ) -> "LineFunction":
        if len(poly) > 3:
            raise PreconditionError("Polynomial part is limited to degree two")
        padded = tuple(complex(c) for c in poly) + (0j,) * (3 - len(poly))
        return cls((padded[0], padded[1], padded[2]), _merge_modes(modes))

    @classmethod
    def exponential(cls, omega: float, amplitude: complex = 1.0) -> "LineFunction":
        return cls.build(modes=[(omega, amplitude)])

    @property
    def domain(self) -> str:
        return "line"

    @property
    def frequencies(self) -> NDArray[np.float64]:
        return np.array([w for w, _ in self.modes], dtype=np.float64)

    @property
    def amplitudes(self) -> NDArray[np.complex128]:
        return np.array([a for _, a in self.modes], dtype=np.complex128)

    @property
    def is_zero(self) -> bool:
        return not self.modes and all(c == 0 for c in self.poly)

    def mode_part(self) -> "LineFunction":
        return LineFunction((0j, 0j, 0j), self.modes)

    def polynomial_part(self) -> "LineFunction":
        return LineFunction(self.poly, ())

    def evaluate(self, x: ArrayLike) -> NDArray[np.complex128]:
        points = np.asarray(x)
        c0, c1, c2 = self.poly
        result = np.asarray(c0 + c1 * points + c2 * points * points, dtype=np.complex128)
        for omega, amplitude in self.modes:
            result = result + amplitude * np.exp(1j * omega * points)
        return result

    def __call__(self, x: ArrayLike) -> NDArray[np.complex128]:
        return self.evaluate(x)

    def __add__(self, other: "LineFunction") -> "LineFunction":
        poly = tuple(a + b for a, b in zip(self.poly, other.poly))
        return LineFunction.build(poly, list(self.modes) + list(other.modes))

    def scale(self, factor: complex) -> "LineFunction":
        return LineFunction.build(
            [factor * c for c in self.poly], [(w, factor * a) for w, a in self.modes]
        )

    def __sub__(self, other: "LineFunction") -> "LineFunction":
        return self + other.scale(-1.0)

    def dilate(self, factor: float) -> "LineFunction":
        """x -> phi(factor * x)"""
        c0, c1, c2 = self.poly
        return LineFunction.build(
            [c0, c1 * factor, c2 * factor * factor], [(w * factor, a) for w, a in self.modes]
        )

    def first_derivative(self) -> "LineFunction":
        _, c1, c2 = self.poly
        return LineFunction.build([c1, 2.0 * c2, 0.0], [(w, 1j * w * a) for w, a in self.modes])

    def sup_norm(self, grid: Optional[int] = None) -> float:
        """Supremum over the line; infinite when the polynomial part is not constant"""
        if self.poly[1] != 0 or self.poly[2] != 0:
            return math.inf
        return mode_sup_norm(self.frequencies, self.amplitudes, self.poly[0], grid)


def mode_sup_norm(
    frequencies: NDArray[np.float64],
    amplitudes: NDArray[np.complex128],
    constant: complex = 0j,
    grid: Optional[int] = None
) -> float:
    """
    Supremum of c + sum_k a_k exp(i w_k x) over the real line

    Exact when at most one mode is present; otherwise the maximum over a grid
    covering one period of the slowest mode with at least 16 points per
    period of the fastest one, which is a lower bound.
    """
    if frequencies.size == 0:
        return abs(constant)
    if frequencies.size == 1:
        return abs(constant) + abs(complex(amplitudes[0]))
    slowest = float(np.min(np.abs(frequencies)))
    fastest = float(np.max(np.abs(frequencies)))
    points = max(grid or Config.LINE_SUP_GRID, int(math.ceil(16.0 * fastest / slowest)))
    x = (2.0 * np.pi / slowest) * np.arange(points) / points
    values = constant + np.exp(1j * np.outer(x, frequencies)) @ amplitudes
    return float(np.max(np.abs(values)))


AnyFunction = Union[CircleFunction, LineFunction]


def derivative(f: AnyFunction, order: int = 1, convention: str = "complex") -> AnyFunction:
    """
    Derivative of order 1 or 2

    Args:
        f: Circle or line function
        order: 1 or 2
        convention: "complex" (d/dz) or "tangential" (d/dtheta); tangential
            applies to circle functions only, line functions ignore it

    Returns:
        Function of the same type
    """
    if order not in (1, 2):
        raise PreconditionError(f"Derivative order must be 1 or 2, got {order}")
    if isinstance(f, CircleFunction):
        if convention not in ("complex", "tangential"):
            raise PreconditionError(f"Unknown derivative convention {convention!r}")
        result = f
        for _ in range(order):
            result = result.tangential_derivative() if convention == "tangential" else result.complex_derivative()
        return result
    if convention == "tangential":
        raise PreconditionError("The tangential convention only applies on the circle")
    line_result = f
    for _ in range(order):
        line_result = line_result.first_derivative()
    return line_result


def default_delta(u: NDArray[np.generic], v: NDArray[np.generic]) -> NDArray[np.float64]:
    result: NDArray[np.float64] = Config.DIAGONAL_REL_TOL * (1.0 + (np.abs(u) + np.abs(v)))
    return result


def breve_eval(
    f: AnyFunction,
    u: ArrayLike,
    v: ArrayLike,
    delta: Optional[float] = None
) -> NDArray[np.complex128]:
    """
    Divided difference (f(u) - f(v)) / (u - v), f' near the diagonal

    Inputs broadcast against each other. On the circle the diagonal value is
    the complex derivative at the normalized midpoint.

    Args:
        f: Circle or line function
        u: First argument(s)
        v: Second argument(s)
        delta: Diagonal tolerance; defaults to 1e-8 (1 + |u| + |v|)

    Returns:
        Complex array of divided differences
    """
    left, right = np.broadcast_arrays(np.asarray(u), np.asarray(v))
    diff = left - right
    tol = default_delta(left, right) if delta is None else np.full(diff.shape, float(delta))
    far = np.abs(diff) > tol
    safe = np.where(far, diff, 1.0)
    quotient = (f.evaluate(left) - f.evaluate(right)) / safe

    if isinstance(f, CircleFunction):
        middle = left + right
        size = np.abs(middle)
        midpoint = np.where(size > 0, middle / np.where(size > 0, size, 1.0), left)
        diagonal = f.complex_derivative().evaluate(midpoint)
    else:
        diagonal = f.first_derivative().evaluate(0.5 * (left + right))

    result: NDArray[np.complex128] = np.where(far, quotient, diagonal).astype(np.complex128)
    return result


def positive_shift(f: CircleFunction, times: int = 1) -> CircleFunction:
    """P_+ applied to conj(z)^times f: coefficients f(n + times) for n >= 0"""
    return CircleFunction.from_dict({n - times: c for n, c in f.coeffs if n - times >= 0})


def difference(f: LineFunction, t: float, order: int = 1) -> LineFunction:
    """Delta_t^order f with (Delta_t f)(x) = f(x + t) - f(x), exactly"""
    result = f
    for _ in range(order):
        c0, c1, c2 = result.poly
        result = LineFunction.build(
            [c1 * t + c2 * t * t, 2.0 * c2 * t, 0.0],
            [(w, a * (np.exp(1j * w * t) - 1.0)) for w, a in result.modes],
        )
    return result


def _difference_sup(
    f: LineFunction, order: int, t: NDArray[np.float64], x_grid: int
) -> NDArray[np.float64]:
    """sup_x |Delta_t^order f(x)| for each t (mode part only)"""
    freqs = f.frequencies
    amps = f.amplitudes
    if freqs.size == 1:
        result: NDArray[np.float64] = abs(complex(amps[0])) * np.abs(2.0 * np.sin(0.5 * freqs[0] * t)) ** order
        return result
    slowest = float(np.min(np.abs(freqs)))
    fastest = float(np.max(np.abs(freqs)))
    points = max(x_grid, int(math.ceil(16.0 * fastest / slowest)))
    x = (2.0 * np.pi / slowest) * np.arange(points) / points
    waves = np.exp(1j * np.outer(freqs, x))
    sup = np.empty(t.size, dtype=np.float64)
    chunk = 256
    for start in range(0, t.size, chunk):
        block = t[start:start + chunk]
        weights = amps[None, :] * (np.exp(1j * np.outer(block, freqs)) - 1.0) ** order
        sup[start:start + chunk] = np.max(np.abs(weights @ waves), axis=1)
    return sup


def _trapezoid(values: NDArray[np.float64], step: float) -> float:
    if values.size < 2:
        return 0.0
    return float(step * (np.sum(values) - 0.5 * (values[0] + values[-1])))


def difference_integral(
    f: LineFunction,
    order: int,
    t_nodes: int = Config.DIFF_T_NODES,
    x_grid: int = Config.DIFF_X_GRID,
    tail_points_per_period: int = Config.DIFF_TAIL_POINTS_PER_PERIOD,
) -> float:
    """
    Quadrature value of the integral over R of ||Delta_t^order f||_inf / |t|^order

    The integrand is even in t. On (0, inf) the range [2^-20/W, 2^20/W],
    W the largest frequency, is covered by log-spaced nodes below one period
    2 pi/W, a uniform grid over the next 64 periods, and the mean value of
    the sup-norm beyond that.

    Args:
        f: Line function
        order: 2 or 3
        t_nodes: Number of log-spaced nodes below one period
        x_grid: Minimum number of x points for multi-mode sup norms
        tail_points_per_period: Uniform points per period in the oscillatory block

    Returns:
        Nonnegative quadrature value

    Raises:
        DomainError: If the polynomial part is not annihilated by Delta_t^order
    """
    if order not in (2, 3):
        raise PreconditionError(f"Difference order must be 2 or 3, got {order}")
    if order == 2 and f.poly[2] != 0:
        raise DomainError("Delta_t^2 of a quadratic does not decay; the integral diverges")
    if not f.modes:
        return 0.0

    top = float(np.max(np.abs(f.frequencies)))
    period = 2.0 * np.pi / top
    t_min = 2.0 ** (-Config.DIFF_OCTAVES) / top
    t_max = 2.0 ** Config.DIFF_OCTAVES / top

    # log-spaced head, integrated in s = log t
    s = np.linspace(math.log(t_min), math.log(period), t_nodes)
    t_head = np.exp(s)
    head_values = _difference_sup(f, order, t_head, x_grid) * t_head ** (1 - order)
    head = _trapezoid(head_values, float(s[1] - s[0]))

    # uniform block over whole periods
    periods = Config.DIFF_TAIL_PERIODS
    count = periods * tail_points_per_period + 1
    t_mid = np.linspace(period, (periods + 1) * period, count)
    sup_mid = _difference_sup(f, order, t_mid, x_grid)
    middle = _trapezoid(sup_mid / t_mid ** order, float(t_mid[1] - t_mid[0]))

    # mean-value tail
    mean_sup = _trapezoid(sup_mid, float(t_mid[1] - t_mid[0])) / (t_mid[-1] - t_mid[0])
    t_tail = float(t_mid[-1])
    tail = mean_sup * (t_tail ** (1 - order) - t_max ** (1 - order)) / (order - 1)

    value = 2.0 * (head + middle + tail)
    logger.debug("difference_integral order=%s value=%s", order, value)
    return value
