"""Dyadic Littlewood-Paley blocks and the Besov seminorms B^1_{inf,1}, B^2_{inf,1}"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Union

import numpy as np
from numpy.typing import NDArray

from .exceptions import PreconditionError
from .funcmodel import CircleFunction, LineFunction, difference_integral, mode_sup_norm

logger = logging.getLogger(__name__)

AnyFunction = Union[CircleFunction, LineFunction]


def smoothstep(t: NDArray[np.float64]) -> NDArray[np.float64]:
    """h(t) = 3t^2 - 2t^3 clipped to [0, 1]"""
    s = np.clip(t, 0.0, 1.0)
    result: NDArray[np.float64] = s * s * (3.0 - 2.0 * s)
    return result


@dataclass(frozen=True)
class DyadicWindow:
    """
    C^1 window w on (0, inf) supported in [1/2, 2]

    w(x) = h(log2(2x)) on [1/2, 1] and 1 - h(log2(x)) on [1, 2], so that
    sum_n w(2^n x) = 1 for every x > 0.
    """

    name: str = "cubic-log2"

    def __call__(self, x: Union[float, NDArray[np.float64]]) -> NDArray[np.float64]:
        points = np.asarray(x, dtype=np.float64)
        positive = points > 0.0
        log2x = np.log2(np.where(positive, points, 1.0))
        rising = smoothstep(log2x + 1.0)
        falling = 1.0 - smoothstep(log2x)
        values = np.where(log2x <= 0.0, rising, falling)
        inside = positive & (points > 0.5) & (points < 2.0)
        result: NDArray[np.float64] = np.where(inside, values, 0.0)
        return result

    def scalar(self, x: float) -> float:
        return float(self(np.array(x)))

    def partition_error(self, x: NDArray[np.float64]) -> float:
        """max |sum_n w(2^n x) - 1| over the given positive points"""
        points = np.asarray(x, dtype=np.float64)
        centre = np.floor(-np.log2(points)).astype(int)
        total = np.zeros(points.shape)
        for offset in range(-2, 3):
            total = total + self(points * 2.0 ** (centre + offset))
        return float(np.max(np.abs(total - 1.0)))


def make_window() -> DyadicWindow:
    return DyadicWindow()


@dataclass(frozen=True)
class LPBlockSet:
    """
    Littlewood-Paley pieces phi * W_n and phi * W_n^#

    On the circle block 0 is the W_0 = conj(z) + 1 + z piece and the
    conjugate blocks start at n = 1. On the line n ranges over the integers
    and the polynomial part is carried in ``remainder``.
    """

    domain: str
    blocks: Dict[int, AnyFunction] = field(default_factory=dict)
    conjugate: Dict[int, AnyFunction] = field(default_factory=dict)
    remainder: Optional[LineFunction] = None

    def reconstruct(self) -> AnyFunction:
        total: AnyFunction = CircleFunction() if self.domain == "circle" else LineFunction()
        for piece in list(self.blocks.values()) + list(self.conjugate.values()):
            total = total + piece  # type: ignore[operator]
        if self.remainder is not None and isinstance(total, LineFunction):
            total = total + self.remainder
        return total


def _dyadic_indices(magnitude: float) -> range:
    """Indices n with w(magnitude / 2^n) possibly nonzero"""
    centre = int(math.floor(math.log2(magnitude)))
    return range(centre - 1, centre + 3)


def _circle_blocks(phi: CircleFunction, window: DyadicWindow) -> LPBlockSet:
    analytic: Dict[int, Dict[int, complex]] = {}
    conjugate: Dict[int, Dict[int, complex]] = {}
    for k, c in phi.coeffs:
        if -1 <= k <= 1:
            # W_0 = conj(z) + 1 + z has no conjugate counterpart
            analytic.setdefault(0, {})[k] = c
            continue
        target = analytic if k > 0 else conjugate
        for n in _dyadic_indices(abs(k)):
            weight = window.scalar(abs(k) / 2.0 ** n) if n >= 1 else 0.0
            if weight > 0.0:
                target.setdefault(n, {})[k] = c * weight
    return LPBlockSet(
        domain="circle",
        blocks={n: CircleFunction.from_dict(v) for n, v in sorted(analytic.items())},
        conjugate={n: CircleFunction.from_dict(v) for n, v in sorted(conjugate.items())},
    )


def _line_blocks(phi: LineFunction, window: DyadicWindow) -> LPBlockSet:
    analytic: Dict[int, list] = {}
    conjugate: Dict[int, list] = {}
    for omega, a in phi.modes:
        target = analytic if omega > 0 else conjugate
        for n in _dyadic_indices(abs(omega)):
            weight = window.scalar(abs(omega) / 2.0 ** n)
            if weight > 0.0:
                target.setdefault(n, []).append((omega, a * weight))
    return LPBlockSet(
        domain="line",
        blocks={n: LineFunction.build(modes=m) for n, m in sorted(analytic.items())},
        conjugate={n: LineFunction.build(modes=m) for n, m in sorted(conjugate.items())},
        remainder=phi.polynomial_part(),
    )


def lp_blocks(phi: AnyFunction, window: Optional[DyadicWindow] = None) -> LPBlockSet:
    """
    Split phi into dyadic Littlewood-Paley blocks

    Args:
        phi: Circle or line function
        window: Dyadic window, the cubic one by default

    Returns:
        Block set whose pieces sum back to phi
    """
    window = window or make_window()
    if isinstance(phi, CircleFunction):
        return _circle_blocks(phi, window)
    return _line_blocks(phi, window)


def _block_sup(piece: AnyFunction) -> float:
    if isinstance(piece, CircleFunction):
        return piece.sup_norm()
    return mode_sup_norm(piece.frequencies, piece.amplitudes)


@lru_cache(maxsize=4096)
def _cached_seminorm(phi: AnyFunction, s: int, window: DyadicWindow) -> float:
    blocks = lp_blocks(phi, window)
    total = 0.0
    for n, piece in list(blocks.blocks.items()) + list(blocks.conjugate.items()):
        total += 2.0 ** (n * s) * _block_sup(piece)

    if isinstance(phi, LineFunction):
        c1, c2 = phi.poly[1], phi.poly[2]
        if s == 1 and c2 != 0:
            return math.inf
        derivative_sup = mode_sup_norm(
            phi.frequencies,
            phi.amplitudes * (1j * phi.frequencies) ** s,
            c1 if s == 1 else 2.0 * c2,
        )
        total += derivative_sup
    return total


def besov_seminorm(phi: AnyFunction, s: int = 2, window: Optional[DyadicWindow] = None) -> float:
    """
    Besov seminorm of order s in {1, 2}

    Line: sup|phi^(s)| + sum_n 2^{ns} (||phi * W_n|| + ||phi * W_n^#||).
    Circle: sum_{n >= 0} 2^{ns} (||phi * W_n|| + ||phi * W_n^#||).
    Sup norms are exact for single modes and grid maxima otherwise.
    """
    if s not in (1, 2):
        raise PreconditionError(f"Besov order must be 1 or 2, got {s}")
    value = _cached_seminorm(phi, s, window or make_window())
    logger.debug("besov_seminorm s=%s value=%s", s, value)
    return value


def second_derivative_sup(phi: LineFunction) -> float:
    """sup |phi''| over the line"""
    freqs = phi.frequencies
    return mode_sup_norm(freqs, -phi.amplitudes * freqs ** 2, 2.0 * phi.poly[2])


def characterization_ratio(phi: LineFunction, order: int = 3) -> float:
    """
    besov_seminorm(phi, 2) / (sup|phi''| + difference integral of the given order)

    Returns nan when both sides vanish.
    """
    denominator = second_derivative_sup(phi) + difference_integral(phi, order)
    numerator = besov_seminorm(phi, 2)
    if denominator == 0.0:
        return math.nan if numerator == 0.0 else math.inf
    return numerator / denominator
