"""Fixed test-function families used by the verification harness"""
from typing import List, Tuple, TypeVar

import numpy as np

from .funcmodel import CircleFunction, LineFunction

NamedLine = Tuple[str, LineFunction]
NamedCircle = Tuple[str, CircleFunction]
F = TypeVar("F")

FAMILY_SEED = 20240601


def band_bump(m: float, count: int = 8) -> LineFunction:
    """Hann-weighted exponential sum with frequencies spread over [M/2, 2M], sup norm at most 1"""
    freqs = m * (0.5 + 1.5 * np.arange(count) / (count - 1))
    weights = np.sin(np.pi * (np.arange(count) + 0.5) / count) ** 2
    weights = weights / np.sum(weights)
    return LineFunction.build(modes=zip(freqs.tolist(), weights.tolist()))


def line_family() -> List[NamedLine]:
    """Twelve line functions covering polynomial, single-band and mixed cases"""
    family: List[NamedLine] = [
        ("x", LineFunction.build([0.0, 1.0, 0.0])),
        ("x^2", LineFunction.build([0.0, 0.0, 1.0])),
    ]
    for omega in (0.5, 1.0, 2.0, 4.0):
        family.append((f"exp(i{omega}x)", LineFunction.exponential(omega)))
    family.extend([
        ("mix3a", LineFunction.build(modes=[(0.5, 0.3), (1.3, -0.2 + 0.1j), (3.0, 0.05)])),
        ("mix3b", LineFunction.build(modes=[(-1.0, 0.4), (0.7, 0.25j), (2.5, -0.1)])),
        ("bump1", band_bump(1.0)),
        ("bump2", band_bump(2.0)),
        ("x^2/2+exp(ix)", LineFunction.build([0.0, 0.0, 0.5], [(1.0, 1.0)])),
        ("exp(-i2x)", LineFunction.exponential(-2.0)),
    ])
    return family


def random_trig_polynomial(degree: int, seed: int) -> CircleFunction:
    """Coefficients for |n| <= degree with complex Gaussian draws damped by 1/(1 + n^2)"""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = np.arange(-degree, degree + 1)
    draws = rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)
    return CircleFunction.from_dict({int(k): complex(c) for k, c in zip(n, draws / (1.0 + n ** 2))})


def circle_family() -> List[NamedCircle]:
    """Monomials 1 <= |n| <= 8, two random degree-32 polynomials and cos 3t + sin 5t"""
    family: List[NamedCircle] = []
    for n in range(1, 9):
        family.append((f"z^{n}", CircleFunction.monomial(n)))
        family.append((f"z^-{n}", CircleFunction.monomial(-n)))
    family.append(("rand32a", random_trig_polynomial(32, FAMILY_SEED)))
    family.append(("rand32b", random_trig_polynomial(32, FAMILY_SEED + 1)))
    family.append(("cos3+sin5", cos3_sin5()))
    return family


def cos3_sin5() -> CircleFunction:
    return CircleFunction.from_dict({3: 0.5, -3: 0.5, 5: -0.5j, -5: 0.5j})


def fejer_packet(center: int, width: int, angle: float) -> CircleFunction:
    """Fejer-weighted block of frequencies around center, peaked at e^{i angle}"""
    j = np.arange(-width, width + 1)
    weights = (1.0 - np.abs(j) / (width + 1)) / (width + 1)
    k = center + j
    return CircleFunction.from_dict(
        {int(a): complex(w * np.exp(-1j * a * angle)) for a, w in zip(k, weights)}
    )


def _normalize_curvature(phi: CircleFunction) -> CircleFunction:
    curvature = phi.tangential_derivative().tangential_derivative().sup_norm()
    return phi.scale(1.0 / curvature) if curvature > 0 else phi


def packet_function(count: int) -> CircleFunction:
    """
    Sum of count packets in the dyadic bands 2^2, 2^3, ... at spread-out angles

    Normalized so the tangential sup |phi''| equals 1; the B^2_{inf,1}
    seminorm grows with count.
    """
    total = CircleFunction()
    for b in range(count):
        center = 3 * 2 ** (b + 1)
        angle = 2.0 * np.pi * b / count
        total = total + fejer_packet(center, 2 ** b, angle).scale(1.0 / center ** 2)
    return _normalize_curvature(total)


def lacunary_function(terms: int) -> CircleFunction:
    """(1/K) sum_{k <= K} 4^-k z^(2^k)"""
    return CircleFunction.from_dict({2 ** k: 4.0 ** (-k) / terms for k in range(1, terms + 1)})


def open_family() -> List[NamedCircle]:
    """C^2 functions with sup |phi''| <= 1; the packet members grow in B^2_{inf,1} seminorm with the packet count"""
    family: List[NamedCircle] = []
    for count in (1, 2, 4):
        family.append((f"packets{count}", packet_function(count)))
    for terms in (2, 4, 6):
        family.append((f"lacunary{terms}", lacunary_function(terms)))
    return family


def select(names: List[str], family: List[Tuple[str, F]]) -> List[Tuple[str, F]]:
    """Members of family whose names are listed, in family order; all when names is empty"""
    if not names:
        return family
    wanted = set(names)
    return [(name, f) for name, f in family if name in wanted]

