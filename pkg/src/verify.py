"""
Verification harness: seeded instances, trace-formula checks and sweeps

Instances are derived from a root seed through numpy's SeedSequence and
generated with the PCG64 bit generator, so a spec always produces the same
matrices. Work items run sequentially or on a process pool capped by
SHIFTLAB_THREADS; results are merged by instance index.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .besov import besov_seminorm
from .config import Config
from .doi import (
    derivative_term_sa,
    derivative_term_unitary,
    koplienko_residual_direct,
    koplienko_residual_sa,
    neidhardt_residual_unitary,
    perturbation_diff_sa,
    perturbation_diff_unitary,
)
from .exceptions import PreconditionError
from .factorize import certificate_norm, circle_factorize, line_factorize
from .families import NamedCircle, NamedLine, band_bump
from .funcmodel import CircleFunction, LineFunction
from .monitoring import ResourceGuard, monitor_memory
from .shift import (
    eta_negativity,
    koplienko_eta,
    koplienko_tolerance,
    krein_xi,
    neidhardt_eta,
    pair_shift,
    trace_square,
)
from .spectral_core import (
    ComplexMatrix,
    dagger,
    eig_hermitian,
    eig_unitary,
    matrix_function,
    s1,
    s2,
    unitary_log,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class InstanceSpec:
    kind: str  # "sa" or "unitary"
    dim: int
    seed: int
    eps: float = Config.DEFAULT_EPS
    index: int = 0


@dataclass
class CheckRow:
    """Checks for one test function on one instance"""

    name: str
    trace: complex
    pairing: complex
    residual: float
    tolerance: float
    s1: float
    s2: float
    ratio: Optional[float]
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


@dataclass
class CheckReport:
    spec: Optional[InstanceSpec]
    rows: List[CheckRow] = field(default_factory=list)
    instance_checks: Dict[str, bool] = field(default_factory=dict)
    instance_details: Dict[str, float] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.instance_checks.values()) and all(row.passed for row in self.rows)

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        """JSON-ready form; wall time only when timing is set"""
        rows = []
        for row in self.rows:
            entry = asdict(row)
            entry["trace"] = [row.trace.real, row.trace.imag]
            entry["pairing"] = [row.pairing.real, row.pairing.imag]
            entry["pass"] = row.passed
            rows.append(entry)
        data: Dict[str, Any] = {
            "spec": asdict(self.spec) if self.spec else None,
            "rows": rows,
            "instance_checks": dict(self.instance_checks),
            "instance_details": dict(self.instance_details),
            "flags": dict(self.flags),
            "pass": self.passed,
        }
        if timing:
            data["wall_time"] = self.wall_time
        return data


def derive_seed(root: int, *keys: int) -> int:
    """64-bit seed from a root seed and integer keys"""
    sequence = np.random.SeedSequence([root, *keys])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def instance_specs(kind: str, count: int, dims: Sequence[int], seed: int, eps: float) -> List[InstanceSpec]:
    """
    count instance specs cycling through dims, one spawned seed per instance

    Args:
        kind: "sa" or "unitary"
        count: Number of instances
        dims: Dimensions to cycle through
        seed: Root seed
        eps: Perturbation scale

    Returns:
        Specs in index order
    """
    if kind not in ("sa", "unitary"):
        raise PreconditionError(f"Unknown instance kind {kind!r}")
    if not dims:
        raise PreconditionError("instance_specs needs at least one dimension")
    children = np.random.SeedSequence(seed).spawn(count)
    return [
        InstanceSpec(kind, int(dims[i % len(dims)]), int(child.generate_state(1, dtype=np.uint64)[0]), eps, i)
        for i, child in enumerate(children)
    ]


def _rng(spec: InstanceSpec) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(spec.seed))


def _gaussian(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    matrix: ComplexMatrix = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return matrix


def _hermitize(matrix: ComplexMatrix) -> ComplexMatrix:
    result: ComplexMatrix = 0.5 * (matrix + dagger(matrix))
    return result


def _rescale(matrix: ComplexMatrix, eps: float) -> ComplexMatrix:
    norm = s2(matrix)
    if eps == 0.0 or norm == 0.0:
        return np.zeros_like(matrix)
    result: ComplexMatrix = matrix * (eps / norm)
    return result


def gen_pair_sa(spec: InstanceSpec) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Hermitized Gaussian A and perturbation K with ||K||_S2 = eps"""
    if spec.dim < 1:
        raise PreconditionError("Instance dimension must be positive")
    rng = _rng(spec)
    a = _hermitize(_gaussian(rng, spec.dim))
    k = _rescale(_hermitize(_gaussian(rng, spec.dim)), spec.eps)
    return a, k


def gen_pair_unitary(spec: InstanceSpec) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Haar-like U from a phase-fixed QR and V = exp(iA) U with ||A||_S2 = eps"""
    if spec.dim < 1:
        raise PreconditionError("Instance dimension must be positive")
    rng = _rng(spec)
    q, r = np.linalg.qr(_gaussian(rng, spec.dim))
    diagonal = np.diag(r)
    phases = np.where(np.abs(diagonal) > 0, diagonal / np.abs(diagonal), 1.0)
    u = q * phases
    a = _rescale(_hermitize(_gaussian(rng, spec.dim)), spec.eps)
    spectral = eig_hermitian(a)
    if np.any(np.abs(spectral.eigenvalues) > np.pi):
        logger.info("Spectrum of the generator clipped to [-pi, pi] for instance %s", spec.index)
    exp_ia = matrix_function(spectral, lambda x: np.exp(1j * np.clip(np.real(x), -np.pi, np.pi)))
    return u, exp_ia @ u


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    if denominator == 0.0 or not math.isfinite(denominator):
        return None
    return numerator / denominator


def _first_order_tolerance(k: ComplexMatrix, phi: LineFunction, spectrum: np.ndarray) -> float:
    slope = float(np.max(np.abs(phi.first_derivative().evaluate(spectrum)))) if spectrum.size else 0.0
    return Config.TRACE_FORMULA_TOL * (1.0 + s1(k) * slope)


def check_koplienko(
    a: ComplexMatrix,
    k: ComplexMatrix,
    family: List[NamedLine],
    spec: Optional[InstanceSpec] = None
) -> CheckReport:
    """
    Self-adjoint trace formulae for every function of the family

    Per function: the second-order identity trace(residual) = int phi'' eta,
    the first-order identity trace(phi(B) - phi(A)) = int phi' xi and the
    perturbation formula; per instance: trace K^2 = 2 int eta.

    Args:
        a: Hermitian A
        k: Hermitian K
        family: Named line functions
        spec: Instance spec recorded in the report

    Returns:
        CheckReport with one row per function
    """
    report = CheckReport(spec)
    with ResourceGuard(f"check_koplienko dim={a.shape[0]}", Config.MEMORY_THRESHOLD) as guard:
        b = a + k
        eta = koplienko_eta(a, k)
        xi = krein_xi(a, b)
        spectrum = np.concatenate([eig_hermitian(a).eigenvalues, eig_hermitian(b).eigenvalues]).astype(float)
        k_s2 = s2(k)

        k2 = trace_square(k)
        k2_error = abs(k2 - 2.0 * eta.integral())
        report.instance_details["trace_k2"] = k2
        report.instance_details["k2_error"] = k2_error
        report.instance_checks["k2"] = k2_error <= Config.K2_REL_TOL * k2
        report.instance_details["xi_integral_error"] = abs(xi.integral() - float(np.real(np.trace(k))))

        negativity = eta_negativity(eta, k)
        report.flags["eta_negative"] = negativity is not None
        if negativity is not None:
            logger.warning("eta dips to %s on instance %s", negativity, spec.index if spec else "-")

        for name, phi in family:
            residual = koplienko_residual_sa(a, k, phi)
            trace = residual.trace
            pairing = pair_shift(phi, eta, 2)
            error = abs(trace - pairing)
            tolerance = koplienko_tolerance(k, phi)

            phi_b = matrix_function(eig_hermitian(b), phi.evaluate)
            phi_a = matrix_function(eig_hermitian(a), phi.evaluate)
            first_error = abs(complex(np.trace(phi_b - phi_a)) - pair_shift(phi, xi, 1))
            first_tol = _first_order_tolerance(k, phi, spectrum)
            perturbation_error = float(np.linalg.norm(perturbation_diff_sa(a, b, phi) - (phi_b - phi_a)))
            perturbation_tol = Config.PERTURBATION_REL_TOL * (1.0 + float(np.linalg.norm(phi_b)))
            pathway_gap = float(np.linalg.norm(koplienko_residual_direct(a, k, phi) - residual.value))

            row = CheckRow(
                name=name,
                trace=trace,
                pairing=pairing,
                residual=error,
                tolerance=tolerance,
                s1=residual.s1,
                s2=residual.s2,
                ratio=_ratio(residual.s1, besov_seminorm(phi, 2) * k_s2 ** 2),
                checks={
                    "second_order": error <= tolerance,
                    "first_order": first_error <= first_tol,
                    "perturbation": perturbation_error <= perturbation_tol,
                },
                details={
                    "first_order_error": first_error,
                    "perturbation_error": perturbation_error,
                    "pathway_gap": pathway_gap,
                },
            )
            logger.debug("%s: |trace - pairing| = %s (tol %s)", name, error, tolerance)
            report.rows.append(row)
    report.wall_time = guard.elapsed
    logger.info(
        "Self-adjoint instance %s dim %s: %s",
        spec.index if spec else "-", a.shape[0], "pass" if report.passed else "FAIL"
    )
    return report


def check_neidhardt(
    u: ComplexMatrix,
    v: ComplexMatrix,
    family: List[NamedCircle],
    spec: Optional[InstanceSpec] = None
) -> CheckReport:
    """
    Unitary trace formula for every function of the family

    Per function: trace(residual) against the moment pairing, the three-term
    decomposition of the residual and the unitary perturbation formula.
    Instances whose V U* has spectrum near -1 are flagged and their
    trace-formula checks are recorded without being asserted.

    Args:
        u: Unitary U
        v: Unitary V
        family: Named circle functions
        spec: Instance spec recorded in the report

    Returns:
        CheckReport with one row per function
    """
    report = CheckReport(spec)
    degree = max((phi.max_degree for _, phi in family), default=1) or 1
    with ResourceGuard(f"check_neidhardt dim={u.shape[0]}", Config.MEMORY_THRESHOLD) as guard:
        log = unitary_log(u, v)
        moments = neidhardt_eta(u, v, degree)
        distance_s2 = s2(v - u)
        report.flags["near_branch_cut"] = moments.near_branch_cut
        report.instance_details["reality_defect"] = moments.reality_defect()
        report.instance_details["decay_exponent"] = moments.decay_exponent
        report.instance_checks["reality"] = moments.reality_defect() <= Config.TRACE_FORMULA_TOL

        for name, phi in family:
            residual = neidhardt_residual_unitary(u, v, phi, log=log)
            trace = residual.trace
            pairing = pair_shift(phi, moments, 2)
            error = abs(trace - pairing)
            phi_v = matrix_function_unitary(v, phi)
            phi_u = matrix_function_unitary(u, phi)
            perturbation_error = float(np.linalg.norm(perturbation_diff_unitary(u, v, phi) - (phi_v - phi_u)))
            perturbation_tol = Config.PERTURBATION_REL_TOL * (1.0 + float(np.linalg.norm(phi_v)))

            checks = {
                "decomposition": residual.decomposition_holds(),
                "perturbation": perturbation_error <= perturbation_tol,
            }
            if not moments.near_branch_cut:
                checks["second_order"] = error <= Config.TRACE_FORMULA_TOL
            row = CheckRow(
                name=name,
                trace=trace,
                pairing=pairing,
                residual=error,
                tolerance=Config.TRACE_FORMULA_TOL,
                s1=residual.s1,
                s2=residual.s2,
                ratio=_ratio(residual.s1, besov_seminorm(phi, 2) * distance_s2 ** 2),
                checks=checks,
                details={
                    "decomposition_defect": residual.decomposition_defect(),
                    "perturbation_error": perturbation_error,
                },
            )
            logger.debug("%s: |trace - pairing| = %s", name, error)
            report.rows.append(row)
    report.wall_time = guard.elapsed
    logger.info(
        "Unitary instance %s dim %s: %s",
        spec.index if spec else "-", u.shape[0], "pass" if report.passed else "FAIL"
    )
    return report


def matrix_function_unitary(u: ComplexMatrix, phi: CircleFunction) -> ComplexMatrix:
    return matrix_function(eig_unitary(u), phi.evaluate)


def convergence_order(errors: Tuple[float, float], floor: float = 1e-13) -> float:
    """log2 of the error ratio at h and h/2; inf when both errors sit at roundoff"""
    coarse, fine = errors
    if coarse <= floor:
        return math.inf
    if fine <= 0.0:
        return math.inf
    return math.log2(coarse / fine)


def derivative_errors_sa(
    a: ComplexMatrix, k: ComplexMatrix, phi: LineFunction, h: float = 1e-3
) -> Tuple[float, float]:
    """Frobenius errors of the derivative formula against central differences at h and h/2"""
    exact = derivative_term_sa(a, k, phi)
    errors = []
    for step in (h, 0.5 * h):
        plus = matrix_function(eig_hermitian(a + step * k), phi.evaluate)
        minus = matrix_function(eig_hermitian(a - step * k), phi.evaluate)
        errors.append(float(np.linalg.norm((plus - minus) / (2.0 * step) - exact)))
    return errors[0], errors[1]


def derivative_errors_unitary(
    u: ComplexMatrix, a: ComplexMatrix, phi: CircleFunction, h: float = 1e-3
) -> Tuple[float, float]:
    """Errors of the unitary derivative formula against central differences of s -> phi(exp(isA) U)"""
    exact = derivative_term_unitary(u, a, phi)
    spectral = eig_hermitian(a)
    errors = []
    for step in (h, 0.5 * h):
        plus = matrix_function_unitary(matrix_function(spectral, lambda x: np.exp(1j * step * x)) @ u, phi)
        minus = matrix_function_unitary(matrix_function(spectral, lambda x: np.exp(-1j * step * x)) @ u, phi)
        errors.append(float(np.linalg.norm((plus - minus) / (2.0 * step) - exact)))
    return errors[0], errors[1]


def _map(func: Callable[[T], R], items: List[T]) -> List[R]:
    """Ordered map, on a process pool when more than one worker is configured"""
    if Config.THREADS > 1 and len(items) > 1:
        with Pool(processes=min(Config.THREADS, len(items))) as pool:
            return pool.map(func, items)
    return [func(item) for item in items]


def _run_sa(job: Tuple[InstanceSpec, List[NamedLine]]) -> CheckReport:
    spec, family = job
    a, k = gen_pair_sa(spec)
    return check_koplienko(a, k, family, spec)


def _run_unitary(job: Tuple[InstanceSpec, List[NamedCircle]]) -> CheckReport:
    spec, family = job
    u, v = gen_pair_unitary(spec)
    return check_neidhardt(u, v, family, spec)


@monitor_memory(Config.MEMORY_THRESHOLD)
def run_batch_sa(specs: List[InstanceSpec], family: List[NamedLine]) -> List[CheckReport]:
    return _map(_run_sa, [(spec, family) for spec in specs])


@monitor_memory(Config.MEMORY_THRESHOLD)
def run_batch_unitary(specs: List[InstanceSpec], family: List[NamedCircle]) -> List[CheckReport]:
    return _map(_run_unitary, [(spec, family) for spec in specs])


@dataclass
class SweepRow:
    label: str
    dim: int
    parameter: float
    seed: int
    ratio: Optional[float]
    numerator: float
    denominator: float


@dataclass
class SweepTable:
    kind: str
    rows: List[SweepRow] = field(default_factory=list)
    summary: Dict[str, float] = field(default_factory=dict)
    stable: bool = True
    growth: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "rows": [asdict(row) for row in self.rows],
            "summary": dict(self.summary),
            "stable": self.stable,
            "growth": dict(self.growth),
        }


def _cell_medians(rows: List[SweepRow]) -> np.ndarray:
    # seeds are replicates of one (dim, parameter) cell
    cells: Dict[Tuple[int, float], List[float]] = {}
    for row in rows:
        if row.ratio is not None:
            cells.setdefault((row.dim, row.parameter), []).append(row.ratio)
    return np.array([np.median(values) for values in cells.values()], dtype=float)


def _summarize(table: SweepTable) -> SweepTable:
    ratios = _cell_medians(table.rows)
    if ratios.size == 0:
        return table
    maximum = float(np.max(ratios))
    median = float(np.median(ratios))
    spread = maximum / median if median > 0 else math.inf
    table.summary = {"max": maximum, "median": median, "min": float(np.min(ratios)), "max_over_median": spread}
    table.stable = bool(np.all(np.isfinite(ratios))) and spread <= Config.STABILITY_FACTOR
    logger.info("Sweep %s: max ratio %s, max/median %s", table.kind, maximum, spread)
    return table


def _sweep_cell(job: Tuple[str, int, float, int, float]) -> SweepRow:
    kind, dim, parameter, seed, eps = job
    instance_seed = derive_seed(seed, dim, int(parameter))
    if kind == "sa":
        # single band phi at M: ||residual||_S1 / (M^2 ||K||^2 ||phi||_inf)
        a, k = gen_pair_sa(InstanceSpec("sa", dim, instance_seed, eps))
        phi = LineFunction.exponential(parameter)
        numerator = koplienko_residual_sa(a, k, phi).s1
        denominator = parameter ** 2 * s2(k) ** 2 * phi.sup_norm()
    elif kind == "unitary":
        u, v = gen_pair_unitary(InstanceSpec("unitary", dim, instance_seed, eps))
        circle = CircleFunction.monomial(int(parameter))
        numerator = neidhardt_residual_unitary(u, v, circle).s1
        denominator = besov_seminorm(circle, 2) * s2(v - u) ** 2
    elif kind == "circle-certificate":
        circle = CircleFunction.monomial(int(parameter))
        numerator = certificate_norm(circle_factorize(circle))
        denominator = besov_seminorm(circle, 2)
    elif kind == "line-certificate":
        phi = band_bump(parameter)
        numerator = certificate_norm(line_factorize(phi, parameter))
        denominator = parameter ** 2 * phi.sup_norm()
    else:
        raise PreconditionError(f"Unknown sweep kind {kind!r}")
    return SweepRow(kind, dim, parameter, seed, _ratio(numerator, denominator), numerator, denominator)


@monitor_memory(Config.MEMORY_THRESHOLD)
def constant_sweep(
    kind: str,
    dims: Sequence[int],
    grid: Sequence[float],
    seeds: Sequence[int],
    eps: float = Config.DEFAULT_EPS
) -> SweepTable:
    """
    Empirical constants of the norm bounds over dims x grid x seeds

    Args:
        kind: "sa" (grid of bands M), "unitary" (grid of degrees n),
            "circle-certificate" (degrees) or "line-certificate" (bands)
        dims: Matrix dimensions
        grid: Bands or degrees
        seeds: Root seeds
        eps: Perturbation scale; 0 leaves every ratio absent

    Returns:
        SweepTable with one row per seed; the max/median summary runs over
        the seed medians of each (dim, parameter) cell
    """
    if not dims or not grid or not seeds:
        raise PreconditionError("constant_sweep needs nonempty grids")
    jobs = [(kind, int(d), float(p), int(s), eps) for d in dims for p in grid for s in seeds]
    table = SweepTable(kind, _map(_sweep_cell, jobs))
    return _summarize(table)


def growth_exponent(dims: Sequence[int], norms: Sequence[float]) -> float:
    """Least-squares slope of log norm against log dim over positive entries"""
    x = np.log(np.asarray(dims, dtype=float))
    y = np.asarray(norms, dtype=float)
    keep = y > 0
    if np.count_nonzero(keep) < 2:
        return math.nan
    slope, _ = np.polyfit(x[keep], np.log(y[keep]), 1)
    return float(slope)


def _open_cell(job: Tuple[str, CircleFunction, int, int, float]) -> float:
    _, phi, dim, seed, eps = job
    u, v = gen_pair_unitary(InstanceSpec("unitary", dim, derive_seed(seed, dim), eps))
    return neidhardt_residual_unitary(u, v, phi).s1


@monitor_memory(Config.MEMORY_THRESHOLD)
def open_problem_sweep(
    family: List[NamedCircle],
    dims: Sequence[int],
    seeds: Sequence[int],
    eps: float = Config.DEFAULT_EPS
) -> SweepTable:
    """
    Trace norm of the unitary residual against dimension for C^2 test functions

    Exploratory: rows carry seed-averaged norms (ratio column) with no pass
    flag; growth exponents per function are reported in ``growth``.
    """
    jobs = [(name, phi, int(d), int(s), eps) for name, phi in family for d in dims for s in seeds]
    norms = _map(_open_cell, jobs)
    table = SweepTable("open")
    per_seed = len(seeds)
    position = 0
    for name, phi in family:
        averages = []
        for dim in dims:
            values = norms[position:position + per_seed]
            position += per_seed
            mean = float(np.mean(values))
            averages.append(mean)
            table.rows.append(SweepRow(name, int(dim), float(phi.max_degree), 0, mean, mean, 1.0))
        table.growth[name] = growth_exponent(dims, averages)
        drops = [i for i in range(1, len(averages)) if averages[i] < averages[i - 1]]
        if drops:
            logger.warning("Seed-averaged norm of %s decreases at dims %s", name, [dims[i] for i in drops])
    table.stable = True
    return table
