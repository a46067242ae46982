"""
Command-line front end

Subcommands:
    verify-sa        self-adjoint trace formulae on seeded instances
    verify-unitary   unitary trace formula on seeded instances
    shift-fn         xi / eta / unitary eta moments of a matrix pair
    besov            B^s_{inf,1} seminorm of a test function
    factorize        tensor factorization of the divided difference
    sweep-constants  empirical constants of the norm bounds
    sweep-open       exploratory residual growth for C^2 test functions

Exit codes: 0 when every asserted check passes, 1 when a check fails,
2 on usage errors, invalid configuration or unreadable input.
"""
import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .besov import besov_seminorm, characterization_ratio
from .config import Config
from .exceptions import FormatError, ShiftlabError
from .factorize import certificate_norm, circle_factorize, line_factorize, line_reconstruction_error
from .families import circle_family, line_family, open_family, select
from .formats import (
    factorization_to_json,
    function_from_json,
    matrix_from_json,
    read_json,
    shift_to_json,
    write_csv,
    write_json,
)
from .funcmodel import AnyFunction, CircleFunction, LineFunction
from .logging_config import configure_logging
from .shift import (
    KoplienkoEta,
    KreinXi,
    ShiftFunction,
    UnitaryEtaMoments,
    koplienko_eta,
    krein_xi,
    neidhardt_eta,
    sample_eta,
    sample_unitary_eta,
    sample_xi,
)
from .spectral_core import ComplexMatrix
from .verify import (
    CheckReport,
    InstanceSpec,
    SweepTable,
    constant_sweep,
    gen_pair_sa,
    gen_pair_unitary,
    instance_specs,
    open_problem_sweep,
    run_batch_sa,
    run_batch_unitary,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "verify-sa", "verify-unitary", "shift-fn", "besov", "factorize", "sweep-constants", "sweep-open"
)

# Config attributes a run may override
TOLERANCE_KEYS = ("TRACE_FORMULA_TOL", "K2_REL_TOL", "DECOMPOSITION_TOL", "PERTURBATION_REL_TOL")

REPORT_COLUMNS = [
    "instance", "dim", "seed", "function", "trace_re", "trace_im", "pairing_re", "pairing_im",
    "residual", "tolerance", "s1", "s2", "ratio", "pass",
]
SWEEP_COLUMNS = ["label", "dim", "parameter", "seed", "ratio", "numerator", "denominator"]


@dataclass
class RunConfig:
    """Everything a run needs; JSON files mirror the field names"""

    subcommand: str = "verify-sa"
    dims: List[int] = field(default_factory=lambda: [8])
    count: int = 1
    seed: int = Config.DEFAULT_SEED
    eps: float = Config.DEFAULT_EPS
    functions: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    csv: Optional[str] = None
    # shift-fn
    shift: str = "eta"
    matrix_a: Optional[str] = None
    matrix_b: Optional[str] = None
    degree: int = 16
    samples: int = 101
    # besov / factorize
    function: Optional[str] = None
    function_file: Optional[str] = None
    order: int = 2
    band: Optional[float] = None
    nodes: int = Config.LINE_FACTOR_NODES
    # sweeps
    kind: str = "sa"
    grid: List[float] = field(default_factory=list)
    seeds: List[int] = field(default_factory=lambda: [Config.DEFAULT_SEED])

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise FormatError(f"run config: unknown fields {unknown}")
        return cls(**data)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        data = read_json(path)
        if not isinstance(data, dict):
            raise FormatError(f"{path}: run config must be a JSON object")
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        write_json(self.to_dict(), path)

    def report_dict(self) -> Dict[str, Any]:
        """Fields that shape the results; output paths stay out of reports"""
        return {name: value for name, value in self.to_dict().items() if name not in ("out", "csv")}


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonnegative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from exc
    if not value >= 0.0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {value}")
    return value


def _tolerance(text: str) -> Tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or name not in TOLERANCE_KEYS:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {', '.join(TOLERANCE_KEYS)}")
    return name, _nonnegative_float(value)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; every option defaults to None so file values survive"""
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="Numerical checks of second-order spectral shift trace formulae",
    )
    parser.add_argument("--config", help="JSON run config; flags override its values")
    parser.add_argument("--log-level", dest="log_level", type=str.upper,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="Log level (default: SHIFTLAB_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="JSON output path")
        p.add_argument("--csv", help="Flat CSV output path")
        p.add_argument("--seed", type=int, help=f"Root seed (default: {Config.DEFAULT_SEED})")
        p.add_argument("--eps", type=_nonnegative_float, help=f"Perturbation scale (default: {Config.DEFAULT_EPS})")

    for name, text in (("verify-sa", "self-adjoint"), ("verify-unitary", "unitary")):
        p = sub.add_parser(name, help=f"Check the {text} trace formulae on seeded instances")
        common(p)
        p.add_argument("--dim", dest="dims", type=_positive_int, nargs="+", help="Dimensions, cycled")
        p.add_argument("--count", type=_positive_int, help="Number of instances (default: 1)")
        p.add_argument("--functions", nargs="+", help="Family members to check (default: all)")
        p.add_argument("--tol", dest="tolerances", type=_tolerance, action="append",
                       help="Tolerance override NAME=VALUE, repeatable")

    p = sub.add_parser("shift-fn", help="Compute xi, eta or the unitary eta moments of a pair")
    common(p)
    p.add_argument("--shift", choices=["xi", "eta", "unitary"], help="Shift function (default: eta)")
    p.add_argument("--matrix-a", dest="matrix_a", help="Matrix JSON for A (or U)")
    p.add_argument("--matrix-b", dest="matrix_b", help="Matrix JSON for B = A + K (or V)")
    p.add_argument("--dim", dest="dims", type=_positive_int, nargs=1, help="Dimension of a generated pair")
    p.add_argument("--degree", type=_positive_int, help="Moment truncation for unitary (default: 16)")
    p.add_argument("--samples", type=_positive_int, help="Sampling points for --csv (default: 101)")

    for name, text in (("besov", "B^s_{inf,1} seminorm"), ("factorize", "divided-difference factorization")):
        p = sub.add_parser(name, help=f"Compute the {text} of a test function")
        p.add_argument("--out", help="JSON output path")
        p.add_argument("--function", help="Family member by name")
        p.add_argument("--function-file", dest="function_file", help="Function JSON")
        if name == "besov":
            p.add_argument("--order", type=_positive_int, help="Smoothness s, 1 or 2 (default: 2)")
        else:
            p.add_argument("--band", type=_nonnegative_float, help="Band M for line functions")
            p.add_argument("--nodes", type=_positive_int, help=f"Quadrature nodes (default: {Config.LINE_FACTOR_NODES})")

    p = sub.add_parser("sweep-constants", help="Empirical constants of the norm bounds")
    common(p)
    p.add_argument("--kind", choices=["sa", "unitary", "circle-certificate", "line-certificate"])
    p.add_argument("--dim", dest="dims", type=_positive_int, nargs="+")
    p.add_argument("--grid", type=_nonnegative_float, nargs="+", help="Bands or degrees")
    p.add_argument("--seeds", type=int, nargs="+")

    p = sub.add_parser("sweep-open", help="Residual growth with dimension for C^2 test functions (exploratory)")
    common(p)
    p.add_argument("--dim", dest="dims", type=_positive_int, nargs="+")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--functions", nargs="+", help="Test-function members (default: all)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then flags"""
    raw = read_json(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise FormatError(f"{args.config}: run config must be a JSON object")
    values = RunConfig.from_dict(raw).to_dict()
    if "dims" not in raw:
        if args.subcommand == "sweep-open":
            values["dims"] = list(Config.DEFAULT_OPEN_DIMS)
        elif args.subcommand == "sweep-constants":
            values["dims"] = list(Config.DEFAULT_DIMS)
    for name, value in vars(args).items():
        if name in ("config", "log_level") or value is None:
            continue
        if name == "tolerances":
            values["tolerances"] = {**values["tolerances"], **dict(value)}
        else:
            values[name] = value
    for name in ("out", "csv"):
        # relative output paths land under SHIFTLAB_OUTPUT_DIR
        if values[name] and not os.path.isabs(values[name]):
            values[name] = os.path.join(Config.OUTPUT_DIR, values[name])
    return RunConfig.from_dict(values)


class _ToleranceOverride:
    """Temporarily replaces Config tolerance attributes"""

    def __init__(self, tolerances: Dict[str, float]):
        self.tolerances = tolerances
        self.saved: Dict[str, float] = {}

    def __enter__(self) -> "_ToleranceOverride":
        for name, value in self.tolerances.items():
            if name not in TOLERANCE_KEYS:
                raise FormatError(f"run config: unknown tolerance {name!r}")
            self.saved[name] = getattr(Config, name)
            setattr(Config, name, float(value))
        return self

    def __exit__(self, *exc: Any) -> None:
        for name, value in self.saved.items():
            setattr(Config, name, value)


def _report_rows(reports: Sequence[CheckReport]) -> Iterator[List[Any]]:
    for report in reports:
        spec = report.spec
        for row in report.rows:
            yield [
                spec.index if spec else "", spec.dim if spec else "", spec.seed if spec else "", row.name,
                row.trace.real, row.trace.imag, row.pairing.real, row.pairing.imag,
                row.residual, row.tolerance, row.s1, row.s2, row.ratio, row.passed,
            ]


def _sample_grid(shift: ShiftFunction, samples: int) -> np.ndarray:
    if isinstance(shift, UnitaryEtaMoments):
        return np.linspace(-np.pi, np.pi, samples)
    points = shift.breakpoints
    if points.size == 0:
        return np.zeros(samples)
    return np.linspace(points[0], points[-1], samples)


PlotSource = Union[CheckReport, Sequence[CheckReport], SweepTable, KreinXi, KoplienkoEta, UnitaryEtaMoments]


def emit_plotdata(report: PlotSource, path: str, samples: int = 101) -> int:
    """
    Flat CSV with a header row for external plotting

    Reports give one row per (instance, function); sweep tables one row per
    cell; shift functions are sampled on an even grid over their breakpoints
    (theta in [-pi, pi] for the unitary eta).

    Returns:
        Number of data rows written
    """
    if isinstance(report, SweepTable):
        rows = ([r.label, r.dim, r.parameter, r.seed, r.ratio, r.numerator, r.denominator] for r in report.rows)
        return write_csv(SWEEP_COLUMNS, rows, path)
    if isinstance(report, KreinXi):
        x = _sample_grid(report, samples)
        return write_csv(["x", "xi"], zip(x, sample_xi(report, x)), path)
    if isinstance(report, KoplienkoEta):
        x = _sample_grid(report, samples)
        return write_csv(["x", "eta"], zip(x, sample_eta(report, x)), path)
    if isinstance(report, UnitaryEtaMoments):
        theta = _sample_grid(report, samples)
        values = sample_unitary_eta(report, theta)
        return write_csv(["theta", "eta_re", "eta_im"], zip(theta, values.real, values.imag), path)
    reports = [report] if isinstance(report, CheckReport) else list(report)
    return write_csv(REPORT_COLUMNS, _report_rows(reports), path)


def _summary_line(report: CheckReport) -> str:
    spec = report.spec
    failed = [row.name for row in report.rows if not row.passed]
    failed += [name for name, ok in report.instance_checks.items() if not ok]
    worst = max((row.residual for row in report.rows), default=0.0)
    head = f"instance {spec.index} dim {spec.dim} seed {spec.seed}" if spec else "instance"
    status = "PASS" if report.passed else f"FAIL {','.join(failed)}"
    flags = [name for name, on in report.flags.items() if on]
    tail = f" flags {','.join(flags)}" if flags else ""
    return f"{head}: {status} max_residual {worst!r}{tail}"


def _verify(config: RunConfig) -> int:
    kind = "sa" if config.subcommand == "verify-sa" else "unitary"
    specs = instance_specs(kind, config.count, config.dims, config.seed, config.eps)
    reports: List[CheckReport]
    if kind == "sa":
        line = select(config.functions, line_family())
        if not line:
            raise FormatError(f"no line family members match {config.functions}")
        reports = run_batch_sa(specs, line)
    else:
        circle = select(config.functions, circle_family())
        if not circle:
            raise FormatError(f"no circle family members match {config.functions}")
        reports = run_batch_unitary(specs, circle)
    for report in reports:
        print(_summary_line(report))
    passed = all(report.passed for report in reports)
    if config.out:
        write_json({"config": config.report_dict(), "reports": [r.to_dict() for r in reports], "pass": passed}, config.out)
    if config.csv:
        emit_plotdata(reports, config.csv)
    return 0 if passed else 1


def _load_matrix(path: str) -> ComplexMatrix:
    data = read_json(path)
    return matrix_from_json(data)


def _pair(config: RunConfig) -> Tuple[ComplexMatrix, ComplexMatrix]:
    if config.matrix_a and config.matrix_b:
        return _load_matrix(config.matrix_a), _load_matrix(config.matrix_b)
    if config.matrix_a or config.matrix_b:
        raise FormatError("shift-fn needs both --matrix-a and --matrix-b, or neither")
    dim = config.dims[0]
    if config.shift == "unitary":
        return gen_pair_unitary(InstanceSpec("unitary", dim, config.seed, config.eps))
    a, k = gen_pair_sa(InstanceSpec("sa", dim, config.seed, config.eps))
    return a, a + k


def _shift_fn(config: RunConfig) -> int:
    first, second = _pair(config)
    shift: ShiftFunction
    if config.shift == "xi":
        shift = krein_xi(first, second)
    elif config.shift == "eta":
        shift = koplienko_eta(first, second - first)
    else:
        shift = neidhardt_eta(first, second, config.degree)
    data = shift_to_json(shift)
    if isinstance(shift, (KreinXi, KoplienkoEta)):
        data["integral"] = shift.integral()
    size = shift.degree if isinstance(shift, UnitaryEtaMoments) else shift.breakpoints.size
    print(f"{config.shift}: dim {first.shape[0]}, {size} breakpoints or moments")
    if config.out:
        write_json(data, config.out)
    if config.csv:
        emit_plotdata(shift, config.csv, config.samples)
    return 0


def _function(config: RunConfig) -> Tuple[str, AnyFunction]:
    if config.function_file:
        return os.path.basename(config.function_file), function_from_json(read_json(config.function_file))
    if not config.function:
        raise FormatError("give --function NAME or --function-file PATH")
    families: List[Tuple[str, AnyFunction]] = [*line_family(), *circle_family(), *open_family()]
    for name, phi in families:
        if name == config.function:
            return name, phi
    raise FormatError(f"unknown function {config.function!r}")


def _besov(config: RunConfig) -> int:
    name, phi = _function(config)
    value = besov_seminorm(phi, config.order)
    data: Dict[str, Any] = {"function": name, "order": config.order, "seminorm": value}
    if isinstance(phi, LineFunction) and config.order == 2 and not phi.is_zero:
        data["characterization_ratio"] = characterization_ratio(phi)
    print(f"{name}: B^{config.order}_inf1 seminorm {value!r}")
    if config.out:
        write_json(data, config.out)
    return 0


def _factorize(config: RunConfig) -> int:
    name, phi = _function(config)
    data: Dict[str, Any] = {"function": name}
    if isinstance(phi, CircleFunction):
        fact = circle_factorize(phi)
    else:
        if config.band is None:
            raise FormatError("line factorization needs --band")
        fact = line_factorize(phi, config.band, config.nodes)
        grid = np.linspace(-1.0, 1.0, 33) / config.band
        data["reconstruction_error"] = line_reconstruction_error(phi, fact, grid, grid)
    data["certificate"] = certificate_norm(fact)
    data["factorization"] = factorization_to_json(fact)
    print(f"{name}: {len(fact.terms)} terms, certificate {data['certificate']!r}")
    if config.out:
        write_json(data, config.out)
    return 0


def _sweep_constants(config: RunConfig) -> int:
    grid = config.grid
    if not grid:
        grid = list(Config.DEFAULT_BANDS) if config.kind in ("sa", "line-certificate") else [float(d) for d in Config.DEFAULT_DEGREES]
    table = constant_sweep(config.kind, config.dims, grid, config.seeds, config.eps)
    print(f"sweep {config.kind}: {len(table.rows)} cells, summary {table.summary}, stable {table.stable}")
    if config.out:
        write_json({"config": config.report_dict(), "table": table.to_dict()}, config.out)
    if config.csv:
        emit_plotdata(table, config.csv)
    return 0 if table.stable else 1


def _sweep_open(config: RunConfig) -> int:
    family = select(config.functions, open_family())
    if not family:
        raise FormatError(f"no test-function members match {config.functions}")
    table = open_problem_sweep(family, config.dims, config.seeds, config.eps)
    for name, exponent in table.growth.items():
        print(f"{name}: growth exponent {exponent!r}")
    if config.out:
        write_json({"config": config.report_dict(), "table": table.to_dict()}, config.out)
    if config.csv:
        emit_plotdata(table, config.csv)
    return 0


HANDLERS = {
    "verify-sa": _verify,
    "verify-unitary": _verify,
    "shift-fn": _shift_fn,
    "besov": _besov,
    "factorize": _factorize,
    "sweep-constants": _sweep_constants,
    "sweep-open": _sweep_open,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run one subcommand and return its exit code

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None

    Returns:
        0 on success, 1 on failed checks, 2 on usage or input errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if not Config.is_valid():
        configure_logging("INFO")
        failed = [name for name, ok in Config.validate().items() if not ok]
        logger.error("Invalid configuration: %s", ", ".join(failed))
        return 2
    configure_logging(args.log_level or Config.LOG_LEVEL)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        config = resolve_config(args)
        if config.subcommand not in SUBCOMMANDS:
            raise FormatError(f"unknown subcommand {config.subcommand!r}")
        with _ToleranceOverride(config.tolerances):
            return HANDLERS[config.subcommand](config)
    except (ShiftlabError, OSError) as exc:
        logger.error("%s", exc)
        print(f"shiftlab: error: {exc}", file=sys.stderr)
        return 2
