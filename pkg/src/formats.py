"""JSON and CSV formats for matrices, functions, shift functions and reports"""
import csv
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

from .config import Config
from .exceptions import FormatError
from .factorize import TensorFactorization
from .funcmodel import AnyFunction, CircleFunction, LineFunction
from .shift import KoplienkoEta, KreinXi, UnitaryEtaMoments
from .spectral_core import ComplexMatrix

logger = logging.getLogger(__name__)


def _require(data: Dict[str, Any], key: str, context: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise FormatError(f"{context}: missing field {key!r}")
    return data[key]


def matrix_to_json(matrix: ComplexMatrix) -> Dict[str, Any]:
    values = np.asarray(matrix, dtype=np.complex128)
    return {"dim": int(values.shape[0]), "re": values.real.tolist(), "im": values.imag.tolist()}


def matrix_from_json(data: Dict[str, Any]) -> ComplexMatrix:
    """
    Parse {"dim": n, "re": [[...]], "im": [[...]]}

    Raises:
        FormatError: On a missing field, wrong shape or oversized input
    """
    dim = _require(data, "dim", "matrix")
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"matrix: dim must be a positive integer, got {dim!r}")
    if dim > Config.MAX_DIM:
        raise FormatError(f"matrix: dim {dim} exceeds the limit {Config.MAX_DIM}")
    try:
        real = np.asarray(_require(data, "re", "matrix"), dtype=np.float64)
        imag = np.asarray(_require(data, "im", "matrix"), dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix: non-numeric entries ({exc})") from exc
    if real.shape != (dim, dim) or imag.shape != (dim, dim):
        raise FormatError(f"matrix: expected {dim}x{dim} arrays, got {real.shape} and {imag.shape}")
    result: ComplexMatrix = real + 1j * imag
    return result


def function_to_json(phi: AnyFunction) -> Dict[str, Any]:
    if isinstance(phi, CircleFunction):
        return {"kind": "circle", "coeffs": [[n, c.real, c.imag] for n, c in phi.coeffs]}
    return {
        "kind": "line",
        "poly": [[c.real, c.imag] for c in phi.poly],
        "modes": [[w, a.real, a.imag] for w, a in phi.modes],
    }


def function_from_json(data: Dict[str, Any]) -> AnyFunction:
    kind = _require(data, "kind", "function")
    try:
        if kind == "circle":
            coeffs = {int(n): complex(re, im) for n, re, im in _require(data, "coeffs", "function")}
            return CircleFunction.from_dict(coeffs)
        if kind == "line":
            poly = [complex(re, im) for re, im in data.get("poly", [[0, 0]] * 3)]
            modes = [(float(w), complex(re, im)) for w, re, im in data.get("modes", [])]
            return LineFunction.build(poly, modes)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"function: malformed {kind} description ({exc})") from exc
    raise FormatError(f"function: unknown kind {kind!r}")


def shift_to_json(shift: Union[KreinXi, KoplienkoEta, UnitaryEtaMoments]) -> Dict[str, Any]:
    if isinstance(shift, KreinXi):
        return {"kind": "xi", "breakpoints": shift.breakpoints.tolist(), "values": shift.values.tolist()}
    if isinstance(shift, KoplienkoEta):
        return {
            "kind": "eta",
            "breakpoints": shift.breakpoints.tolist(),
            "jumps": shift.jumps.tolist(),
            "slopes": shift.slopes.tolist(),
            "values": shift.values.tolist(),
        }
    return {
        "kind": "unitary_eta",
        "degree": shift.degree,
        "moments": [[m, c.real, c.imag] for m, c in zip(range(-shift.degree, shift.degree + 1), shift.moments)],
        "near_branch_cut": shift.near_branch_cut,
        "decay_exponent": shift.decay_exponent,
    }


def factorization_to_json(fact: TensorFactorization) -> Dict[str, Any]:
    terms = []
    for term in fact.terms:
        terms.append({
            "f": function_to_json(term.f),
            "g": function_to_json(term.g),
            "weight": term.weight,
            "f_lip": term.f_lip,
            "g_sup": term.g_sup,
        })
    return {"domain": fact.domain, "certificate": fact.certificate, "terms": terms}


def _default(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(data: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, default=_default)
    logger.info("Wrote %s", path)


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: str) -> int:
    """Write a header and rows with round-trip float formatting; returns the row count"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.info("Wrote %s rows to %s", count, path)
    return count


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))
