"""JSON problem and report files.

Complex numbers are stored as two-element ``[re, im]`` arrays; floats are
written with ``repr`` precision so a parse/serialize cycle is lossless.
Malformed input raises :class:`ProblemFormatError` naming the offending
location, either as a JSON path (``terms[1].matrix[2][0]``) or, for syntax
errors, as a line and column.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .flow import FlowOptions
from .functions import Exponential, MatrixValuedFunction, Monomial, MonomialExp, NormalizationRecord
from .outer import DistanceReport, IterationRecord, OuterOptions
from .structure import StructureSpec


class ProblemFormatError(ValueError):
    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


@dataclass
class Problem:
    F: MatrixValuedFunction
    spec: StructureSpec
    options: OuterOptions = field(default_factory=OuterOptions)
    name: str = ""


# option keys that may appear in a problem file; "flow" holds FlowOptions fields
_OPTION_KEYS = [f.name for f in fields(OuterOptions) if f.name not in ("flow", "verify_grid")]
_FLOW_KEYS = [f.name for f in fields(FlowOptions)]


def _complex_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _matrix_to_json(A) -> list:
    return [[_complex_pair(x) for x in row] for row in np.asarray(A)]


def _block_to_json(B) -> list:
    return [_matrix_to_json(A) for A in np.asarray(B)]


def _num(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ProblemFormatError(where, f"expected a number, got {type(x).__name__}")
    return float(x)


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ProblemFormatError(where, f"expected an integer, got {x!r}")
    return x


def _list(x, where: str, length: int | None = None) -> list:
    if not isinstance(x, list):
        raise ProblemFormatError(where, f"expected an array, got {type(x).__name__}")
    if length is not None and len(x) != length:
        raise ProblemFormatError(where, f"expected {length} entries, got {len(x)}")
    return x


def _dict(x, where: str) -> dict:
    if not isinstance(x, dict):
        raise ProblemFormatError(where, f"expected an object, got {type(x).__name__}")
    return x


def _complex(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    re, im = _list(x, where, 2)
    return complex(_num(re, where + "[0]"), _num(im, where + "[1]"))


def _matrix(x, n: int, where: str) -> np.ndarray:
    rows = _list(x, where, n)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        for j, v in enumerate(_list(row, f"{where}[{i}]", n)):
            out[i, j] = _complex(v, f"{where}[{i}][{j}]")
    if not np.all(np.isfinite(out)):
        raise ProblemFormatError(where, "non-finite entry")
    return out


def _reject_unknown(obj: dict, allowed, where: str) -> None:
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ProblemFormatError(where, f"unknown key(s) {extra}")


def scalar_to_json(t) -> dict:
    if isinstance(t, Monomial):
        return {"kind": "monomial", "power": t.power}
    if isinstance(t, Exponential):
        return {"kind": "exp", "rate": _complex_pair(t.rate)}
    if isinstance(t, MonomialExp):
        return {"kind": "monexp", "power": t.power, "rate": _complex_pair(t.rate)}
    raise TypeError(f"{type(t).__name__} cannot be written to a problem file")


def _rate(c: complex):
    # keep real rates real so that equality and printing stay simple
    return c.real if c.imag == 0 else c


def scalar_from_json(obj, where: str):
    obj = _dict(obj, where)
    kind = obj.get("kind")
    if kind == "monomial":
        _reject_unknown(obj, ("kind", "power"), where)
        p = _int(obj.get("power"), where + ".power")
        if p < 0:
            raise ProblemFormatError(where + ".power", "must be nonnegative")
        return Monomial(p)
    if kind == "exp":
        _reject_unknown(obj, ("kind", "rate"), where)
        return Exponential(_rate(_complex(obj.get("rate"), where + ".rate")))
    if kind == "monexp":
        _reject_unknown(obj, ("kind", "power", "rate"), where)
        p = _int(obj.get("power"), where + ".power")
        if p < 0:
            raise ProblemFormatError(where + ".power", "must be nonnegative")
        return MonomialExp(p, _rate(_complex(obj.get("rate"), where + ".rate")))
    raise ProblemFormatError(where + ".kind", f"unknown scalar kind {kind!r}")


def structure_to_json(spec: StructureSpec) -> dict:
    masks = []
    for mk in spec.zero_masks:
        masks.append(None if mk is None else [[int(i), int(j)] for i, j in zip(*np.nonzero(mk))])
    return {"masks": masks, "real": spec.real, "frozen": sorted(spec.frozen)}


def structure_from_json(obj, d: int, n: int, where: str = "structure") -> StructureSpec:
    if obj is None:
        return StructureSpec.unconstrained(d, n)
    obj = _dict(obj, where)
    _reject_unknown(obj, ("masks", "real", "frozen"), where)
    real = obj.get("real", False)
    if not isinstance(real, bool):
        raise ProblemFormatError(where + ".real", "expected true or false")
    masks = None
    if obj.get("masks") is not None:
        raw = _list(obj["masks"], where + ".masks", d)
        masks = []
        for t, entry in enumerate(raw):
            w = f"{where}.masks[{t}]"
            if entry is None:
                masks.append(None)
                continue
            mk = np.zeros((n, n), dtype=bool)
            for k, pos in enumerate(_list(entry, w)):
                i, j = (_int(v, f"{w}[{k}][{q}]") for q, v in enumerate(_list(pos, f"{w}[{k}]", 2)))
                if not (0 <= i < n and 0 <= j < n):
                    raise ProblemFormatError(f"{w}[{k}]", f"position ({i}, {j}) outside a {n} x {n} matrix")
                mk[i, j] = True
            masks.append(mk)
    frozen = []
    for k, i in enumerate(_list(obj.get("frozen", []), where + ".frozen")):
        i = _int(i, f"{where}.frozen[{k}]")
        if not 0 <= i < d:
            raise ProblemFormatError(f"{where}.frozen[{k}]", f"term index must lie in 0..{d - 1}")
        frozen.append(i)
    return StructureSpec(d, n, None if masks is None else tuple(masks), real, frozenset(frozen))


def options_to_json(opts: OuterOptions) -> dict:
    out = {k: getattr(opts, k) for k in _OPTION_KEYS}
    out["flow"] = {k: getattr(opts.flow, k) for k in _FLOW_KEYS}
    return out


def _typed(value, default, where):
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ProblemFormatError(where, "expected true or false")
        return value
    if isinstance(default, int):
        return _int(value, where)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ProblemFormatError(where, "expected a string")
        return value
    return _num(value, where)


def options_from_json(obj, where: str = "options") -> OuterOptions:
    if obj is None:
        return OuterOptions()
    obj = _dict(obj, where)
    _reject_unknown(obj, _OPTION_KEYS + ["flow"], where)
    base, fbase = OuterOptions(), FlowOptions()
    kw = {}
    for k in _OPTION_KEYS:
        if k in obj:
            default = getattr(base, k)
            # None defaults are optional floats, except the integer node count
            proto = 0 if k == "num_points" else (0.0 if default is None else default)
            kw[k] = _typed(obj[k], proto, f"{where}.{k}")
    if obj.get("flow") is not None:
        fo = _dict(obj["flow"], where + ".flow")
        _reject_unknown(fo, _FLOW_KEYS, where + ".flow")
        fkw = {k: _typed(fo[k], getattr(fbase, k), f"{where}.flow.{k}") for k in _FLOW_KEYS if k in fo}
        kw["flow"] = FlowOptions(**fkw)
    try:
        return OuterOptions(**kw)
    except ValueError as exc:
        raise ProblemFormatError(where, str(exc)) from None


def problem_to_dict(p: Problem) -> dict:
    F = p.F
    return {
        "name": p.name,
        "n": F.n,
        "d": F.d,
        "terms": [{"scalar": scalar_to_json(s), "matrix": _matrix_to_json(A)} for s, A in zip(F.scalars, F.coeffs)],
        "structure": structure_to_json(p.spec),
        "options": options_to_json(p.options),
    }


def problem_from_dict(obj) -> Problem:
    obj = _dict(obj, "$")
    _reject_unknown(obj, ("name", "n", "d", "terms", "structure", "options"), "$")
    n = _int(obj.get("n"), "n")
    d = _int(obj.get("d"), "d")
    if n < 1 or d < 1:
        raise ProblemFormatError("n" if n < 1 else "d", "must be positive")
    terms = _list(obj.get("terms"), "terms", d)
    pairs = []
    for t, term in enumerate(terms):
        w = f"terms[{t}]"
        term = _dict(term, w)
        _reject_unknown(term, ("scalar", "matrix"), w)
        pairs.append((scalar_from_json(term.get("scalar"), w + ".scalar"), _matrix(term.get("matrix"), n, w + ".matrix")))
    try:
        F = MatrixValuedFunction.from_terms(pairs)
    except ValueError as exc:
        raise ProblemFormatError("terms", str(exc)) from None
    spec = structure_from_json(obj.get("structure"), d, n)
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise ProblemFormatError("name", "expected a string")
    return Problem(F, spec, options_from_json(obj.get("options")), name)


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None


def parse_problem(text: str) -> Problem:
    return problem_from_dict(_loads(text))


def serialize_problem(p: Problem) -> str:
    return json.dumps(problem_to_dict(p), indent=1)


def load_problem(path) -> Problem:
    return parse_problem(Path(path).read_text())


def save_problem(path, p: Problem) -> None:
    Path(path).write_text(serialize_problem(p) + "\n")


# reports

def report_to_dict(r: DistanceReport) -> dict:
    return {
        "tool_version": __version__,
        "eps_star": r.eps_star,
        "eps_star_original": r.eps_star_original,
        "delta": _block_to_json(r.delta),
        "normalization": {
            "alpha": r.normalization.alpha,
            "p": r.normalization.p,
            "max_abs_det_before": r.normalization.max_abs_det_before,
        },
        "iterations": [
            {"eps": it.eps, "g": it.g, "m": it.m, "kind": it.kind, "inner_steps": it.inner_steps, "svd_count": it.svd_count}
            for it in r.iterations
        ],
        "m_history": list(r.m_history),
        "verification": dict(r.verification),
        "converged": r.converged,
        "eps_low": r.eps_low,
        "eps_up": r.eps_up,
        "tol1": r.tol1,
        "scaled": r.scaled,
        "m_frozen": r.m_frozen,
        "svd_count": r.svd_count,
        "wall_time": r.wall_time,
    }


def report_from_dict(obj) -> DistanceReport:
    obj = _dict(obj, "$")
    try:
        nr = obj["normalization"]
        d = _list(obj["delta"], "delta")
        n = len(d[0]) if d else 0
        delta = np.stack([_matrix(B, n, f"delta[{t}]") for t, B in enumerate(d)])
        return DistanceReport(
            eps_star=float(obj["eps_star"]),
            eps_star_original=float(obj["eps_star_original"]),
            delta=delta,
            normalization=NormalizationRecord(float(nr["alpha"]), int(nr["p"]), float(nr["max_abs_det_before"])),
            iterations=[IterationRecord(**it) for it in obj["iterations"]],
            m_history=[int(m) for m in obj["m_history"]],
            verification=dict(obj["verification"]),
            converged=bool(obj["converged"]),
            eps_low=float(obj["eps_low"]),
            eps_up=float(obj["eps_up"]),
            tol1=float(obj["tol1"]),
            scaled=bool(obj["scaled"]),
            m_frozen=bool(obj["m_frozen"]),
            svd_count=int(obj["svd_count"]),
            wall_time=float(obj["wall_time"]),
        )
    except KeyError as exc:
        raise ProblemFormatError(str(exc.args[0]), "missing field") from None
    except (TypeError, IndexError) as exc:
        raise ProblemFormatError("$", f"malformed report ({exc})") from None


def parse_report(text: str) -> DistanceReport:
    return report_from_dict(_loads(text))


def serialize_report(r: DistanceReport) -> str:
    return json.dumps(report_to_dict(r), indent=1)


def load_report(path) -> DistanceReport:
    return parse_report(Path(path).read_text())


def save_report(path, r: DistanceReport) -> None:
    Path(path).write_text(serialize_report(r) + "\n")


def reports_equal(a: DistanceReport, b: DistanceReport, ignore_timing: bool = False) -> bool:
    da, db = report_to_dict(a), report_to_dict(b)
    if ignore_timing:
        da.pop("wall_time")
        db.pop("wall_time")
    return json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)
