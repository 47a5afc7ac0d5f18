"""JSON wire formats.

Matrices are nested arrays of [re, im] pairs; contexts are
{"blocks": [[dim, weight], ...]}; chains are
{"level": n, "terms": [{"coeff": [re, im], "entries": [matrix, ...]}]};
modules are {"ctx": ..., "D"|"F": matrix, "grading": [+-1, ...] optional,
"generators": [matrix, ...]}.  Reals print with 17 significant digits so
round-trips are exact.
"""

from __future__ import annotations

import json

import numpy as np

from .chains import Chain
from .context import Grading, Operator, TraceContext
from .errors import ScenarioError
from .fredholm import BoundedModule, IndexReport, UnboundedModule


def encode_real(x: float):
    return float(f"{float(x):.17g}")


def encode_matrix(m) -> list:
    a = np.asarray(m, dtype=np.complex128)
    return [[[encode_real(z.real), encode_real(z.imag)] for z in row]
            for row in a]


def decode_matrix(data, where: str = "matrix") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ScenarioError(f"{where}: expected a non-empty list of rows")
    n = len(data)
    out = np.zeros((n, len(data[0])), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != len(data[0]):
            raise ScenarioError(
                f"{where}: row {i} has length {len(row) if isinstance(row, list) else '?'}"
                f", expected {len(data[0])}"
            )
        for j, entry in enumerate(row):
            if (not isinstance(entry, list)) or len(entry) != 2:
                raise ScenarioError(
                    f"{where}: entry [{i}][{j}] must be a [re, im] pair"
                )
            out[i, j] = complex(float(entry[0]), float(entry[1]))
    if out.shape[0] != out.shape[1]:
        raise ScenarioError(f"{where}: matrix must be square, got {out.shape}")
    return out


def encode_context(ctx: TraceContext) -> dict:
    return {"blocks": [[d, encode_real(w)] for d, w in ctx.blocks]}


def decode_context(data, where: str = "ctx") -> TraceContext:
    if not isinstance(data, dict) or "blocks" not in data:
        raise ScenarioError(f"{where}: expected {{'blocks': [[dim, weight], ...]}}")
    try:
        return TraceContext([(int(d), float(w)) for d, w in data["blocks"]])
    except Exception as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def encode_chain(c: Chain) -> dict:
    return {
        "level": c.level,
        "terms": [
            {"coeff": [encode_real(co.real), encode_real(co.imag)],
             "entries": [encode_matrix(e) for e in entries]}
            for co, entries in c.terms
        ],
    }


def decode_chain(ctx: TraceContext, data, where: str = "chain") -> Chain:
    terms = []
    for i, term in enumerate(data.get("terms", [])):
        co = term.get("coeff", [1.0, 0.0])
        entries = [decode_matrix(e, f"{where}.terms[{i}].entries[{j}]")
                   for j, e in enumerate(term.get("entries", []))]
        terms.append((complex(float(co[0]), float(co[1])), entries))
    return Chain(ctx, int(data["level"]), terms)


def encode_module(module) -> dict:
    out = {"ctx": encode_context(module.ctx),
           "generators": [encode_matrix(g.matrix) for g in module.generators]}
    if isinstance(module, BoundedModule):
        out["F"] = encode_matrix(module.F.matrix)
    else:
        out["D"] = encode_matrix(module.D.matrix)
    if module.grading is not None:
        out["grading"] = [int(s) for s in module.grading.signs]
    return out


def decode_module(data, ctx: TraceContext | None = None, where: str = "module"):
    if ctx is None:
        ctx = decode_context(data.get("ctx"), f"{where}.ctx")
    grading = None
    if data.get("grading") is not None:
        grading = Grading(ctx, np.asarray(data["grading"], dtype=float))
    gens = [Operator(ctx, decode_matrix(g, f"{where}.generators[{i}]"),
                     "even" if grading is not None else None)
            for i, g in enumerate(data.get("generators", []))]
    if "D" in data and "F" in data:
        raise ScenarioError(f"{where}: give exactly one of 'D' or 'F'")
    if "D" in data:
        d = Operator(ctx, decode_matrix(data["D"], f"{where}.D"),
                     "odd" if grading is not None else None)
        return UnboundedModule(ctx, d, gens, grading)
    if "F" in data:
        f = Operator(ctx, decode_matrix(data["F"], f"{where}.F"),
                     "odd" if grading is not None else None)
        return BoundedModule(ctx, f, gens, grading)
    raise ScenarioError(f"{where}: needs a 'D' or 'F' matrix")


def encode_index_report(rep: IndexReport) -> dict:
    return {"value": encode_real(rep.value), "method": rep.method,
            "diagnostics": _jsonable(rep.diagnostics)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return encode_real(float(obj))
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return [encode_real(obj.real), encode_real(obj.imag)]
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    return repr(obj)


def dumps(obj, **kw) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, **kw)
