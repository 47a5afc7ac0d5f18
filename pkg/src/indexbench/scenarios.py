"""Scenario files: declarative batches of module constructions and index
tasks, executed into machine-readable reports.

A scenario is JSON:

    {"name": ..., "ctx": {"blocks": [[dim, weight], ...]},
     "modules": {name: module-spec | {"construct": {"op": ..., "source": ...}}},
     "ktheory": {name: {"kind": "projection"|"unitary",
                        "matrix": ... | "generator": i, "module": name,
                        "N": 1}},
     "tasks": [{"kind": ..., ...,
                "expected": value, "tolerance": tol, "provenance": str}]}

Module constructions: {"op": "double"|"to_bounded", "source": name} or
{"op": "d_alpha", "source": name, "alpha": a}.  Tasks never abort the batch;
failures and errors are recorded per task.  Reports are reproducible: with a
fixed seed two runs produce identical numeric output (wall times excluded).
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, pairings
from .context import TraceContext
from .errors import IndexbenchError, ScenarioError
from .fredholm import (
    BoundedModule,
    UnboundedModule,
    d_alpha,
    double,
    double_generator,
    ef_index_kernel,
    ef_index_parametrix,
    mckean_singer,
    pairing_even_bounded,
    pairing_odd_bounded,
    pseudo_parametrix,
    spectral_flow,
    to_bounded,
    validate,
)
from .serialization import (
    decode_context,
    decode_matrix,
    decode_module,
    dumps,
    encode_index_report,
)

TASK_KINDS = (
    "validate",
    "kernel_index",
    "parametrix_index",
    "mckean_singer",
    "connes_pairing",
    "jlo_pairing",
    "spectral_flow",
    "summability",
)

CONSTRUCT_OPS = ("double", "to_bounded", "d_alpha")


@dataclass
class Scenario:
    name: str
    ctx: TraceContext
    module_specs: dict
    ktheory: dict
    tasks: list
    source: dict = field(repr=False, default_factory=dict)


def load_scenario(path) -> Scenario:
    """Parse and validate; errors name the offending field."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, "
                            f"column {exc.colno}: {exc.msg}") from exc
    ctx = decode_context(data.get("ctx"), "ctx")
    modules = data.get("modules", {})
    for name, spec in modules.items():
        if "construct" in spec:
            op = spec["construct"].get("op")
            if op not in CONSTRUCT_OPS:
                raise ScenarioError(
                    f"modules.{name}.construct.op: unknown op {op!r}; "
                    f"valid: {', '.join(CONSTRUCT_OPS)}"
                )
            src = spec["construct"].get("source")
            if src not in modules:
                raise ScenarioError(
                    f"modules.{name}.construct.source: no module named {src!r}"
                )
    for name, spec in data.get("ktheory", {}).items():
        kind = spec.get("kind")
        if kind not in ("projection", "unitary"):
            raise ScenarioError(
                f"ktheory.{name}.kind: expected 'projection' or 'unitary', "
                f"got {kind!r}"
            )
        if "matrix" not in spec and "generator" not in spec:
            raise ScenarioError(
                f"ktheory.{name}: needs a 'matrix' or a 'generator' index"
            )
    tasks = data.get("tasks", [])
    for i, task in enumerate(tasks):
        kind = task.get("kind")
        if kind not in TASK_KINDS:
            raise ScenarioError(
                f"tasks[{i}].kind: unknown kind {kind!r}; valid kinds: "
                f"{', '.join(TASK_KINDS)}"
            )
    return Scenario(
        name=data.get("name", path.stem),
        ctx=ctx,
        module_specs=modules,
        ktheory=data.get("ktheory", {}),
        tasks=tasks,
        source=data,
    )


class _Workspace:
    """Lazily constructed modules and K-theory elements with error capture."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._modules: dict = {}

    def module(self, name: str):
        if name in self._modules:
            return self._modules[name]
        spec = self.scenario.module_specs.get(name)
        if spec is None:
            raise ScenarioError(f"no module named {name!r}")
        if "construct" in spec:
            c = spec["construct"]
            src = self.module(c["source"])
            op = c["op"]
            if op == "double":
                out = double(src)
            elif op == "to_bounded":
                out = to_bounded(src)
            else:
                out = UnboundedModule(src.ctx, d_alpha(src, float(c["alpha"])),
                                      src.generators, src.grading)
        else:
            out = decode_module(spec, ctx=self.scenario.ctx,
                                where=f"modules.{name}")
        self._modules[name] = out
        return out

    def element(self, name: str):
        spec = self.scenario.ktheory.get(name)
        if spec is None:
            raise ScenarioError(f"no ktheory element named {name!r}")
        n_copies = int(spec.get("N", 1))
        if "matrix" in spec:
            mat = decode_matrix(spec["matrix"], f"ktheory.{name}.matrix")
        else:
            mod = self.module(spec["module"])
            idx = int(spec["generator"])
            if idx >= len(mod.generators):
                raise ScenarioError(
                    f"ktheory.{name}.generator: module {spec['module']!r} "
                    f"has {len(mod.generators)} generators"
                )
            mat = np.asarray(mod.generators[idx].matrix)
        return spec["kind"], mat, n_copies


def _digest(scenario: Scenario, task: dict) -> str:
    payload = json.dumps({"task": task, "ctx": scenario.source.get("ctx"),
                          "name": scenario.name}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _run_task(ws: _Workspace, task: dict, options: dict) -> dict:
    kind = task["kind"]
    out: dict = {"kind": kind}
    if kind == "validate":
        rep = validate(ws.module(task["module"]))
        out["value"] = 1.0 if rep["pass"] else 0.0
        out["report"] = rep
        out["pass"] = rep["pass"]
        return out

    if kind == "summability":
        from .context import summability_report

        mod = ws.module(task["module"])
        rep = summability_report(mod.ctx, mod.D, float(task.get("p", 2.0)))
        out["value"] = rep["p_value"]
        out["report"] = {"ptheta_bound_pass": rep["ptheta_bound_pass"]}
        out["pass"] = rep["ptheta_bound_pass"]
        return _finish(out, task, options)

    if kind == "spectral_flow":
        mod = ws.module(task["module"]) if "module" in task else None
        ctx = mod.ctx if mod is not None else ws.scenario.ctx
        path = [decode_matrix(m, f"spectral_flow.path[{i}]")
                for i, m in enumerate(task["path"])]
        rep = spectral_flow(path, ctx)
        out["value"] = rep.value
        out["report"] = encode_index_report(rep)
        return _finish(out, task, options)

    module = ws.module(task["module"])
    kind_name, mat, n_copies = ws.element(task["element"])

    if kind == "kernel_index":
        if kind_name == "projection":
            rep = pairing_even_bounded(module, mat, n_copies)
        else:
            rep = pairing_odd_bounded(module, mat, n_copies)
    elif kind == "parametrix_index":
        if kind_name != "projection":
            raise ScenarioError("parametrix_index expects a projection")
        from .context import inflate_operator

        ctx2 = module.ctx.inflate(n_copies)
        chi2 = inflate_operator(module.grading.matrix, n_copies)
        f2 = inflate_operator(module.F.matrix, n_copies)
        eye = np.eye(ctx2.total_dim)
        e = mat @ (eye + chi2) / 2.0
        f = mat @ (eye - chi2) / 2.0
        s = task.get("parametrix")
        s_mat = decode_matrix(s, "parametrix") if s is not None \
            else pseudo_parametrix(ctx2, e, f, f2).matrix
        rep = ef_index_parametrix(ctx2, e, f, f2, s_mat,
                                  int(task.get("m", 1)))
    elif kind == "mckean_singer":
        rep = mckean_singer(module, mat, n_copies, float(task.get("t", 1.0)))
    elif kind == "connes_pairing":
        rep = pairings.connes_pairing(module, mat, n_copies,
                                      int(task["level"]))
    elif kind == "jlo_pairing":
        rep = pairings.jlo_pairing(module, mat, n_copies,
                                   int(task.get("max_level", 8)))
    else:  # unreachable after load validation
        raise ScenarioError(f"unknown task kind {kind!r}")
    out["value"] = rep.value
    out["report"] = encode_index_report(rep)
    if kind == "jlo_pairing":
        out["tail_bound"] = rep.diagnostics["tail_bound"]
    return _finish(out, task, options)


def _finish(out: dict, task: dict, options: dict) -> dict:
    expected = task.get("expected")
    if expected is not None:
        tol = float(task.get("tolerance",
                             options.get("tol", 1e-8)))
        dev = abs(out["value"] - float(expected))
        slack = out.get("tail_bound", 0.0) * (1 + 1e-6)
        out["expected"] = float(expected)
        out["tolerance"] = tol
        out["deviation"] = dev
        out["pass"] = dev <= tol + slack
        if "provenance" in task:
            out["provenance"] = task["provenance"]
    else:
        out.setdefault("pass", True)
    return out


def run(scenario: Scenario, options: dict | None = None) -> dict:
    """Execute every task; failures never abort the batch."""
    options = dict(options or {})
    seed = int(options.get("seed", 0))
    jobs = max(1, int(options.get("jobs", 1)))
    ws = _Workspace(scenario)

    def exec_task(idx_task):
        idx, task = idx_task
        t0 = time.perf_counter()
        row = {"index": idx, "digest": _digest(scenario, task)}
        expect_error = bool(task.get("expect_error", False))
        try:
            row.update(_run_task(ws, task, options))
            if expect_error:
                row["pass"] = False
                row["error"] = "expected an error but the task succeeded"
        except IndexbenchError as exc:
            row.update({"kind": task.get("kind"), "error": str(exc),
                        "pass": expect_error})
        except Exception as exc:  # numerical/user-input edge cases
            row.update({"kind": task.get("kind"),
                        "error": f"{type(exc).__name__}: {exc}",
                        "pass": expect_error})
        row["wall_time"] = time.perf_counter() - t0
        return row

    items = list(enumerate(scenario.tasks))
    if jobs == 1:
        rows = [exec_task(it) for it in items]
    else:
        # modules construct lazily; prebuild them serially so workers only
        # run pure evaluations
        for name in scenario.module_specs:
            try:
                ws.module(name)
            except IndexbenchError:
                pass
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(exec_task, items))
    rows.sort(key=lambda r: r["index"])
    failed = [r for r in rows if not r.get("pass", False)]
    return {
        "scenario": scenario.name,
        "seed": seed,
        "tool_version": __version__,
        "tasks": rows,
        "summary": {
            "total": len(rows),
            "passed": len(rows) - len(failed),
            "failed": len(failed),
        },
        "pass": not failed,
    }


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps(report) + "\n")
