"""Command line interface.

    indexbench run <scenario.json> [--out report.json] [--seed N] [--tol X]
                   [--slow] [--jobs K]
    indexbench verify --suite <name> [--seed N] [--slow]
    indexbench pair --module m.json --ktheory k.json --levels 0..6
                    [--out report.json]

Exit codes: 0 all pass, 1 any failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, pairings, scenarios, verify
from .errors import IndexbenchError, ScenarioError
from .fredholm import BoundedModule, UnboundedModule, mckean_singer, \
    pairing_even_bounded, pairing_odd_bounded, to_bounded
from .serialization import decode_matrix, decode_module, dumps, \
    encode_index_report


def _parse_levels(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(report: dict, out_path) -> None:
    text = dumps(report)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        print(text)


def cmd_run(args) -> int:
    scenario = scenarios.load_scenario(args.scenario)
    options = {"seed": args.seed, "jobs": args.jobs, "slow": args.slow}
    if args.tol is not None:
        options["tol"] = args.tol
    report = scenarios.run(scenario, options)
    _emit(report, args.out)
    summary = report["summary"]
    print(f"{scenario.name}: {summary['passed']}/{summary['total']} tasks passed",
          file=sys.stderr)
    for row in report["tasks"]:
        if not row.get("pass", False):
            label = row.get("error") or \
                f"value {row.get('value')} vs expected {row.get('expected')}"
            print(f"  task {row['index']} ({row.get('kind')}): {label}",
                  file=sys.stderr)
    return 0 if report["pass"] else 1


def cmd_verify(args) -> int:
    report = verify.run_suite(args.suite, seed=args.seed, slow=args.slow)
    suites = report.get("suites", [report])
    ok = True
    for suite in suites:
        for check in suite["checks"]:
            status = "pass" if check["pass"] else "FAIL"
            print(f"[{status}] {suite['suite']}: {check['name']}")
            ok &= check["pass"]
    print(f"verify {args.suite}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


def cmd_pair(args) -> int:
    module_data = json.loads(Path(args.module).read_text())
    module = decode_module(module_data, where=str(args.module))
    k_data = json.loads(Path(args.ktheory).read_text())
    kind = k_data.get("kind")
    if kind not in ("projection", "unitary"):
        raise ScenarioError("ktheory file needs kind: projection | unitary")
    mat = decode_matrix(k_data["matrix"], "ktheory.matrix")
    n_copies = int(k_data.get("N", 1))
    levels = _parse_levels(args.levels)
    parity = 0 if module.grading is not None else 1
    rows = []
    bounded = module if isinstance(module, BoundedModule) else None
    unbounded = module if isinstance(module, UnboundedModule) else None
    if bounded is None and unbounded is not None:
        bounded = to_bounded(unbounded)
    for level in levels:
        if level % 2 != parity:
            continue
        rep = pairings.connes_pairing(bounded, mat, n_copies, level)
        rows.append(encode_index_report(rep))
    if kind == "projection":
        rows.append(encode_index_report(
            pairing_even_bounded(bounded, mat, n_copies)))
        if unbounded is not None:
            rows.append(encode_index_report(
                mckean_singer(unbounded, mat, n_copies, 1.0)))
            usable = [lv for lv in levels if lv % 2 == parity]
            if usable:
                rows.append(encode_index_report(pairings.jlo_pairing(
                    unbounded, mat, n_copies, max(usable))))
    else:
        rows.append(encode_index_report(
            pairing_odd_bounded(bounded, mat, n_copies)))
    values = [r["value"] for r in rows]
    spread = max(values) - min(values) if values else 0.0
    report = {"module": str(args.module), "ktheory": str(args.ktheory),
              "levels": levels, "pairings": rows, "spread": spread,
              "tool_version": __version__}
    _emit(report, args.out)
    print(f"pair: {len(rows)} computations, spread {spread:.3e}",
          file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indexbench",
        description="index pairings on weighted-trace matrix algebras",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--tol", type=float, default=None)
    p_run.add_argument("--slow", action="store_true")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(fn=cmd_run)

    p_ver = sub.add_parser("verify", help="run a built-in property suite")
    p_ver.add_argument("--suite", required=True, choices=verify.SUITES)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--slow", action="store_true")
    p_ver.set_defaults(fn=cmd_verify)

    p_pair = sub.add_parser("pair", help="pair one module with one K-theory element")
    p_pair.add_argument("--module", required=True)
    p_pair.add_argument("--ktheory", required=True)
    p_pair.add_argument("--levels", default="0..6")
    p_pair.add_argument("--out", default=None)
    p_pair.set_defaults(fn=cmd_pair)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ScenarioError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IndexbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
