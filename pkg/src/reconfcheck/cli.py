"""Command line front end.

    reconfcheck verify  MODEL OPS PLAN PROP [--defs FILE] [flags]
    reconfcheck oracle  MODEL OPS PLAN PROP [--defs FILE] [--max-depth N] [flags]
    reconfcheck compile PLAN OPS [--emit-dot FILE]

Exit codes: 0 property holds, 1 property fails, 2 the inputs are outside
what the checker answers soundly (non-flat property, or an unsound cycle
under --strict), 3 input or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .checker import check
from .errors import InputError
from .formulas import parse_ftpl
from .model import parse_config, validate_config
from .operations import parse_ops
from .oracle import oracle_check
from .paths import compile_path, emit_dot, parse_path
from .properties import parse_definitions
from .verdict import Status, Verdict

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_REJECTED = 2
EXIT_INPUT_ERROR = 3


def _read(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _load_inputs(args):
    config = parse_config(_read(args.model), source=args.model)
    violations = validate_config(config)
    if violations:
        raise InputError("invalid model:\n  " + "\n  ".join(violations))
    op_table = parse_ops(_read(args.ops), source=args.ops)
    plan = parse_path(_read(args.plan), op_table, source=args.plan)
    definitions = {}
    if args.defs:
        definitions = parse_definitions(_read(args.defs), source=args.defs)
    formula = parse_ftpl(_read(args.prop), definitions, op_table, source=args.prop)
    return config, op_table, plan, formula


def _report(verdict: Verdict, *, args, extra=None) -> dict:
    report = {
        "verdict": verdict.status.value,
        "counterexample": (None if verdict.counterexample is None else
                           [{"operation": op, "state": state}
                            for op, state in verdict.counterexample]),
        "warnings": [{"code": w.code, "message": w.message} for w in verdict.warnings],
        "stats": _jsonable(verdict.stats),
    }
    if verdict.reason:
        report["reason"] = verdict.reason
    if verdict.bound is not None:
        report["bound"] = verdict.bound
    if verdict.approximate:
        report["approximate"] = True
    if extra:
        report.update(extra)
    return report


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _render(report, args):
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    print(f"verdict: {report['verdict']}")
    if report.get("reason"):
        print(f"reason: {report['reason']}")
    if report.get("counterexample"):
        steps = ", ".join(f"{s['operation']} (q{s['state']})"
                          for s in report["counterexample"])
        print(f"counterexample: {steps}")
    for w in report["warnings"]:
        print(f"warning: {w['code']}: {w['message']}")
    if "bound" in report:
        suffix = " (approximate)" if report.get("approximate") else ""
        print(f"depth bound: {report['bound']}{suffix}")
    if "timing_ms" in report:
        print(f"time: {report['timing_ms']} ms")
    if args.trace and report.get("counterexample") is not None:
        print("trace states: " + " -> ".join(
            ["q0"] + [f"q{s['state']}" for s in report["counterexample"]]))


def _verdict_exit(verdict: Verdict) -> int:
    return {Status.TRUE: EXIT_TRUE, Status.FALSE: EXIT_FALSE,
            Status.REJECTED: EXIT_REJECTED}[verdict.status]


def cmd_verify(args) -> int:
    config, op_table, plan, formula = _load_inputs(args)
    automaton = compile_path(plan)
    if args.emit_dot:
        with open(args.emit_dot, "w", encoding="utf-8") as handle:
            handle.write(emit_dot(automaton))
    started = time.monotonic()
    verdict = check(formula, automaton, config, op_table, marks=args.marks,
                    eventually=args.eventually, strict=args.strict)
    elapsed = round((time.monotonic() - started) * 1000, 3)
    report = _report(verdict, args=args)
    if not args.no_timing:
        report["timing_ms"] = elapsed
    _render(report, args)
    return _verdict_exit(verdict)


def cmd_oracle(args) -> int:
    config, op_table, plan, formula = _load_inputs(args)
    automaton = compile_path(plan)
    depth = args.max_depth if args.max_depth is not None else 2 * automaton.n_states
    started = time.monotonic()
    verdict = oracle_check(formula, automaton, config, op_table, depth,
                           eventually_mode=args.eventually)
    elapsed = round((time.monotonic() - started) * 1000, 3)
    report = _report(verdict, args=args)
    if not args.no_timing:
        report["timing_ms"] = elapsed
    _render(report, args)
    return _verdict_exit(verdict)


def cmd_compile(args) -> int:
    op_table = parse_ops(_read(args.ops), source=args.ops)
    plan = parse_path(_read(args.plan), op_table, source=args.plan)
    automaton = compile_path(plan)
    if args.emit_dot:
        with open(args.emit_dot, "w", encoding="utf-8") as handle:
            handle.write(emit_dot(automaton))
    report = {
        "states": automaton.n_states,
        "transitions": len(automaton.transitions),
        "back_edges": len(automaton.back_edges),
    }
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(f"{report['states']} states, {report['transitions']} transitions, "
              f"{report['back_edges']} back-edges")
    return EXIT_TRUE


def _add_common(parser, *, with_files=True, with_check_flags=True):
    if with_files:
        parser.add_argument("model", help="architecture model (JSON)")
        parser.add_argument("ops", help="operation table (JSON)")
        parser.add_argument("plan", help="reconfiguration plan (.rpx)")
        parser.add_argument("prop", help="temporal property (.ftpl)")
        parser.add_argument("--defs", help="property definitions file")
    parser.add_argument("--json", action="store_true", help="machine-readable report")
    parser.add_argument("--trace", action="store_true",
                        help="spell out counterexample states")
    parser.add_argument("--no-timing", action="store_true",
                        help="suppress the timing field (byte-stable output)")
    if with_check_flags:
        parser.add_argument("--eventually", choices=("maximal", "prefix"),
                            default="maximal", help="eventually semantics over cycles")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reconfcheck",
        description="verify temporal properties of reconfiguration plans")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the marking checker")
    _add_common(p_verify)
    p_verify.add_argument("--strict", action="store_true",
                          help="reject runs whose cycle assumptions fail")
    p_verify.add_argument("--marks", choices=("fresh", "shared"), default="fresh",
                          help="mark table sharing across checker launches")
    p_verify.add_argument("--emit-dot", metavar="FILE", help="write the automaton as DOT")
    p_verify.set_defaults(func=cmd_verify)

    p_oracle = sub.add_parser("oracle", help="run the exhaustive reference semantics")
    _add_common(p_oracle)
    p_oracle.add_argument("--max-depth", type=int, default=None,
                          help="path length bound (default: twice the state count)")
    p_oracle.set_defaults(func=cmd_oracle)

    p_compile = sub.add_parser("compile", help="compile a plan and print stats")
    p_compile.add_argument("plan", help="reconfiguration plan (.rpx)")
    p_compile.add_argument("ops", help="operation table (JSON)")
    p_compile.add_argument("--emit-dot", metavar="FILE", help="write the automaton as DOT")
    p_compile.add_argument("--json", action="store_true", help="machine-readable report")
    p_compile.set_defaults(func=cmd_compile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
