"""``saxt``: check, validate, run, solve and format ``.sax`` programs.

Exit codes: 0 success, 1 check or validity failure, 2 stuck, 3 out of
fuel, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import runtime
from .arith import NonlinearError, query_entails
from .pipeline import Program, load_file
from .syntax import ParseError, parse_program, pretty_program
from .validity import Mode, validate_program

EXIT_OK, EXIT_FAIL, EXIT_STUCK, EXIT_FUEL, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit(obj, out):
    print(json.dumps(obj, ensure_ascii=False), file=out)


def _front(path: str, use_json: bool, command: str, out) -> Optional[Program]:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    prog = load_file(path)
    for w in prog.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if prog.ok:
        return prog
    for e in prog.errors:
        if use_json:
            _emit({"command": command, "status": "error", **e.to_json()}, out)
        else:
            print(f"error: {e}", file=out)
    return None


def cmd_check(args, out) -> int:
    prog = _front(args.file, args.json, "check", out)
    if prog is None:
        return EXIT_FAIL
    for name, d in prog.derivations.items():
        if args.json:
            _emit({"command": "check", "status": "ok", "definition": name,
                   "rule": d.rule, "calls": [c.call.callee for c in d.calls()]}, out)
        else:
            print(f"OK {name}", file=out)
            if args.derivations:
                print(d.render(1), file=out)
    n = len(prog.derivations)
    if not args.json:
        print(f"{n} definition{'' if n == 1 else 's'}", file=out)
    return EXIT_OK


def cmd_validate(args, out) -> int:
    prog = _front(args.file, args.json, "validate", out)
    if prog is None:
        return EXIT_FAIL
    mode = Mode.STRICT if args.strict else Mode.NUMBERED
    report = validate_program(prog.core, prog.derivations, mode)
    if args.json:
        _emit({"command": "validate", "status": "ok" if report.valid else "invalid",
               **report.to_json()}, out)
    else:
        print(f"mode: {mode.value}", file=out)
        print(report.table(), file=out)
        print("valid" if report.valid else "INVALID", file=out)
    return EXIT_OK if report.valid else EXIT_FAIL


def _parse_args_list(text: Optional[str]) -> Optional[tuple[int, ...]]:
    if text is None:
        return None
    if not text.strip():
        return ()
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--args expects comma-separated naturals, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise UsageError("--args expects natural numbers")
    return vals


def _default_fuel() -> int:
    env = os.environ.get("SAXT_FUEL")
    if env is None:
        return runtime.DEFAULT_FUEL
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"SAXT_FUEL must be an integer, got {env!r}") from None


def cmd_run(args, out) -> int:
    prog = _front(args.file, args.json, "run", out)
    if prog is None:
        return EXIT_FAIL
    if not args.unsafe:
        report = validate_program(prog.core, prog.derivations,
                                  Mode.STRICT if args.strict else Mode.NUMBERED)
        if not report.valid:
            print("refusing to run a program that fails validity (use --unsafe to "
                  "override):", file=sys.stderr)
            print(report.table(), file=sys.stderr)
            return EXIT_FAIL
    entry, lits = args.entry, _parse_args_list(args.args)
    if entry is None:
        directive = runtime.exec_directive(prog.core)
        if directive is None:
            raise UsageError("no --entry given and the file has no exec directive")
        entry = directive[0]
        if lits is None:
            lits = directive[1]
    lits = lits or ()
    fuel = args.fuel if args.fuel is not None else _default_fuel()
    try:
        result = runtime.run(prog.core, entry, lits, fuel=fuel, seed=args.seed,
                             schedule=args.schedule, probe=args.probe,
                             record=args.trace is not None)
    except runtime.RunError as e:
        raise UsageError(str(e)) from None
    except runtime.RuntimeFault as e:
        print(f"runtime fault: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    if args.trace is not None:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for rec in result.trace:
                fh.write(json.dumps(rec) + "\n")
    value = result.value(args.show_indices) if result.status is runtime.Status.FINAL else None
    if args.json:
        _emit({"command": "run", "status": result.status.value, "value": value,
               "steps": result.steps}, out)
    elif value is not None:
        print(value, file=out)
    else:
        print(f"{result.status.value} after {result.steps} steps", file=sys.stderr)
    return result.exit_code


def cmd_solve(args, out) -> int:
    try:
        ok = query_entails(args.query)
    except (ParseError, ValueError, NonlinearError) as e:
        raise UsageError(f"bad query: {e}") from None
    if args.json:
        _emit({"command": "solve", "status": "ok", "query": args.query, "entails": ok}, out)
    else:
        print("valid" if ok else "invalid", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fmt(args, out) -> int:
    path = Path(args.file)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        formatted = pretty_program(parse_program(text))
    except ParseError as e:
        print(f"error: {e}", file=out)
        return EXIT_FAIL
    if args.check:
        return EXIT_OK if formatted == text else EXIT_FAIL
    if args.in_place:
        path.write_text(formatted, encoding="utf-8")
    else:
        out.write(formatted)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="saxt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="parse, scope check and typecheck")
    c.add_argument("file")
    c.add_argument("--json", action="store_true", help="JSON lines output")
    c.add_argument("--derivations", action="store_true", help="print derivation trees")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("validate", help="check, then verify termination validity")
    v.add_argument("file")
    v.add_argument("--strict", action="store_true", help="no definition numbering")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="validate, then execute")
    r.add_argument("file")
    r.add_argument("--entry", help="definition to run (default: the exec directive)")
    r.add_argument("--args", help="comma-separated literal index arguments, e.g. 2,5")
    r.add_argument("--fuel", type=int, help="maximum number of steps")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--schedule", choices=["random", "leftmost"], default="random")
    r.add_argument("--trace", metavar="OUT.jsonl", help="write one JSON object per step")
    r.add_argument("--probe", metavar="LABEL", help="send LABEL to a continuation result")
    r.add_argument("--show-indices", action="store_true")
    r.add_argument("--strict", action="store_true", help="validate in strict mode")
    r.add_argument("--unsafe", action="store_true", help="run even if validity fails")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("solve", help='decide one entailment "V; C |- phi"')
    s.add_argument("query")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("fmt", help="print the canonical form")
    f.add_argument("file")
    g = f.add_mutually_exclusive_group()
    g.add_argument("--check", action="store_true", help="exit 1 unless already canonical")
    g.add_argument("--in-place", action="store_true")
    f.set_defaults(func=cmd_fmt)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"saxt: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
