"""The front end shared by every subcommand.

``load`` runs parsing, desugaring, scope checking, the contractiveness
check and typechecking, stopping at the first stage that reports errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .syntax import (
    ParseError, Signature, check_scopes, desugar_signature, parse_program,
)
from .syntax.scopes import Diagnostic
from .typecheck import (
    CheckError, Derivation, check_definitions, contractive_error,
    noncontractive_cycles,
)


@dataclass
class Program:
    source: Signature
    core: Signature
    derivations: dict[str, Derivation] = field(default_factory=dict)
    errors: list[CheckError] = field(default_factory=list)
    warnings: list[Diagnostic] = field(default_factory=list)
    stage: str = "ok"  # the stage that failed, or "ok"

    @property
    def ok(self) -> bool:
        return not self.errors


class FrontEndError(Exception):
    def __init__(self, program: Program):
        self.program = program
        super().__init__("\n".join(str(e) for e in program.errors))


def _scope_error(d: Diagnostic) -> CheckError:
    return CheckError(d.definition, "scope", d.message, loc=d.loc, category="scope")


def load(text: str, typecheck: bool = True) -> Program:
    """Run the front end over source text; errors are collected, not raised."""
    try:
        sig = parse_program(text)
    except ParseError as e:
        empty = Signature({}, {})
        return Program(empty, empty, errors=[CheckError(None, "parse", e.msg, loc=e.loc,
                                                        category="parse")], stage="parse")
    core = desugar_signature(sig)
    prog = Program(sig, core)
    report = check_scopes(core)
    prog.warnings = report.warnings
    if report.errors:
        prog.errors = [_scope_error(d) for d in report.errors]
        prog.stage = "scope"
        return prog
    cycles = noncontractive_cycles(core)
    if cycles:
        prog.errors = [contractive_error(c) for c in cycles]
        prog.stage = "contractive"
        return prog
    if typecheck:
        prog.derivations, prog.errors = check_definitions(core)
        if prog.errors:
            prog.stage = "type"
    return prog


def load_file(path: str | Path, typecheck: bool = True) -> Program:
    return load(Path(path).read_text(encoding="utf-8"), typecheck)


def load_checked(text: str) -> Program:
    prog = load(text)
    if not prog.ok:
        raise FrontEndError(prog)
    return prog
