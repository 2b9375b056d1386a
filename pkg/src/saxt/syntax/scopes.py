"""Scope checking of desugared program bodies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ast import (
    Call, CaseRead, CaseWrite, Copy, Cut, Impossible, IndexK, IndexV, LabelK,
    LabelV, Loc, PairK, PairV, PropK, PropV, Read, Signature, UnitK, UnitV,
    Write,
)
from .subst import fv_expr, fv_prop, fv_type


@dataclass(frozen=True)
class Diagnostic:
    definition: str
    severity: str  # 'error' | 'warning'
    message: str
    loc: Optional[Loc] = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.severity}: {self.definition}: {self.message}"


@dataclass
class ScopeReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors


class ScopeError(Exception):
    def __init__(self, report: ScopeReport):
        self.report = report
        super().__init__("\n".join(str(d) for d in report.errors))


class _Walker:
    def __init__(self, name: str, report: ScopeReport):
        self.name = name
        self.report = report

    def err(self, msg, loc):
        self.report.diagnostics.append(Diagnostic(self.name, "error", msg, loc))

    def warn(self, msg, loc):
        self.report.diagnostics.append(Diagnostic(self.name, "warning", msg, loc))

    def need_addr(self, x, addrs, loc):
        if x not in addrs:
            self.err(f"unbound address {x}", loc)

    def need_dest(self, x, dest, loc, what):
        if x != dest:
            self.err(f"{what} {x}, but the destination here is {dest}", loc)

    def need_idx(self, vars_, idx, loc):
        for v in sorted(vars_ - idx):
            self.err(f"unbound index variable {v}", loc)

    def bind_addr(self, x, addrs, dest, loc):
        if x in addrs or x == dest:
            self.warn(f"address {x} shadows an enclosing binding", loc)
        return addrs | {x}

    def bind_idx(self, i, idx, loc):
        if i in idx:
            self.warn(f"index variable {i} shadows an enclosing binding", loc)
        return idx | {i}

    def proc(self, p, addrs: frozenset, idx: frozenset, dest):
        loc = getattr(p, "loc", None)
        match p:
            case Copy(y, x):
                self.need_dest(y, dest, loc, "copy writes to")
                self.need_addr(x, addrs, loc)
            case Cut(x, a, b, annot):
                if annot is not None:
                    self.need_idx(fv_type(annot), idx, loc)
                if x in addrs or x == dest:
                    self.warn(f"address {x} shadows an enclosing binding", loc)
                self.proc(a, addrs - {x}, idx, x)
                self.proc(b, addrs | {x}, idx, dest)
            case Write(x, v):
                self.need_dest(x, dest, loc, "writes to")
                self.write_value(v, addrs, idx, loc)
            case Read(x, v):
                self.need_addr(x, addrs, loc)
                self.read_value(v, addrs, idx, dest, loc)
            case CaseRead(x, k):
                self.need_addr(x, addrs, loc)
                self.cont(k, addrs, idx, dest, reading=True)
            case CaseWrite(x, k):
                self.need_dest(x, dest, loc, "writes a continuation to")
                self.cont(k, addrs, idx, dest, reading=False)
            case Call(y, f, es, xs):
                self.need_dest(y, dest, loc, f"call of {f} writes to")
                for e in es:
                    self.need_idx(fv_expr(e), idx, loc)
                for x in xs:
                    self.need_addr(x, addrs, loc)
            case Impossible():
                pass
            case _:
                self.err(f"unexpected process {p!r}", loc)

    def write_value(self, v, addrs, idx, loc):
        match v:
            case UnitV():
                pass
            case PairV(a, b):
                self.need_addr(a, addrs, loc)
                self.need_addr(b, addrs, loc)
            case LabelV(_, a) | PropV(_, a):
                self.need_addr(a, addrs, loc)
                if isinstance(v, PropV):
                    self.need_idx(fv_prop(v.prop), idx, loc)
            case IndexV(e, a):
                self.need_idx(fv_expr(e), idx, loc)
                self.need_addr(a, addrs, loc)

    def read_value(self, v, addrs, idx, dest, loc):
        match v:
            case PairV(a, b):
                self.need_addr(a, addrs, loc)
                self.need_dest(b, dest, loc, "result of the read goes to")
            case LabelV(_, b):
                self.need_dest(b, dest, loc, "result of the read goes to")
            case IndexV(e, b):
                self.need_idx(fv_expr(e), idx, loc)
                self.need_dest(b, dest, loc, "result of the read goes to")
            case PropV(phi, b):
                self.need_idx(fv_prop(phi), idx, loc)
                self.need_dest(b, dest, loc, "result of the read goes to")
            case UnitV():
                self.err("a unit value cannot be passed to a continuation", loc)

    def cont(self, k, addrs, idx, dest, reading):
        loc = k.loc
        match k:
            case UnitK(body):
                self.proc(body, addrs, idx, dest)
            case PairK(a, b, body):
                addrs2 = self.bind_addr(a, addrs, dest, loc)
                if reading:
                    self.proc(body, self.bind_addr(b, addrs2, dest, loc), idx, dest)
                else:
                    self.proc(body, addrs2, idx, b)
            case LabelK(brs):
                for br in brs:
                    if reading:
                        self.proc(br.body, self.bind_addr(br.pat, addrs, dest, br.loc), idx, dest)
                    else:
                        self.proc(br.body, addrs, idx, br.pat)
            case IndexK(i, b, body):
                idx2 = self.bind_idx(i, idx, loc)
                if reading:
                    self.proc(body, self.bind_addr(b, addrs, dest, loc), idx2, dest)
                else:
                    self.proc(body, addrs, idx2, b)
            case PropK(phi, b, body):
                self.need_idx(fv_prop(phi), idx, loc)
                if reading:
                    self.proc(body, self.bind_addr(b, addrs, dest, loc), idx, dest)
                else:
                    self.proc(body, addrs, idx, b)


def check_scopes(sig: Signature) -> ScopeReport:
    """Check every program body; the signature must already be desugared."""
    report = ScopeReport()
    for d in sig.procs.values():
        w = _Walker(d.name, report)
        idx = frozenset(d.params)
        for c in d.constraints:
            w.need_idx(fv_prop(c), idx, d.loc)
        for _, a in d.args:
            w.need_idx(fv_type(a), idx, d.loc)
        w.need_idx(fv_type(d.result), idx, d.loc)
        if d.measure is not None:
            for e in d.measure:
                w.need_idx(fv_expr(e), idx, d.loc)
        w.proc(d.body, frozenset(x for x, _ in d.args), idx, d.dest)
    if sig.exec is not None:
        for e in sig.exec.args:
            if fv_expr(e):
                report.diagnostics.append(Diagnostic(
                    sig.exec.name, "error", "exec arguments must be closed", sig.exec.loc))
    return report
