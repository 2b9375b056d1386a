"""Unroll value sequences and nested patterns into core SAX.

A value sequence such as ``read x <[i+1], tail y>`` becomes one cut per
nesting level, each allocating the cell that holds one intermediate
result:

    x_1 <- read x <[i + 1], x_1>;
    read x_1 tail y

Nested patterns turn into nested one-level matches on fresh addresses.
Fresh names are the operated-on address plus a numeric suffix, chosen to
avoid every name already used in the enclosing definition.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import replace

from .ast import (
    Branch, Call, CaseRead, CaseWrite, Copy, Cut, Impossible, IndexK, IndexV,
    LabelK, LabelV, PairK, PairV, ProcDef, PropK, PropV, Read, Signature,
    UnitK, UnitV, Write,
)
from .parser import pattern_to_cont
from .subst import all_names


class _Fresh:
    def __init__(self, taken):
        self.taken = set(taken)

    def __call__(self, parent) -> str:
        stem = re.sub(r"_\d+$", "", parent) if isinstance(parent, str) else "a"
        for n in itertools.count(1):
            name = f"{stem}_{n}"
            if name not in self.taken:
                self.taken.add(name)
                return name
        raise AssertionError


def _atomic(arg) -> bool:
    return not isinstance(arg, (UnitV, PairV, LabelV, IndexV, PropV))


def _with_arg(v, arg):
    return replace(v, **{"second" if isinstance(v, PairV) else "arg": arg})


def _arg(v):
    return v.second if isinstance(v, PairV) else v.arg


def _is_core_value(v) -> bool:
    return isinstance(v, UnitV) or _atomic(_arg(v))


def _write_seq(x, v, fresh):
    """x^W.V* -> y <- (y^W.rest); x^W.(outer y)"""
    if _is_core_value(v):
        return Write(x, v, v.loc)
    y = fresh(x)
    inner = _write_seq(y, _arg(v), fresh)
    return Cut(y, inner, Write(x, _with_arg(v, y), v.loc), None, v.loc)


def _read_seq(x, v, fresh):
    """x^R.V* -> y <- (x^R.(outer y)); y^R.rest"""
    if _is_core_value(v):
        return Read(x, v, v.loc)
    y = fresh(x)
    step = Read(x, _with_arg(v, y), v.loc)
    return Cut(y, step, _read_seq(y, _arg(v), fresh), None, v.loc)


def _cont(k, case_ctor, parent, fresh):
    """Desugar a continuation; nested patterns become nested matches."""

    def under(pat, body, loc):
        if _atomic(pat):
            return pat, _proc(body, fresh)
        y = fresh(parent)
        inner = _cont(pattern_to_cont(pat, body, loc), case_ctor, y, fresh)
        return y, case_ctor(y, inner, loc)

    match k:
        case UnitK(body):
            return UnitK(_proc(body, fresh), k.loc)
        case PairK(a, pat, body):
            p, b = under(pat, body, k.loc)
            return PairK(a, p, b, k.loc)
        case IndexK(i, pat, body):
            p, b = under(pat, body, k.loc)
            return IndexK(i, p, b, k.loc)
        case PropK(phi, pat, body):
            p, b = under(pat, body, k.loc)
            return PropK(phi, p, b, k.loc)
        case LabelK(brs):
            out = []
            for br in brs:
                p, b = under(br.pat, br.body, br.loc)
                out.append(Branch(br.label, p, b, br.loc))
            return LabelK(tuple(out), k.loc)
    raise TypeError(k)


def _proc(p, fresh):
    match p:
        case Copy() | Call() | Impossible():
            return p
        case Cut(x, a, b, annot):
            return Cut(x, _proc(a, fresh), _proc(b, fresh), annot, p.loc)
        case Write(x, v):
            return _write_seq(x, v, fresh)
        case Read(x, v):
            return _read_seq(x, v, fresh)
        case CaseRead(x, k):
            return CaseRead(x, _cont(k, CaseRead, x, fresh), p.loc)
        case CaseWrite(x, k):
            return CaseWrite(x, _cont(k, CaseWrite, x, fresh), p.loc)
    raise TypeError(p)


def desugar(p, taken=()):
    """Desugar one process.  ``taken`` lists names fresh ones must avoid."""
    return _proc(p, _Fresh(set(taken) | all_names(p)))


def desugar_def(d: ProcDef) -> ProcDef:
    taken = set(d.params) | {x for x, _ in d.args} | {d.dest}
    return replace(d, body=desugar(d.body, taken))


def desugar_signature(sig: Signature) -> Signature:
    return sig.replace_procs({n: desugar_def(d) for n, d in sig.procs.items()})


def is_core(p) -> bool:
    """True when ``p`` has no value sequences and no nested patterns."""
    match p:
        case Copy() | Call() | Impossible():
            return True
        case Cut(_, a, b, _):
            return is_core(a) and is_core(b)
        case Write(_, v) | Read(_, v):
            return _is_core_value(v)
        case CaseRead(_, k) | CaseWrite(_, k):
            match k:
                case UnitK(body):
                    return is_core(body)
                case LabelK(brs):
                    return all(_atomic(br.pat) and is_core(br.body) for br in brs)
                case PairK(_, pat, body) | IndexK(_, pat, body) | PropK(_, pat, body):
                    return _atomic(pat) and is_core(body)
    return False
