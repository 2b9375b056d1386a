"""Free variables and capture-avoiding substitution.

Two independent namespaces are involved: arithmetic (index) variables,
substituted by expressions, and address variables, substituted by other
names or runtime addresses.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

from .ast import (
    Arrow, Assert, BinOp, Branch, Call, CaseRead, CaseWrite, Conn, Copy, Cut,
    Exists, Forall, Guard, Impossible, IndexK, IndexV, LabelK, LabelV, Lit,
    Not, One, PairK, PairV, Plus, PropK, PropV, Quant, Read, Rel, Tensor,
    Truth, TypeRef, UnitK, UnitV, Var, With, Write,
)


def fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    stem = base.rstrip("'")
    if base not in taken:
        return base
    for n in itertools.count(1):
        cand = f"{stem}_{n}"
        if cand not in taken:
            return cand
    raise AssertionError


# --------------------------------------------------------------------------
# arithmetic


def fv_expr(e) -> set[str]:
    match e:
        case Var(name):
            return {name}
        case Lit():
            return set()
        case BinOp(_, a, b):
            return fv_expr(a) | fv_expr(b)
    raise TypeError(e)


def fv_prop(p) -> set[str]:
    match p:
        case Rel(_, a, b):
            return fv_expr(a) | fv_expr(b)
        case Conn(_, a, b):
            return fv_prop(a) | fv_prop(b)
        case Not(a):
            return fv_prop(a)
        case Quant(_, v, body):
            return fv_prop(body) - {v}
        case Truth():
            return set()
    raise TypeError(p)


def subst_expr(e, s: Mapping[str, object]):
    match e:
        case Var(name):
            return s.get(name, e)
        case Lit():
            return e
        case BinOp(op, a, b):
            return BinOp(op, subst_expr(a, s), subst_expr(b, s), e.loc)
    raise TypeError(e)


def _range_fv(s: Mapping[str, object]) -> set[str]:
    out: set[str] = set()
    for v in s.values():
        out |= fv_expr(v)
    return out


def _bind(var: str, s: Mapping[str, object], avoid: set[str]):
    """Return (var', s') for descending under a binder of ``var``."""
    s = {k: v for k, v in s.items() if k != var}
    if var in _range_fv(s):
        new = fresh_name(var, avoid | _range_fv(s) | set(s))
        s[var] = Var(new)
        return new, s
    return var, s


def subst_prop(p, s: Mapping[str, object]):
    if not s:
        return p
    match p:
        case Rel(op, a, b):
            return Rel(op, subst_expr(a, s), subst_expr(b, s), p.loc)
        case Conn(op, a, b):
            return Conn(op, subst_prop(a, s), subst_prop(b, s), p.loc)
        case Not(a):
            return Not(subst_prop(a, s), p.loc)
        case Quant(kind, v, body):
            v2, s2 = _bind(v, s, fv_prop(body))
            return Quant(kind, v2, subst_prop(body, s2), p.loc)
        case Truth():
            return p
    raise TypeError(p)


# --------------------------------------------------------------------------
# types


def fv_type(t) -> set[str]:
    match t:
        case One():
            return set()
        case Tensor(a, b) | Arrow(a, b):
            return fv_type(a) | fv_type(b)
        case Plus(brs) | With(brs):
            out: set[str] = set()
            for _, a in brs:
                out |= fv_type(a)
            return out
        case Exists(v, body) | Forall(v, body):
            return fv_type(body) - {v}
        case Assert(p, body) | Guard(p, body):
            return fv_prop(p) | fv_type(body)
        case TypeRef(_, args):
            out = set()
            for e in args:
                out |= fv_expr(e)
            return out
    # inference holes and other checker-internal placeholders
    return set()


def subst_type(t, s: Mapping[str, object]):
    if not s:
        return t
    match t:
        case One():
            return t
        case Tensor(a, b):
            return Tensor(subst_type(a, s), subst_type(b, s), t.loc)
        case Arrow(a, b):
            return Arrow(subst_type(a, s), subst_type(b, s), t.loc)
        case Plus(brs):
            return Plus(tuple((l, subst_type(a, s)) for l, a in brs), t.loc)
        case With(brs):
            return With(tuple((l, subst_type(a, s)) for l, a in brs), t.loc)
        case Exists(v, body):
            v2, s2 = _bind(v, s, fv_type(body))
            return Exists(v2, subst_type(body, s2), t.loc)
        case Forall(v, body):
            v2, s2 = _bind(v, s, fv_type(body))
            return Forall(v2, subst_type(body, s2), t.loc)
        case Assert(p, body):
            return Assert(subst_prop(p, s), subst_type(body, s), t.loc)
        case Guard(p, body):
            return Guard(subst_prop(p, s), subst_type(body, s), t.loc)
        case TypeRef(name, args):
            return TypeRef(name, tuple(subst_expr(e, s) for e in args), t.loc)
    return t


# --------------------------------------------------------------------------
# processes: index substitution


def _pat_binders(pat) -> tuple[set[str], set[str]]:
    """(address binders, index binders) of a possibly nested pattern."""
    match pat:
        case str():
            return {pat}, set()
        case UnitV():
            return set(), set()
        case PairV(a, rest):
            addrs, idx = _pat_binders(rest)
            return addrs | {a}, idx
        case LabelV(_, rest) | PropV(_, rest):
            return _pat_binders(rest)
        case IndexV(Var(i), rest):
            addrs, idx = _pat_binders(rest)
            return addrs, idx | {i}
    raise TypeError(pat)


def fv_idx_process(p) -> set[str]:
    """Free arithmetic variables of a process."""
    match p:
        case Copy() | Impossible():
            return set()
        case Cut(_, a, b, annot):
            out = fv_idx_process(a) | fv_idx_process(b)
            return out | (fv_type(annot) if annot is not None else set())
        case Write(_, v) | Read(_, v):
            return _fv_idx_value(v)
        case CaseRead(_, k) | CaseWrite(_, k):
            return _fv_idx_cont(k)
        case Call(_, _, idx, _):
            out = set()
            for e in idx:
                out |= fv_expr(e)
            return out
    raise TypeError(p)


def _fv_idx_value(v) -> set[str]:
    match v:
        case str() | UnitV():
            return set()
        case PairV(_, rest) | LabelV(_, rest):
            return _fv_idx_value(rest)
        case IndexV(e, rest):
            return fv_expr(e) | _fv_idx_value(rest)
        case PropV(phi, rest):
            return fv_prop(phi) | _fv_idx_value(rest)
    return set()


def _fv_idx_cont(k) -> set[str]:
    match k:
        case UnitK(body):
            return fv_idx_process(body)
        case PairK(_, pat, body):
            return _fv_idx_pat_body(pat, body)
        case LabelK(brs):
            out = set()
            for br in brs:
                out |= _fv_idx_pat_body(br.pat, br.body)
            return out
        case IndexK(i, pat, body):
            return _fv_idx_pat_body(pat, body) - {i}
        case PropK(phi, pat, body):
            return fv_prop(phi) | _fv_idx_pat_body(pat, body)
    raise TypeError(k)


def _fv_idx_pat_body(pat, body) -> set[str]:
    _, idx = _pat_binders(pat)
    # constraints inside nested patterns may mention the pattern's own binders
    return (fv_idx_process(body) | _fv_idx_value(pat)) - idx


def subst_idx_value(v, s):
    match v:
        case str() | UnitV():
            return v
        case PairV(a, rest):
            return PairV(a, subst_idx_value(rest, s), v.loc)
        case LabelV(l, rest):
            return LabelV(l, subst_idx_value(rest, s), v.loc)
        case IndexV(e, rest):
            return IndexV(subst_expr(e, s), subst_idx_value(rest, s), v.loc)
        case PropV(phi, rest):
            return PropV(subst_prop(phi, s), subst_idx_value(rest, s), v.loc)
    return v


def subst_idx_process(p, s: Mapping[str, object]):
    """Substitute arithmetic expressions for index variables in ``p``."""
    if not s:
        return p
    match p:
        case Copy() | Impossible():
            return p
        case Cut(x, a, b, annot):
            return Cut(x, subst_idx_process(a, s), subst_idx_process(b, s),
                       subst_type(annot, s) if annot is not None else None, p.loc)
        case Write(x, v):
            return Write(x, subst_idx_value(v, s), p.loc)
        case Read(x, v):
            return Read(x, subst_idx_value(v, s), p.loc)
        case CaseRead(x, k):
            return CaseRead(x, _subst_idx_cont(k, s), p.loc)
        case CaseWrite(x, k):
            return CaseWrite(x, _subst_idx_cont(k, s), p.loc)
        case Call(y, f, idx, args):
            return Call(y, f, tuple(subst_expr(e, s) for e in idx), args, p.loc)
    raise TypeError(p)


def _subst_idx_under(pat, body, s):
    """Substitute into (pattern, body) respecting the pattern's index binders."""
    if isinstance(pat, str):
        return pat, subst_idx_process(body, s)
    _, binders = _pat_binders(pat)
    s2 = {k: v for k, v in s.items() if k not in binders}
    clash = binders & _range_fv(s2)
    if clash:
        avoid = fv_idx_process(body) | _range_fv(s2) | set(s2) | binders
        ren = {}
        for b in sorted(clash):
            new = fresh_name(b, avoid)
            avoid.add(new)
            ren[b] = new
        pat = _rename_pat_idx(pat, ren)
        body = subst_idx_process(body, {k: Var(v) for k, v in ren.items()})
    return subst_idx_value(pat, s2) if _has_props(pat) else pat, subst_idx_process(body, s2)


def _has_props(pat) -> bool:
    match pat:
        case PropV():
            return True
        case PairV(_, rest) | LabelV(_, rest) | IndexV(_, rest):
            return not isinstance(rest, str) and _has_props(rest)
    return False


def _rename_pat_idx(pat, ren):
    match pat:
        case IndexV(Var(i), rest):
            rest2 = rest if isinstance(rest, str) else _rename_pat_idx(rest, ren)
            return IndexV(Var(ren.get(i, i)), rest2, pat.loc)
        case PairV(a, rest) if not isinstance(rest, str):
            return PairV(a, _rename_pat_idx(rest, ren), pat.loc)
        case LabelV(l, rest) if not isinstance(rest, str):
            return LabelV(l, _rename_pat_idx(rest, ren), pat.loc)
        case PropV(phi, rest):
            rest2 = rest if isinstance(rest, str) else _rename_pat_idx(rest, ren)
            return PropV(subst_prop(phi, {k: Var(v) for k, v in ren.items()}), rest2, pat.loc)
    return pat


def _subst_idx_cont(k, s):
    match k:
        case UnitK(body):
            return UnitK(subst_idx_process(body, s), k.loc)
        case PairK(a, pat, body):
            pat2, body2 = _subst_idx_under(pat, body, s)
            return PairK(a, pat2, body2, k.loc)
        case LabelK(brs):
            out = []
            for br in brs:
                pat2, body2 = _subst_idx_under(br.pat, br.body, s)
                out.append(Branch(br.label, pat2, body2, br.loc))
            return LabelK(tuple(out), k.loc)
        case IndexK(i, pat, body):
            wrapped = IndexV(Var(i), pat)
            pat2, body2 = _subst_idx_under(wrapped, body, s)
            return IndexK(pat2.expr.name, pat2.arg, body2, k.loc)
        case PropK(phi, pat, body):
            pat2, body2 = _subst_idx_under(pat, body, s)
            return PropK(subst_prop(phi, s), pat2, body2, k.loc)
    raise TypeError(k)


# --------------------------------------------------------------------------
# processes: address substitution


def subst_addr_name(x, s):
    return s.get(x, x) if isinstance(x, str) else x


def _subst_addr_value(v, s):
    match v:
        case str():
            return s.get(v, v)
        case UnitV():
            return v
        case PairV(a, rest):
            return PairV(subst_addr_name(a, s), _subst_addr_value(rest, s), v.loc)
        case LabelV(l, rest):
            return LabelV(l, _subst_addr_value(rest, s), v.loc)
        case IndexV(e, rest):
            return IndexV(e, _subst_addr_value(rest, s), v.loc)
        case PropV(phi, rest):
            return PropV(phi, _subst_addr_value(rest, s), v.loc)
    return v


def subst_addr_process(p, s: Mapping[str, object]):
    """Rename free address variables.  The range must not be captured:
    callers substitute runtime addresses or names fresh for ``p``."""
    if not s:
        return p
    match p:
        case Copy(y, x):
            return Copy(subst_addr_name(y, s), subst_addr_name(x, s), p.loc)
        case Cut(x, a, b, annot):
            inner = {k: v for k, v in s.items() if k != x}
            return Cut(x, subst_addr_process(a, inner), subst_addr_process(b, inner),
                       annot, p.loc)
        case Write(x, v):
            return Write(subst_addr_name(x, s), _subst_addr_value(v, s), p.loc)
        case Read(x, v):
            return Read(subst_addr_name(x, s), _subst_addr_value(v, s), p.loc)
        case CaseRead(x, k):
            return CaseRead(subst_addr_name(x, s), _subst_addr_cont(k, s), p.loc)
        case CaseWrite(x, k):
            return CaseWrite(subst_addr_name(x, s), _subst_addr_cont(k, s), p.loc)
        case Call(y, f, idx, args):
            return Call(subst_addr_name(y, s), f, idx,
                        tuple(subst_addr_name(a, s) for a in args), p.loc)
        case Impossible():
            return p
    raise TypeError(p)


def _under_pat(pat, body, s):
    addrs, _ = _pat_binders(pat)
    inner = {k: v for k, v in s.items() if k not in addrs}
    return subst_addr_process(body, inner)


def _subst_addr_cont(k, s):
    match k:
        case UnitK(body):
            return UnitK(subst_addr_process(body, s), k.loc)
        case PairK(a, pat, body):
            inner = {kk: v for kk, v in s.items() if kk != a}
            return PairK(a, pat, _under_pat(pat, body, inner), k.loc)
        case LabelK(brs):
            return LabelK(tuple(Branch(br.label, br.pat, _under_pat(br.pat, br.body, s), br.loc)
                                for br in brs), k.loc)
        case IndexK(i, pat, body):
            return IndexK(i, pat, _under_pat(pat, body, s), k.loc)
        case PropK(phi, pat, body):
            return PropK(phi, pat, _under_pat(pat, body, s), k.loc)
    raise TypeError(k)


def free_addrs(p) -> set[str]:
    """Free address variables (strings only; runtime addresses excluded)."""
    def nm(x):
        return {x} if isinstance(x, str) else set()

    def val(v):
        match v:
            case str():
                return {v}
            case UnitV():
                return set()
            case PairV(a, rest):
                return nm(a) | val(rest)
            case LabelV(_, rest) | IndexV(_, rest) | PropV(_, rest):
                return val(rest)
        return set()

    def under(pat, body):
        addrs, _ = _pat_binders(pat)
        return free_addrs(body) - addrs

    def cont(k):
        match k:
            case UnitK(body):
                return free_addrs(body)
            case PairK(a, pat, body):
                return under(pat, body) - {a}
            case LabelK(brs):
                out = set()
                for br in brs:
                    out |= under(br.pat, br.body)
                return out
            case IndexK(_, pat, body) | PropK(_, pat, body):
                return under(pat, body)
        raise TypeError(k)

    match p:
        case Copy(y, x):
            return nm(y) | nm(x)
        case Cut(x, a, b, _):
            return (free_addrs(a) | free_addrs(b)) - {x}
        case Write(x, v) | Read(x, v):
            return nm(x) | val(v)
        case CaseRead(x, k) | CaseWrite(x, k):
            return nm(x) | cont(k)
        case Call(y, _, _, args):
            out = nm(y)
            for a in args:
                out |= nm(a)
            return out
        case Impossible():
            return set()
    raise TypeError(p)


def all_names(p) -> set[str]:
    """Every address and index name occurring anywhere in ``p``, bound or free."""
    out: set[str] = set()

    def nm(x):
        if isinstance(x, str):
            out.add(x)

    def val(v):
        match v:
            case str():
                out.add(v)
            case PairV(a, rest):
                nm(a)
                val(rest)
            case LabelV(_, rest) | PropV(_, rest):
                val(rest)
            case IndexV(e, rest):
                out.update(fv_expr(e))
                val(rest)

    def cont(k):
        match k:
            case UnitK(body):
                go(body)
            case PairK(a, pat, body):
                nm(a)
                val(pat)
                go(body)
            case LabelK(brs):
                for br in brs:
                    val(br.pat)
                    go(br.body)
            case IndexK(i, pat, body):
                out.add(i)
                val(pat)
                go(body)
            case PropK(_, pat, body):
                val(pat)
                go(body)

    def go(q):
        match q:
            case Copy(y, x):
                nm(y)
                nm(x)
            case Cut(x, a, b, _):
                out.add(x)
                go(a)
                go(b)
            case Write(x, v) | Read(x, v):
                nm(x)
                val(v)
            case CaseRead(x, k) | CaseWrite(x, k):
                nm(x)
                cont(k)
            case Call(y, _, idx, args):
                nm(y)
                for a in args:
                    nm(a)
                for e in idx:
                    out.update(fv_expr(e))

    go(p)
    return out


__all__ = [
    "fresh_name", "fv_expr", "fv_prop", "fv_type", "subst_expr", "subst_prop",
    "subst_type", "fv_idx_process", "subst_idx_process", "subst_idx_value",
    "subst_addr_process", "free_addrs", "all_names",
]
