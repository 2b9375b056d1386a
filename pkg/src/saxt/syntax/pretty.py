"""Canonical concrete syntax.

``parse_program(pretty_program(s))`` reproduces ``s`` and the printer is
the formatter behind ``saxt fmt``.
"""

from __future__ import annotations

from .ast import (
    Addr, Arrow, Assert, BinOp, Call, CaseRead, CaseWrite, Conn, Copy, Cut,
    Exists, Forall, Guard, Impossible, IndexK, IndexV, LabelK, LabelV, Lit,
    Not, One, PairK, PairV, Plus, PropK, PropV, Quant, Read, Rel, Signature,
    Tensor, Truth, TypeRef, UnitK, UnitV, Var, With, Write,
)

_PREC = {"+": 1, "-": 1, "*": 2}


def show_name(x) -> str:
    return str(x) if isinstance(x, Addr) else x


def show_expr(e, prec: int = 0) -> str:
    match e:
        case Var(name):
            return name
        case Lit(v):
            return str(v)
        case BinOp(op, a, b):
            p = _PREC[op]
            # left-associative: the right operand needs parens at equal precedence
            s = f"{show_expr(a, p)} {op} {show_expr(b, p + 1)}"
            return f"({s})" if p < prec else s
    return repr(e)


def show_prop(p, prec: int = 0) -> str:
    match p:
        case Rel(op, a, b):
            return f"{show_expr(a)} {op} {show_expr(b)}"
        case Truth(v):
            return "true" if v else "false"
        case Not(a):
            return f"~{show_prop(a, 4)}"
        case Conn("and", a, b):
            s = f"{show_prop(a, 3)} /\\ {show_prop(b, 4)}"
            return f"({s})" if prec > 3 else s
        case Conn("or", a, b):
            s = f"{show_prop(a, 2)} \\/ {show_prop(b, 3)}"
            return f"({s})" if prec > 2 else s
        case Conn("implies", a, b):
            s = f"{show_prop(a, 2)} -> {show_prop(b, 1)}"
            return f"({s})" if prec > 1 else s
        case Quant(kind, v, body):
            s = f"{kind} {v}. {show_prop(body)}"
            return f"({s})" if prec > 0 else s
    return repr(p)


_PREFIX = (Exists, Forall, Assert, Guard)


def show_type(t, ctx: str = "top") -> str:
    """``ctx`` is 'top', 'arrow-left', or 'tensor-left'/'tensor-right'."""
    match t:
        case One():
            return "1"
        case TypeRef(name, args):
            if not args:
                return name
            return f"{name}[{', '.join(show_expr(e) for e in args)}]"
        case Plus(brs) | With(brs):
            sym = "+" if isinstance(t, Plus) else "&"
            inner = ", ".join(f"{l}: {show_type(a)}" for l, a in brs)
            return f"{sym}{{{inner}}}"
        case Arrow(a, b):
            s = f"{show_type(a, 'arrow-left')} -> {show_type(b)}"
            return s if ctx == "top" else f"({s})"
        case Tensor(a, b):
            s = f"{show_type(a, 'tensor')} * {show_type(b, 'tensor-right')}"
            return s if ctx in ("top", "arrow-left", "tensor-right") else f"({s})"
        case Exists(v, body) | Forall(v, body):
            kw = "exists" if isinstance(t, Exists) else "forall"
            s = f"{kw} {v}. {show_type(body)}"
            return s if ctx == "top" else f"({s})"
        case Assert(p, body) | Guard(p, body):
            sym = "?" if isinstance(t, Assert) else "!"
            s = f"{sym}{{{show_prop(p)}}}. {show_type(body)}"
            return s if ctx == "top" else f"({s})"
    return repr(t)


def show_value(v) -> str:
    match v:
        case str() | Addr():
            return show_name(v)
        case UnitV():
            return "()"
        case PairV(a, rest):
            return f"<{show_name(a)}, {show_value(rest)}>"
        case LabelV(l, rest):
            return f"{l} {show_value(rest)}"
        case IndexV(e, rest):
            return f"<[{show_expr(e)}], {show_value(rest)}>"
        case PropV(p, rest):
            return f"<{{{show_prop(p)}}}, {show_value(rest)}>"
    return repr(v)


def _pad(level: int) -> str:
    return "  " * level


def show_cont(k, level: int) -> str:
    match k:
        case LabelK(brs):
            lines = [
                f"{_pad(level + 1)}{br.label} {show_value(br.pat)} =>\n"
                f"{show_process(br.body, level + 2)}"
                for br in brs
            ]
            return "{\n" + ",\n".join(lines) + f"\n{_pad(level)}}}"
        case UnitK(body):
            pat = "()"
        case PairK(a, rest, body):
            pat = f"<{show_name(a)}, {show_value(rest)}>"
        case IndexK(i, rest, body):
            pat = f"<[{i}], {show_value(rest)}>"
        case PropK(p, rest, body):
            pat = f"<{{{show_prop(p)}}}, {show_value(rest)}>"
        case _:
            return repr(k)
    return f"({pat} =>\n{show_process(body, level + 1)})"


def _show_call(p: Call) -> str:
    idx = f" [{', '.join(show_expr(e) for e in p.indices)}]" if p.indices else ""
    args = ", ".join(show_name(a) for a in p.args)
    return f"call {p.name}{idx} ({args})"


def show_process(p, level: int = 0) -> str:
    pad = _pad(level)
    match p:
        case Copy(y, x):
            return f"{pad}{show_name(y)} <- {show_name(x)}"
        case Call(y, _, _, _):
            return f"{pad}{show_name(y)} <- {_show_call(p)}"
        case Write(x, v):
            return f"{pad}write {show_name(x)} {show_value(v)}"
        case Read(x, v):
            return f"{pad}read {show_name(x)} {show_value(v)}"
        case CaseRead(x, k):
            return f"{pad}case read {show_name(x)} {show_cont(k, level)}"
        case CaseWrite(x, k):
            return f"{pad}case write {show_name(x)} {show_cont(k, level)}"
        case Impossible():
            return f"{pad}impossible"
        case Cut(x, first, second, annot):
            head = f"{x} : {show_type(annot)}" if annot is not None else x
            match first:
                case Call(d, _, _, _) if d == x:
                    rhs = _show_call(first)
                case Copy(d, src) if d == x:
                    rhs = show_name(src)
                case Cut() | Call() | Copy():
                    rhs = "(" + show_process(first, level + 1).lstrip() + ")"
                case _:
                    rhs = show_process(first, level).lstrip()
            return f"{pad}{head} <- {rhs};\n{show_process(second, level)}"
    return pad + repr(p)


def show_typedef(d) -> str:
    params = f"[{', '.join(d.params)}]" if d.params else ""
    return f"type {d.name}{params} = {show_type(d.body)}"


def show_procdef(d) -> str:
    inner = ", ".join(d.params)
    if d.constraints:
        inner += " | " + ", ".join(show_prop(c) for c in d.constraints)
        inner = inner.lstrip()
    params = f" [{inner}]" if inner else ""
    args = ", ".join(f"{x} : {show_type(a)}" for x, a in d.args)
    measure = ""
    if d.measure is not None:
        measure = f" measure [{', '.join(show_expr(e) for e in d.measure)}]"
    head = f"proc {d.name}{params} ({args}) -> ({d.dest} : {show_type(d.result)}){measure} ="
    return head + "\n" + show_process(d.body, 1)


def pretty_program(sig: Signature) -> str:
    blocks = [show_typedef(d) for d in sig.types.values()]
    blocks += [show_procdef(d) for d in sig.procs.values()]
    if sig.exec is not None:
        args = ", ".join(show_expr(e) for e in sig.exec.args)
        blocks.append(f"exec {sig.exec.name}({args})")
    return "\n\n".join(blocks) + ("\n" if blocks else "")
