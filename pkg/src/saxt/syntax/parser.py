"""Recursive-descent parser for ``.sax`` source files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ast import (
    Arrow, Assert, BinOp, Branch, Call, CaseRead, CaseWrite, Conn, Copy, Cut,
    Exec, Exists, Forall, Guard, Impossible, IndexK, IndexV, LabelK, LabelV,
    Lit, Loc, Not, One, PairK, PairV, Plus, ProcDef, PropK, PropV, Quant,
    Read, Rel, Signature, Tensor, Truth, TypeDef, TypeRef, UnitK, UnitV, Var,
    With, Write,
)


class ParseError(Exception):
    def __init__(self, msg: str, loc: Optional[Loc] = None):
        self.msg = msg
        self.loc = loc
        super().__init__(f"{loc}: {msg}" if loc else msg)


KEYWORDS = {
    "type", "proc", "exec", "call", "case", "read", "write", "impossible",
    "exists", "forall", "measure", "not", "true", "false",
}

# unicode spellings accepted on input; the printer always emits ASCII
_UNICODE = {
    "∧": "/\\", "∨": "\\/", "¬": "~", "→": "->", "←": "<-", "⇒": "=>",
    "≤": "<=", "≥": ">=", "⊤": "true", "⊥": "false", "⊕": "+", "⊗": "*",
    "×": "*", "−": "-", "∀": "forall", "∃": "exists", "⟨": "<", "⟩": ">",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym><-|->|=>|<=|>=|/\\|\\/|\|-|[<>=()\[\]{},;:.+\-*&?!|~])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # 'int' | 'ident' | 'kw' | 'sym' | 'eof'
    text: str
    loc: Loc


def tokenize(text: str) -> list[Token]:
    for u, a in _UNICODE.items():
        if u in text:
            text = text.replace(u, f" {a} " if a.isalpha() else a)
    toks: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", Loc(line, col))
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            if kind not in ("ws", "comment"):
                toks.append(Token(kind, s, Loc(line, col)))
            col += len(s)
        pos = m.end()
    toks.append(Token("eof", "", Loc(line, col)))
    return toks


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}",
                             self.tok.loc)
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise ParseError(f"expected identifier, found {self.tok.text or 'end of input'!r}",
                             self.tok.loc)
        t = self.tok
        self.i += 1
        return t.text

    def sep_list(self, item, close: str) -> list:
        out = []
        if self.at(close):
            return out
        out.append(item())
        while self.accept(","):
            out.append(item())
        return out

    # -- programs ----------------------------------------------------------

    def program(self) -> Signature:
        types: dict[str, TypeDef] = {}
        procs: dict[str, ProcDef] = {}
        exe = None
        while self.tok.kind != "eof":
            loc = self.tok.loc
            if self.at("type"):
                d = self.typedef()
                if d.name in types:
                    raise ParseError(f"duplicate type definition {d.name}", loc)
                types[d.name] = d
            elif self.at("proc"):
                d = self.procdef()
                if d.name in procs:
                    raise ParseError(f"duplicate program definition {d.name}", loc)
                procs[d.name] = d
            elif self.at("exec"):
                if exe is not None:
                    raise ParseError("at most one exec directive is allowed", loc)
                exe = self.execdecl()
            else:
                raise ParseError(f"expected a declaration, found {self.tok.text!r}", loc)
        return Signature(types, procs, exe)

    def typedef(self) -> TypeDef:
        loc = self.expect("type").loc
        name = self.ident()
        params: list[str] = []
        if self.accept("["):
            params = self.sep_list(self.ident, "]")
            self.expect("]")
        self._no_dups(params, "index parameter", loc)
        self.expect("=")
        return TypeDef(name, tuple(params), self.type_(), loc)

    def procdef(self) -> ProcDef:
        loc = self.expect("proc").loc
        name = self.ident()
        params: list[str] = []
        cons: list = []
        if self.accept("["):
            params = self.sep_list(self.ident, "]") if not self.at("|") else []
            if self.accept("|"):
                cons = self.sep_list(self.constraint, "]")
            self.expect("]")
        self._no_dups(params, "index parameter", loc)
        self.expect("(")
        args = self.sep_list(self.param, ")")
        self.expect(")")
        self.expect("->")
        self.expect("(")
        dest = self.ident()
        self.expect(":")
        result = self.type_()
        self.expect(")")
        self._no_dups([a for a, _ in args] + [dest], "address parameter", loc)
        measure = None
        if self.accept("measure"):
            self.expect("[")
            measure = tuple(self.sep_list(self.expr, "]"))
            self.expect("]")
        self.expect("=")
        body = self.process()
        return ProcDef(name, tuple(params), tuple(cons), tuple(args), dest, result,
                       body, measure, loc)

    def param(self):
        x = self.ident()
        self.expect(":")
        return (x, self.type_())

    def execdecl(self) -> Exec:
        loc = self.expect("exec").loc
        name = self.ident()
        self.expect("(")
        args = self.sep_list(self.expr, ")")
        self.expect(")")
        return Exec(name, tuple(args), loc)

    @staticmethod
    def _no_dups(names, what, loc):
        seen = set()
        for n in names:
            if n in seen:
                raise ParseError(f"duplicate {what} {n}", loc)
            seen.add(n)

    # -- arithmetic ----------------------------------------------------------

    def expr(self):
        e = self.term()
        while self.tok.kind == "sym" and self.tok.text in ("+", "-"):
            loc = self.tok.loc
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term(), loc)
        return e

    def term(self):
        e = self.atom()
        while self.at("*"):
            loc = self.expect("*").loc
            e = BinOp("*", e, self.atom(), loc)
        return e

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Lit(int(t.text), t.loc)
        if t.kind == "ident":
            self.i += 1
            return Var(t.text, t.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"expected arithmetic expression, found {t.text!r}", t.loc)

    # -- constraints -------------------------------------------------------

    def constraint(self):
        left = self.disjunction()
        if self.at("->"):
            loc = self.expect("->").loc
            return Conn("implies", left, self.constraint(), loc)
        return left

    def disjunction(self):
        p = self.conjunction()
        while self.at("\\/"):
            loc = self.expect("\\/").loc
            p = Conn("or", p, self.conjunction(), loc)
        return p

    def conjunction(self):
        p = self.negation()
        while self.at("/\\"):
            loc = self.expect("/\\").loc
            p = Conn("and", p, self.negation(), loc)
        return p

    def negation(self):
        loc = self.tok.loc
        if self.accept("~") or self.accept("not"):
            return Not(self.negation(), loc)
        if self.at("forall") or self.at("exists"):
            kind = self.tok.text
            self.i += 1
            v = self.ident()
            self.expect(".")
            return Quant(kind, v, self.constraint(), loc)
        if self.accept("true"):
            return Truth(True, loc)
        if self.accept("false"):
            return Truth(False, loc)
        if self.at("("):
            # parenthesised constraint or parenthesised arithmetic operand
            save = self.i
            self.i += 1
            try:
                p = self.constraint()
                self.expect(")")
                if not (self.tok.kind == "sym" and self.tok.text in ("<", "<=", "=", ">=", ">",
                                                                     "+", "-", "*")):
                    return p
            except ParseError:
                pass
            self.i = save
        left = self.expr()
        if not (self.tok.kind == "sym" and self.tok.text in ("<", "<=", "=", ">=", ">")):
            raise ParseError(f"expected a relation, found {self.tok.text!r}", self.tok.loc)
        op = self.tok.text
        self.i += 1
        return Rel(op, left, self.expr(), loc)

    def braced_constraint(self):
        self.expect("{")
        p = self.constraint()
        self.expect("}")
        return p

    # -- types ------------------------------------------------------------

    def type_(self):
        left = self.tensor_type()
        if self.at("->"):
            loc = self.expect("->").loc
            return Arrow(left, self.type_(), loc)
        return left

    def tensor_type(self):
        left = self.prefix_type()
        if self.at("*"):
            loc = self.expect("*").loc
            return Tensor(left, self.tensor_type(), loc)
        return left

    def prefix_type(self):
        t = self.tok
        loc = t.loc
        if t.kind == "int":
            if t.text != "1":
                raise ParseError(f"unknown type {t.text!r}", loc)
            self.i += 1
            return One(loc)
        if self.accept("("):
            a = self.type_()
            self.expect(")")
            return a
        if self.at("+") or self.at("&"):
            ctor = Plus if self.tok.text == "+" else With
            self.i += 1
            return ctor(self.type_branches(), loc)
        if self.at("exists") or self.at("forall"):
            ctor = Exists if self.tok.text == "exists" else Forall
            self.i += 1
            v = self.ident()
            self.expect(".")
            return ctor(v, self.type_(), loc)
        if self.at("?") or self.at("!"):
            ctor = Assert if self.tok.text == "?" else Guard
            self.i += 1
            p = self.braced_constraint()
            self.expect(".")
            return ctor(p, self.type_(), loc)
        if t.kind == "ident":
            self.i += 1
            args: list = []
            if self.accept("["):
                args = self.sep_list(self.expr, "]")
                self.expect("]")
            return TypeRef(t.text, tuple(args), loc)
        raise ParseError(f"expected a type, found {t.text!r}", loc)

    def type_branches(self):
        loc = self.expect("{").loc

        def branch():
            lab = self.ident()
            self.expect(":")
            return (lab, self.type_())

        brs = self.sep_list(branch, "}")
        self.expect("}")
        if not brs:
            raise ParseError("empty label set", loc)
        self._no_dups([l for l, _ in brs], "label", loc)
        return tuple(brs)

    # -- processes --------------------------------------------------------

    def process(self):
        t = self.tok
        loc = t.loc
        if t.kind == "ident" and (self.peek().text in ("<-", ":")):
            x = self.ident()
            annot = None
            if self.accept(":"):
                annot = self.type_()
            self.expect("<-")
            if self.at("call"):
                first = self.call_rest(x)
            elif self.tok.kind == "ident" and self.peek().text not in ("<-", ":"):
                src_loc = self.tok.loc
                first = Copy(x, self.ident(), src_loc)
            else:
                first = self.simple_process()
            if self.accept(";"):
                return Cut(x, first, self.process(), annot, loc)
            if annot is not None or not isinstance(first, (Call, Copy)):
                raise ParseError(f"expected ';' after the definition of {x}", self.tok.loc)
            return first
        return self.simple_process()

    def simple_process(self):
        t = self.tok
        loc = t.loc
        if self.accept("("):
            p = self.process()
            self.expect(")")
            return p
        if self.accept("write"):
            x = self.ident()
            return Write(x, self.value(), loc)
        if self.accept("read"):
            x = self.ident()
            return Read(x, self.value(), loc)
        if self.accept("case"):
            if self.accept("read"):
                ctor = CaseRead
            elif self.accept("write"):
                ctor = CaseWrite
            else:
                raise ParseError("expected 'read' or 'write' after 'case'", self.tok.loc)
            x = self.ident()
            return ctor(x, self.cont(), loc)
        if self.accept("impossible"):
            return Impossible(loc)
        raise ParseError(f"expected a process, found {t.text or 'end of input'!r}", loc)

    def call_rest(self, dest: str) -> Call:
        loc = self.expect("call").loc
        name = self.ident()
        idx: list = []
        if self.accept("["):
            idx = self.sep_list(self.expr, "]")
            self.expect("]")
        self.expect("(")
        args = self.sep_list(self.ident, ")")
        self.expect(")")
        return Call(dest, name, tuple(idx), tuple(args), loc)

    # -- values and patterns ---------------------------------------------

    def value(self, nested: bool = False):
        """A value sequence; bare names are only allowed nested."""
        t = self.tok
        loc = t.loc
        if self.at("(") and self.peek().text == ")":
            self.i += 2
            return UnitV(loc)
        if self.accept("<"):
            if self.accept("["):
                e = self.expr()
                self.expect("]")
                self.expect(",")
                v = IndexV(e, self.value(True), loc)
            elif self.at("{"):
                p = self.braced_constraint()
                self.expect(",")
                v = PropV(p, self.value(True), loc)
            else:
                a = self.ident()
                self.expect(",")
                v = PairV(a, self.value(True), loc)
            self.expect(">")
            return v
        if t.kind == "ident":
            self.i += 1
            if self._starts_value():
                return LabelV(t.text, self.value(True), loc)
            if nested:
                return t.text
            raise ParseError(f"a bare address {t.text!r} is not a value", loc)
        raise ParseError(f"expected a value, found {t.text or 'end of input'!r}", loc)

    def _starts_value(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return True
        if self.at("<"):
            return True
        return self.at("(") and self.peek().text == ")"

    def pattern(self, nested: bool = False):
        t = self.tok
        loc = t.loc
        if self.at("(") and self.peek().text == ")":
            self.i += 2
            return UnitV(loc)
        if self.accept("<"):
            if self.accept("["):
                i = self.ident()
                self.expect("]")
                self.expect(",")
                v = IndexV(Var(i, loc), self.pattern(True), loc)
            elif self.at("{"):
                p = self.braced_constraint()
                self.expect(",")
                v = PropV(p, self.pattern(True), loc)
            else:
                a = self.ident()
                self.expect(",")
                v = PairV(a, self.pattern(True), loc)
            self.expect(">")
            return v
        if t.kind == "ident" and nested:
            self.i += 1
            if self._starts_value():
                return LabelV(t.text, self.pattern(True), loc)
            return t.text
        raise ParseError(f"expected a pattern, found {t.text or 'end of input'!r}", loc)

    def cont(self):
        loc = self.tok.loc
        if self.accept("{"):
            brs = self.sep_list(self.branch, "}")
            self.expect("}")
            if not brs:
                raise ParseError("empty label match", loc)
            self._no_dups([b.label for b in brs], "branch label", loc)
            return LabelK(tuple(brs), loc)
        grouped = self.at("(") and self.peek().text != ")"
        if grouped:
            self.expect("(")
        k = self.simple_cont()
        if grouped:
            self.expect(")")
        return k

    def branch(self) -> Branch:
        loc = self.tok.loc
        lab = self.ident()
        pat = self.pattern(True)
        self.expect("=>")
        return Branch(lab, pat, self.process(), loc)

    def simple_cont(self):
        loc = self.tok.loc
        pat = self.pattern()
        self.expect("=>")
        body = self.process()
        return pattern_to_cont(pat, body, loc)


def pattern_to_cont(pat, body, loc=None):
    """Build the continuation matching one level of ``pat``."""
    match pat:
        case UnitV():
            return UnitK(body, loc)
        case PairV(a, rest):
            return PairK(a, rest, body, loc)
        case IndexV(Var(i), rest):
            return IndexK(i, rest, body, loc)
        case PropV(p, rest):
            return PropK(p, rest, body, loc)
        case LabelV(l, rest):
            return LabelK((Branch(l, rest, body, loc),), loc)
    raise ParseError(f"pattern {pat!r} cannot head a continuation", loc)


def parse_program(text: str) -> Signature:
    """Parse a whole ``.sax`` file."""
    p = Parser(text)
    return p.program()


def _parse_with(text: str, rule: str):
    p = Parser(text)
    out = getattr(p, rule)()
    if p.tok.kind != "eof":
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.loc)
    return out


def parse_type(text: str):
    return _parse_with(text, "type_")


def parse_process(text: str):
    return _parse_with(text, "process")


def parse_expr(text: str):
    return _parse_with(text, "expr")


def parse_constraint(text: str):
    return _parse_with(text, "constraint")


def parse_query(text: str):
    """Parse ``V ; C |- phi`` into (variables, constraints, goal).

    ``.`` or an empty field stands for an empty variable or constraint list.
    """
    text = text.replace("⊢", "|-").replace("·", ".")
    if "|-" not in text:
        raise ParseError("expected '|-' in entailment query")
    ctx, goal = text.split("|-", 1)
    if ";" in ctx:
        vs, cs = ctx.split(";", 1)
    else:
        vs, cs = ctx, ""
    names = [v.strip() for v in vs.split(",") if v.strip() not in ("", ".")]
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", n):
            raise ParseError(f"bad variable name {n!r}")
    cons = []
    if cs.strip() not in ("", "."):
        p = Parser(cs)
        cons = p.sep_list(p.constraint, "")
        if p.tok.kind != "eof":
            raise ParseError(f"trailing input {p.tok.text!r}", p.tok.loc)
    return tuple(names), tuple(cons), parse_constraint(goal)
