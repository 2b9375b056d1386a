"""Abstract syntax for SAX programs with arithmetic refinements.

Every node is an immutable dataclass.  Source locations ride along in a
``loc`` field that is excluded from equality and hashing, so two trees
compare equal whenever they have the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _loc():
    return field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# Arithmetic expressions and constraints


@dataclass(frozen=True)
class Var:
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Lit:
    value: int
    loc: Optional[Loc] = _loc()

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"negative literal {self.value}")


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: ArithExpr
    right: ArithExpr
    loc: Optional[Loc] = _loc()


ArithExpr = Union[Var, Lit, BinOp]

REL_OPS = ("<", "<=", "=", ">=", ">")
CONNECTIVES = ("and", "or", "implies")


@dataclass(frozen=True)
class Rel:
    op: str  # one of REL_OPS
    left: ArithExpr
    right: ArithExpr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Conn:
    op: str  # one of CONNECTIVES
    left: Constraint
    right: Constraint
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Not:
    inner: Constraint
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Quant:
    kind: str  # 'forall' | 'exists'
    var: str
    body: Constraint
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Truth:
    value: bool
    loc: Optional[Loc] = _loc()


Constraint = Union[Rel, Conn, Not, Quant, Truth]

TOP = Truth(True)
BOT = Truth(False)


def conj(props) -> Constraint:
    props = list(props)
    if not props:
        return TOP
    out = props[-1]
    for p in reversed(props[:-1]):
        out = Conn("and", p, out)
    return out


def disj(props) -> Constraint:
    props = list(props)
    if not props:
        return BOT
    out = props[-1]
    for p in reversed(props[:-1]):
        out = Conn("or", p, out)
    return out


# --------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class One:
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Tensor:
    left: Type
    right: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Arrow:
    left: Type
    right: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Plus:
    """Internal choice; ``branches`` keeps declaration order."""

    branches: tuple[tuple[str, Type], ...]
    loc: Optional[Loc] = _loc()

    def get(self, label: str) -> Optional[Type]:
        for lab, typ in self.branches:
            if lab == label:
                return typ
        return None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.branches)


@dataclass(frozen=True)
class With:
    """External choice."""

    branches: tuple[tuple[str, Type], ...]
    loc: Optional[Loc] = _loc()

    get = Plus.get
    labels = Plus.labels


@dataclass(frozen=True)
class Exists:
    var: str
    body: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Forall:
    var: str
    body: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Assert:
    """``?{phi}. A``: the writer certifies phi."""

    prop: Constraint
    body: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Guard:
    """``!{phi}. A``: the reader must certify phi."""

    prop: Constraint
    body: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class TypeRef:
    name: str
    args: tuple[ArithExpr, ...] = ()
    loc: Optional[Loc] = _loc()


Type = Union[One, Tensor, Arrow, Plus, With, Exists, Forall, Assert, Guard, TypeRef]

POSITIVE = (One, Tensor, Plus, Exists, Assert)
NEGATIVE = (Arrow, With, Forall, Guard)


# --------------------------------------------------------------------------
# Addresses, values, continuations, processes


@dataclass(frozen=True, order=True)
class Addr:
    """A runtime cell address.  Never produced by the parser."""

    n: int

    def __str__(self) -> str:
        return f"@{self.n}"


Name = Union[str, Addr]


@dataclass(frozen=True)
class UnitV:
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PairV:
    first: Name
    second: Union[Name, "Value"]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class LabelV:
    label: str
    arg: Union[Name, "Value"]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class IndexV:
    expr: ArithExpr
    arg: Union[Name, "Value"]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PropV:
    prop: Constraint
    arg: Union[Name, "Value"]
    loc: Optional[Loc] = _loc()


Value = Union[UnitV, PairV, LabelV, IndexV, PropV]

# Patterns reuse the value constructors; names in binding position are
# binders, and an IndexV pattern always carries a bare Var.
Pattern = Union[str, Value]


@dataclass(frozen=True)
class UnitK:
    body: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PairK:
    first: str
    second: Pattern
    body: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Branch:
    label: str
    pat: Pattern
    body: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class LabelK:
    branches: tuple[Branch, ...]
    loc: Optional[Loc] = _loc()

    def get(self, label: str) -> Optional[Branch]:
        for br in self.branches:
            if br.label == label:
                return br
        return None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(br.label for br in self.branches)


@dataclass(frozen=True)
class IndexK:
    var: str
    second: Pattern
    body: Process
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PropK:
    prop: Constraint
    second: Pattern
    body: Process
    loc: Optional[Loc] = _loc()


Cont = Union[UnitK, PairK, LabelK, IndexK, PropK]


@dataclass(frozen=True)
class Copy:
    """``y <- x``: copy the contents of cell x into y."""

    dest: Name
    src: Name
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Cut:
    """``x <- P; Q`` with an optional annotation on x."""

    var: str
    first: Process
    second: Process
    annot: Optional[Type] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Write:
    addr: Name
    value: Value
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Read:
    """``read x V``: pass V to the continuation stored at x."""

    addr: Name
    value: Value
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CaseRead:
    addr: Name
    cont: Cont
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CaseWrite:
    addr: Name
    cont: Cont
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Call:
    dest: Name
    name: str
    indices: tuple[ArithExpr, ...]
    args: tuple[Name, ...]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Impossible:
    loc: Optional[Loc] = _loc()


Process = Union[Copy, Cut, Write, Read, CaseRead, CaseWrite, Call, Impossible]


# --------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class TypeDef:
    name: str
    params: tuple[str, ...]
    body: Type
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ProcDef:
    name: str
    params: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    args: tuple[tuple[str, Type], ...]
    dest: str
    result: Type
    body: Process
    measure: Optional[tuple[ArithExpr, ...]] = None
    loc: Optional[Loc] = _loc()

    @property
    def bound(self) -> tuple[ArithExpr, ...]:
        """The size vector recursive calls must decrease against."""
        if self.measure is not None:
            return self.measure
        return tuple(Var(p) for p in self.params)


@dataclass(frozen=True)
class Exec:
    name: str
    args: tuple[ArithExpr, ...]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Signature:
    types: dict[str, TypeDef] = field(default_factory=dict)
    procs: dict[str, ProcDef] = field(default_factory=dict)
    exec: Optional[Exec] = None

    def number(self, name: str) -> int:
        """Declaration index of a program definition."""
        return list(self.procs).index(name)

    def replace_procs(self, procs: dict[str, ProcDef]) -> Signature:
        return Signature(dict(self.types), procs, self.exec)

    def __len__(self) -> int:
        return len(self.types) + len(self.procs)
