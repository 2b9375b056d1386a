"""Shared-memory execution by multiset rewriting.

A configuration holds running processes ``proc(a, P)``, keyed by the
address they will eventually fill, and persistent write-once cells
``cell(a, W)``.  A step picks one enabled redex:

    copy                cell(a, W), proc(b, b <- a)          -> cell(b, W)
    cut                 proc(c, x <- P; Q)                   -> proc(a, P[a]), proc(c, Q[a])
    pass                cell(a, K), proc(c, read a V)        -> proc(c, V |> K)
    read-value          cell(a, V), proc(c, case read a K)   -> proc(c, V |> K)
    call                proc(a, a <- call f [e] (b))         -> proc(a, P_f([[e]], b, a))
    write-value         proc(a, write a V)                   -> cell(a, V)
    write-continuation  proc(a, case write a K)              -> cell(a, K)

Cells are never removed or overwritten; a second write to an address
raises WriteOnceViolation.
"""

from __future__ import annotations

import enum
import random
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .arith import ArithWarning, eval_constraint, eval_expr
from .syntax.ast import (
    NEGATIVE, TOP, Addr, Assert, Call, CaseRead, CaseWrite, Copy, Cut, Exists,
    Impossible, IndexK, IndexV, LabelK, LabelV, Lit, One, PairK, PairV, Plus,
    PropK, PropV, Read, Signature, TypeRef, UnitK, UnitV, Write,
)
from .syntax.desugar import desugar_signature
from .syntax.pretty import show_name, show_process, show_type, show_value
from .syntax.subst import (
    fv_type, subst_addr_process, subst_idx_process, subst_prop, subst_type,
)
from .typecheck import head

DEFAULT_FUEL = 10 ** 6

RULES = ("copy", "cut", "pass", "read-value", "call", "write-value", "write-continuation")


class RuntimeFault(Exception):
    pass


class WriteOnceViolation(RuntimeFault):
    pass


class ShapeMismatch(RuntimeFault):
    pass


class ImpossibleReached(RuntimeFault):
    pass


class ConstraintFault(RuntimeFault):
    pass


class DanglingAddress(RuntimeFault):
    pass


class RunError(Exception):
    """The program cannot be started (bad entry point or arguments)."""


# --------------------------------------------------------------------------
# configurations


_VALUES = (UnitV, PairV, LabelV, IndexV, PropV)


def is_value(w) -> bool:
    return isinstance(w, _VALUES)


@dataclass(frozen=True)
class Redex:
    rule: str
    proc: Addr  # key of the process that fires
    addrs: tuple  # every participating address

    def to_json(self, step: int) -> dict:
        return {"step": step, "rule": self.rule, "addrs": [str(a) for a in self.addrs]}


@dataclass
class Configuration:
    procs: dict = field(default_factory=dict)
    cells: dict = field(default_factory=dict)
    counter: int = 0
    steps: int = 0

    def fresh(self) -> Addr:
        a = Addr(self.counter)
        self.counter += 1
        return a

    @property
    def final(self) -> bool:
        """Only cells remain."""
        return not self.procs

    def write(self, a: Addr, w):
        if a in self.cells:
            raise WriteOnceViolation(f"{a} written twice")
        self.cells[a] = w

    def spawn(self, a: Addr, p):
        if a in self.procs or a in self.cells:
            raise WriteOnceViolation(f"{a} already has an object")
        self.procs[a] = p

    def copy(self) -> Configuration:
        return Configuration(dict(self.procs), dict(self.cells), self.counter, self.steps)

    def __str__(self) -> str:
        lines = []
        for a, w in sorted(self.cells.items()):
            body = show_value(w) if is_value(w) else "<continuation>"
            lines.append(f"cell {a} {body}")
        for a, p in self.procs.items():
            lines.append(f"proc {a} ({' '.join(show_process(p).split())})")
        return "\n".join(lines)


# --------------------------------------------------------------------------
# evaluation of closed runtime values


def close_value(v):
    """Evaluate index and constraint components of a value to literals."""
    match v:
        case IndexV(e, rest):
            return IndexV(Lit(eval_expr(e)), rest, v.loc)
        case PropV(phi, rest):
            if not eval_constraint(phi):
                raise ConstraintFault(f"constraint value evaluates to false: {show_value(v)}")
            return PropV(TOP, rest, v.loc)
    return v


def apply_continuation(v, k):
    """``V |> K``: pass a closed value to a continuation."""
    match v, k:
        case UnitV(), UnitK(body):
            return body
        case PairV(a, b), PairK(x, y, body):
            return subst_addr_process(body, {x: a, y: b})
        case LabelV(l, a), LabelK():
            br = k.get(l)
            if br is None:
                raise ShapeMismatch(f"label {l} has no branch in {list(k.labels)}")
            return subst_addr_process(br.body, {br.pat: a})
        case IndexV(Lit(n), b), IndexK(i, x, body):
            return subst_idx_process(subst_addr_process(body, {x: b}), {i: Lit(n)})
        case PropV(phi, a), PropK(_, x, body):
            if phi != TOP:
                raise ShapeMismatch(f"constraint component {phi} is not true")
            return subst_addr_process(body, {x: a})
    raise ShapeMismatch(f"value {show_value(v)} does not match continuation "
                        f"{type(k).__name__}")


def instantiate(sig: Signature, a: Addr, call: Call):
    """Body of the callee with indices evaluated and addresses substituted."""
    d = sig.procs.get(call.name)
    if d is None:
        raise RuntimeFault(f"unknown definition {call.name}")
    if len(call.indices) != len(d.params) or len(call.args) != len(d.args):
        raise ShapeMismatch(f"arity mismatch calling {call.name}")
    ns = {i: Lit(eval_expr(e)) for i, e in zip(d.params, call.indices)}
    body = subst_idx_process(d.body, ns)
    ren = {x: b for (x, _), b in zip(d.args, call.args)}
    ren[d.dest] = a
    return subst_addr_process(body, ren)


# --------------------------------------------------------------------------
# redexes


def enabled(config: Configuration) -> list[Redex]:
    """All redexes, in process insertion order."""
    out = []
    cells = config.cells
    for c, p in config.procs.items():
        match p:
            case Copy(_, a) if a in cells:
                out.append(Redex("copy", c, (a, c)))
            case Cut():
                out.append(Redex("cut", c, (c,)))
            case Read(a, _) if a in cells:
                out.append(Redex("pass", c, (a, c)))
            case CaseRead(a, _) if a in cells:
                out.append(Redex("read-value", c, (a, c)))
            case Call():
                out.append(Redex("call", c, (c,)))
            case Write():
                out.append(Redex("write-value", c, (c,)))
            case CaseWrite():
                out.append(Redex("write-continuation", c, (c,)))
    return out


def fire(sig: Signature, config: Configuration, r: Redex) -> Redex:
    """Apply ``r`` in place; returns the redex with allocated addresses added."""
    c = r.proc
    p = config.procs[c]
    match p:
        case Copy(y, a):
            _same(y, c, p)
            del config.procs[c]
            config.write(c, config.cells[a])
        case Cut(x, first, second, _):
            a = config.fresh()
            config.procs[c] = subst_addr_process(second, {x: a})
            config.spawn(a, subst_addr_process(first, {x: a}))
            r = Redex(r.rule, c, r.addrs + (a,))
        case Read(a, v):
            k = config.cells[a]
            if is_value(k):
                raise ShapeMismatch(f"{a} holds a value, but a continuation was expected")
            config.procs[c] = apply_continuation(close_value(v), k)
        case CaseRead(a, k):
            v = config.cells[a]
            if not is_value(v):
                raise ShapeMismatch(f"{a} holds a continuation, but a value was expected")
            config.procs[c] = apply_continuation(v, k)
        case Call():
            _same(p.dest, c, p)
            config.procs[c] = instantiate(sig, c, p)
        case Write(x, v):
            _same(x, c, p)
            w = close_value(v)
            del config.procs[c]
            config.write(c, w)
        case CaseWrite(x, k):
            _same(x, c, p)
            del config.procs[c]
            config.write(c, k)
        case _:
            raise RuntimeFault(f"no rule applies to {p!r}")
    config.steps += 1
    return r


def _same(x, c, p):
    if x != c:
        raise ShapeMismatch(f"process at {c} writes to {show_name(x)}: "
                            f"{' '.join(show_process(p).split())}")


def step(sig: Signature, config: Configuration, pick: Callable = None) -> Redex:
    """Apply one redex chosen by ``pick`` (default: the first enabled one)."""
    _check_impossible(config)
    rs = enabled(config)
    if not rs:
        raise RuntimeFault("no enabled redex")
    r = pick(rs) if pick is not None else rs[0]
    return fire(sig, config, r)


def _check_impossible(config: Configuration):
    for a, p in config.procs.items():
        if isinstance(p, Impossible):
            raise ImpossibleReached(f"process at {a} reached 'impossible'")


# --------------------------------------------------------------------------
# argument builders


def _nat_shape(sig, t):
    """(zero label, succ label, j, phi, body) when t unfolds to the layout
    +{z: 1, s: exists j. ?{phi}. body}."""
    t = head(sig, t)
    if not isinstance(t, Plus) or len(t.branches) != 2:
        return None
    zero = succ = None
    for l, a in t.branches:
        h = head(sig, a)
        if isinstance(h, One):
            zero = l
        elif isinstance(h, Exists) and isinstance(h.body, Assert):
            succ = (l, h.var, h.body.prop, h.body.body)
    if zero is None or succ is None:
        return None
    return (zero, *succ)


def builder(sig: Signature, t, dest: str = "arg", depth: int = 0):
    """A closed process writing a canonical value of closed type ``t`` to ``dest``.

    Unit types and naturals in the ``zero``/``succ`` layout are supported;
    the natural built has the largest height the index allows.
    """
    if fv_type(t):
        raise RunError(f"argument type {show_type(t)} is not closed")
    h = head(sig, t)
    if isinstance(h, One):
        return Write(dest, UnitV())
    shape = _nat_shape(sig, t)
    if shape is None:
        raise RunError(f"cannot build an argument of type {show_type(t)}; "
                       f"wrap the entry point in a definition without arguments")
    zero, succ, j, phi, body = shape
    bound = _largest_witness(j, phi)
    u = f"u{depth}"
    if bound is None:
        return Cut(u, Write(u, UnitV()), Write(dest, LabelV(zero, u)))
    s1, s2, s3 = f"s{depth}_1", f"s{depth}_2", f"s{depth}_3"
    inner = builder(sig, subst_type(body, {j: Lit(bound)}), s3, depth + 1)
    return Cut(s1,
               Cut(s2,
                   Cut(s3, inner, Write(s2, PropV(subst_prop(phi, {j: Lit(bound)}), s3))),
                   Write(s1, IndexV(Lit(bound), s2))),
               Write(dest, LabelV(succ, s1)))


def _largest_witness(j, phi, limit: int = 4096):
    """End of the first run of witnesses w with phi[w/j] true, or None."""
    best = None
    for w in range(limit):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ArithWarning)
            ok = eval_constraint(subst_prop(phi, {j: Lit(w)}))
        if ok:
            best = w
        elif best is not None:
            break
    return best


# --------------------------------------------------------------------------
# running


class Status(str, enum.Enum):
    FINAL = "final"
    STUCK = "stuck"
    OUT_OF_FUEL = "out-of-fuel"


EXIT_CODES = {Status.FINAL: 0, Status.STUCK: 2, Status.OUT_OF_FUEL: 3}


@dataclass
class RunResult:
    status: Status
    config: Configuration
    root: Optional[Addr]
    trace: list
    observed: Optional[Addr] = None

    @property
    def steps(self) -> int:
        return self.config.steps

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def value(self, show_indices: bool = False) -> str:
        if self.status is not Status.FINAL:
            raise RuntimeFault(f"run ended {self.status.value}; no value to decode")
        a = self.observed if self.observed is not None else self.root
        return decode(self.config, a, show_indices=show_indices)


def make_picker(schedule: str = "random", seed: int = 0) -> Callable:
    if schedule == "leftmost":
        return lambda rs: rs[0]
    if schedule == "random":
        rng = random.Random(seed)
        return rng.choice
    raise ValueError(f"unknown schedule {schedule!r}")


def run_config(sig: Signature, config: Configuration, fuel: int = DEFAULT_FUEL,
               pick: Callable = None, trace: Optional[list] = None) -> Status:
    """Step ``config`` in place until final, stuck or out of fuel."""
    pick = pick or (lambda rs: rs[0])
    while True:
        if config.final:
            return Status.FINAL
        _check_impossible(config)
        rs = enabled(config)
        if not rs:
            return Status.STUCK
        if config.steps >= fuel:
            return Status.OUT_OF_FUEL
        r = fire(sig, config, pick(rs))
        if trace is not None:
            trace.append(r.to_json(config.steps))


def start(sig: Signature, entry: str, args: Sequence[int] = ()) -> tuple[Configuration, Addr]:
    """Initial configuration: builders for the arguments plus the entry call."""
    d = sig.procs.get(entry)
    if d is None:
        raise RunError(f"unknown entry definition {entry}")
    if len(args) != len(d.params):
        raise RunError(f"{entry} expects {len(d.params)} index argument(s), got {len(args)}")
    if any((not isinstance(n, int)) or n < 0 for n in args):
        raise RunError("entry arguments must be natural numbers")
    s = {i: Lit(n) for i, n in zip(d.params, args)}
    config = Configuration()
    addrs = []
    for x, t in d.args:
        a = config.fresh()
        p = builder(sig, subst_type(t, s), x)
        config.spawn(a, subst_addr_process(p, {x: a}))
        addrs.append(a)
    root = config.fresh()
    config.spawn(root, Call(root, entry, tuple(Lit(n) for n in args), tuple(addrs)))
    return config, root


def run(sig: Signature, entry: str, args: Sequence[int] = (), fuel: int = DEFAULT_FUEL,
        seed: int = 0, schedule: str = "random", probe: Optional[str] = None,
        record: bool = True) -> RunResult:
    """Run ``entry`` on literal index arguments.

    With ``probe``, a final configuration whose root holds a continuation is
    sent one label (``read root probe b``) and the run continues; the
    observed address ``b`` then holds the answer.
    """
    sig = desugar_signature(sig)
    config, root = start(sig, entry, args)
    pick = make_picker(schedule, seed)
    trace = [] if record else None
    status = run_config(sig, config, fuel, pick, trace)
    observed = None
    if status is Status.FINAL and probe is not None:
        if is_value(config.cells[root]):
            raise RunError(f"--probe needs a continuation at the root; it holds "
                           f"{show_value(config.cells[root])}")
        observed = config.fresh()
        config.spawn(observed, Read(root, LabelV(probe, observed)))
        status = run_config(sig, config, fuel, pick, trace)
    return RunResult(status, config, root, trace or [], observed)


# --------------------------------------------------------------------------
# decoding


def decode(config: Configuration, a: Addr, t=None, show_indices: bool = False,
           sig: Optional[Signature] = None) -> str:
    """Render the value tree rooted at ``a``; continuations print as <closure>.

    When a type ``t`` (and ``sig``, if ``t`` mentions definitions) is given,
    a negative root type is reported as a closure without inspecting cells.
    """
    if t is not None:
        h = head(sig or Signature({}, {}), t) if isinstance(t, TypeRef) else t
        if isinstance(h, NEGATIVE):
            return "<closure>"
    seen = set()

    def go(a) -> str:
        if a not in config.cells:
            raise DanglingAddress(f"no cell at {a}")
        if a in seen:
            return "<cycle>"
        seen.add(a)
        w = config.cells[a]
        match w:
            case UnitV():
                return "()"
            case PairV(x, y):
                return f"<{go(x)}, {go(y)}>"
            case LabelV(l, x):
                inner = go(x)
                return l if inner == "()" else f"{l}({inner})"
            case IndexV(Lit(n), x):
                inner = go(x)
                return f"[{n}] {inner}" if show_indices else inner
            case PropV(_, x):
                return go(x)
        return "<closure>"

    return go(a)


def exec_directive(sig: Signature):
    """(entry, literal arguments) of the program's exec line."""
    if sig.exec is None:
        return None
    return sig.exec.name, tuple(eval_expr(e) for e in sig.exec.args)


__all__ = [
    "Configuration", "ConstraintFault", "DEFAULT_FUEL", "DanglingAddress", "EXIT_CODES",
    "ImpossibleReached", "Redex", "RunError", "RunResult", "RuntimeFault", "ShapeMismatch",
    "Status", "WriteOnceViolation", "apply_continuation", "builder", "close_value",
    "decode", "enabled", "exec_directive", "fire", "instantiate", "make_picker", "run",
    "run_config", "start", "step",
]
