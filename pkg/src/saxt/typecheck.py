"""Process typing ``V; C; G |- P :: (x : A)``.

Checking is syntax-directed on core (desugared) processes.  The context
``G`` is persistent: a rule that reads ``x`` keeps ``x`` in its premises.
Recursive calls are checked against the callee's declared typing and are
recorded as circular edges of the derivation instead of being unfolded.

Cut types come from an annotation ``x : A <- P; Q`` when present.  Without
one the checker first tries to synthesize the type from ``P`` (calls,
copies, negative reads and a few writes); failing that it checks ``Q``
first with a placeholder for ``x`` that is filled in by the first type
equation ``x`` takes part in.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Optional

import networkx as nx

from .arith import ArithContext, NonlinearError, entails, linearize, well_defined
from .syntax.ast import (
    BOT, Arrow, Assert, Call, CaseRead, CaseWrite, Copy, Cut, Exists, Forall,
    Guard, Impossible, IndexK, IndexV, LabelK, LabelV, One, PairK, PairV, Plus,
    ProcDef, PropK, PropV, Read, Rel, Signature, Tensor, TypeRef, UnitK, UnitV,
    Var, With, Write,
)
from .syntax.pretty import show_name, show_prop, show_type
from .syntax.subst import (
    fresh_name, fv_expr, fv_prop, fv_type, subst_expr, subst_idx_process,
    subst_prop, subst_type,
)

UNFOLD_LIMIT = 64


# --------------------------------------------------------------------------
# errors


@dataclass
class CheckError(Exception):
    definition: Optional[str]
    rule: str
    message: str
    expected: Optional[str] = None
    actual: Optional[str] = None
    failed_entailment: Optional[str] = None
    loc: object = None
    category: str = "type"

    def __post_init__(self):
        super().__init__(self.message)

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        head = f"{where}{self.definition or '<top>'}: [{self.rule}] {self.message}"
        extra = []
        if self.expected is not None:
            extra.append(f"expected {self.expected}")
        if self.actual is not None:
            extra.append(f"actual {self.actual}")
        if self.failed_entailment is not None:
            extra.append(f"failed entailment {self.failed_entailment}")
        return head + ("".join(f"\n    {e}" for e in extra))

    def to_json(self) -> dict:
        out = {"definition": self.definition, "category": self.category,
               "rule": self.rule, "message": self.message,
               "expected": self.expected, "actual": self.actual}
        if self.failed_entailment is not None:
            out["failedEntailment"] = self.failed_entailment
        if self.loc is not None:
            out["line"], out["col"] = self.loc.line, self.loc.col
        return out


class TypeCheckFailure(Exception):
    def __init__(self, errors: list[CheckError]):
        self.errors = errors
        super().__init__("\n".join(str(e) for e in errors))


def query_text(ctx: ArithContext, phi) -> str:
    return f"{ctx} |- {show_prop(phi)}"


# --------------------------------------------------------------------------
# type definitions


class Hole:
    """Placeholder for the type of an unannotated cut variable."""

    def __init__(self, n: int, name: str, scope: frozenset):
        self.n = n
        self.name = name
        self.scope = scope
        self.solution = None

    def __repr__(self) -> str:
        return f"?{self.name}"


def resolve(t):
    while isinstance(t, Hole) and t.solution is not None:
        t = t.solution
    return t


def zonk(t):
    """Replace solved holes inside ``t``."""
    t = resolve(t)
    match t:
        case Tensor(a, b):
            return Tensor(zonk(a), zonk(b), t.loc)
        case Arrow(a, b):
            return Arrow(zonk(a), zonk(b), t.loc)
        case Plus(brs):
            return Plus(tuple((l, zonk(a)) for l, a in brs), t.loc)
        case With(brs):
            return With(tuple((l, zonk(a)) for l, a in brs), t.loc)
        case Exists(v, b):
            return Exists(v, zonk(b), t.loc)
        case Forall(v, b):
            return Forall(v, zonk(b), t.loc)
        case Assert(p, b):
            return Assert(p, zonk(b), t.loc)
        case Guard(p, b):
            return Guard(p, zonk(b), t.loc)
    return t


@dataclass(frozen=True)
class TypeDefEnv:
    types: Mapping

    @staticmethod
    def of(x) -> TypeDefEnv:
        if isinstance(x, TypeDefEnv):
            return x
        if isinstance(x, Signature):
            return TypeDefEnv(x.types)
        return TypeDefEnv(dict(x))


def unfold(env, t):
    """One step of definition unfolding at the head of a type."""
    env = TypeDefEnv.of(env)
    if not isinstance(t, TypeRef):
        raise TypeError(f"unfold expects a definition call, got {t!r}")
    d = env.types.get(t.name)
    if d is None:
        raise CheckError(None, "wf", f"unknown type {t.name}", loc=t.loc)
    if len(d.params) != len(t.args):
        raise CheckError(None, "wf", f"type {t.name} expects {len(d.params)} "
                         f"index argument(s), got {len(t.args)}", loc=t.loc)
    return subst_type(d.body, dict(zip(d.params, t.args)))


def head(env, t):
    """Unfold definition calls until a structural connective is exposed."""
    t = resolve(t)
    for _ in range(UNFOLD_LIMIT):
        if not isinstance(t, TypeRef):
            return t
        t = resolve(unfold(env, t))
    raise CheckError(None, "wf", f"type does not reach a connective: {show_type(t)}")


def noncontractive_cycles(sig) -> list[list[str]]:
    """Cycles of type definitions whose bodies are bare definition calls."""
    env = TypeDefEnv.of(sig)
    g = nx.DiGraph()
    for name, d in env.types.items():
        g.add_node(name)
        if isinstance(d.body, TypeRef):
            g.add_edge(name, d.body.name)
    return [sorted(c) for c in nx.simple_cycles(g)]


def contractive(sig) -> bool:
    return not noncontractive_cycles(sig)


def check_type_wf(env, ctx: ArithContext, t, definition=None):
    """Declared names, index arity, free variables in scope, linear indices."""
    env = TypeDefEnv.of(env)

    def go(t, vs: frozenset):
        match t:
            case One():
                return
            case Tensor(a, b) | Arrow(a, b):
                go(a, vs)
                go(b, vs)
            case Plus(brs) | With(brs):
                labels = [l for l, _ in brs]
                if not labels or len(set(labels)) != len(labels):
                    raise CheckError(definition, "wf", "label sets must be non-empty and "
                                     "duplicate-free", actual=show_type(t), loc=t.loc)
                for _, a in brs:
                    go(a, vs)
            case Exists(v, b) | Forall(v, b):
                go(b, vs | {v})
            case Assert(p, b) | Guard(p, b):
                extra = fv_prop(p) - vs
                if extra:
                    raise CheckError(definition, "wf", f"unbound index variable "
                                     f"{sorted(extra)[0]} in {show_type(t)}", loc=t.loc)
                go(b, vs)
            case TypeRef(name, args):
                d = env.types.get(name)
                if d is None:
                    raise CheckError(definition, "wf", f"unknown type {name}", loc=t.loc)
                if len(d.params) != len(args):
                    raise CheckError(definition, "wf", f"type {name} expects "
                                     f"{len(d.params)} index argument(s), got {len(args)}",
                                     loc=t.loc)
                for e in args:
                    extra = fv_expr(e) - vs
                    if extra:
                        raise CheckError(definition, "wf", f"unbound index variable "
                                         f"{sorted(extra)[0]} in {show_type(t)}", loc=t.loc)
                    try:
                        linearize(e)
                    except NonlinearError:
                        raise CheckError(definition, "wf", f"nonlinear index {show_type(t)}",
                                         loc=t.loc) from None
            case Hole():
                return
            case _:
                raise CheckError(definition, "wf", f"not a type: {t!r}")

    go(t, frozenset(ctx.vars))


# --------------------------------------------------------------------------
# type equality


def type_equal(env, ctx: ArithContext, a, b) -> bool:
    """Coinductive equality of types up to unfolding and arithmetic."""
    return _Equality(TypeDefEnv.of(env)).eq(ctx, a, b, frozenset(), 0)


def same_prop(ctx: ArithContext, p, q) -> bool:
    return entails(ctx.add_constraint(p), q) and entails(ctx.add_constraint(q), p)


class _Equality:
    def __init__(self, env: TypeDefEnv):
        self.env = env

    def solve(self, hole: Hole, t) -> bool:
        t = resolve(t)
        if t is hole:
            return True
        if fv_type(zonk(t)) - hole.scope:
            raise CheckError(None, "cut", f"the type of {hole.name} cannot be inferred "
                             f"(it mentions index variables bound later); annotate the cut "
                             f"as '{hole.name} : A <- ...'")
        hole.solution = t
        return True

    def eq(self, ctx, a, b, seen: frozenset, depth: int) -> bool:
        a, b = resolve(a), resolve(b)
        if isinstance(a, Hole):
            return self.solve(a, b)
        if isinstance(b, Hole):
            return self.solve(b, a)
        if depth > UNFOLD_LIMIT:
            return False
        if isinstance(a, TypeRef) and isinstance(b, TypeRef) and a.name == b.name \
                and len(a.args) == len(b.args) \
                and all(entails(ctx, Rel("=", x, y)) for x, y in zip(a.args, b.args)):
            return True
        if isinstance(a, TypeRef) or isinstance(b, TypeRef):
            key = (a, b)
            if key in seen:
                return True
            seen = seen | {key}
            a2 = unfold(self.env, a) if isinstance(a, TypeRef) else a
            b2 = unfold(self.env, b) if isinstance(b, TypeRef) else b
            return self.eq(ctx, a2, b2, seen, depth + 1)
        match a, b:
            case One(), One():
                return True
            case (Tensor(a1, a2), Tensor(b1, b2)) | (Arrow(a1, a2), Arrow(b1, b2)):
                return self.eq(ctx, a1, b1, seen, depth + 1) and \
                    self.eq(ctx, a2, b2, seen, depth + 1)
            case (Plus(), Plus()) | (With(), With()):
                if set(a.labels) != set(b.labels):
                    return False
                return all(self.eq(ctx, t, b.get(l), seen, depth + 1) for l, t in a.branches)
            case (Exists(u, s), Exists(v, t)) | (Forall(u, s), Forall(v, t)):
                k = fresh_name(u, set(ctx.vars) | fv_type(s) | fv_type(t))
                return self.eq(ctx.add_var(k), subst_type(s, {u: Var(k)}),
                               subst_type(t, {v: Var(k)}), seen, depth + 1)
            case (Assert(p, s), Assert(q, t)) | (Guard(p, s), Guard(q, t)):
                return same_prop(ctx, p, q) and \
                    self.eq(ctx.add_constraint(p), s, t, seen, depth + 1)
        return False


# --------------------------------------------------------------------------
# derivations


@dataclass(frozen=True)
class Judgment:
    vars: tuple
    constraints: tuple
    gamma: tuple  # ((address, type), ...)
    dest: object
    type: object

    @property
    def arith(self) -> ArithContext:
        return ArithContext(self.vars, self.constraints)

    def __str__(self) -> str:
        g = ", ".join(f"{show_name(x)} : {show_type(a)}" for x, a in self.gamma) or "."
        return f"{self.arith}; {g} |- ({show_name(self.dest)} : {show_type(self.type)})"


@dataclass(frozen=True)
class CallSite:
    """A circular edge: the call node refers back to the callee's root."""

    callee: str
    indices: tuple
    args: tuple
    subst: tuple  # ((callee index parameter, expression), ...)
    target: Judgment  # the callee's declared judgment
    dest: object = None

    def instantiated(self) -> Judgment:
        """The callee judgment after the recorded substitution and renaming.

        Its arithmetic variables are left empty: the call-site context is
        a weakening of it, as is the call-site address context."""
        s = dict(self.subst)
        ren = dict(zip((x for x, _ in self.target.gamma), self.args))
        return Judgment(
            (), tuple(subst_prop(c, s) for c in self.target.constraints),
            tuple((ren[x], subst_type(a, s)) for x, a in self.target.gamma),
            self.dest, subst_type(self.target.type, s))


@dataclass(frozen=True)
class Derivation:
    rule: str
    judgment: Judgment
    process: object = field(repr=False)
    children: tuple = ()
    call: Optional[CallSite] = None

    def skeleton(self):
        """``(rule, [child skeletons])`` with cuts and all else kept."""
        return (self.rule, [c.skeleton() for c in self.children])

    def walk(self) -> Iterator[Derivation]:
        yield self
        for c in self.children:
            yield from c.walk()

    def calls(self) -> list[Derivation]:
        return [d for d in self.walk() if d.rule == "call"]

    def render(self, indent: int = 0) -> str:
        line = "  " * indent + f"{self.rule}: {self.judgment}"
        if self.call is not None:
            line += f"   [knot -> {self.call.callee}]"
        return "\n".join([line] + [c.render(indent + 1) for c in self.children])


def _zonk_judgment(j: Judgment) -> Judgment:
    return replace(j, gamma=tuple((x, zonk(a)) for x, a in j.gamma), type=zonk(j.type))


def _zonk_deriv(d: Derivation) -> Derivation:
    return replace(d, judgment=_zonk_judgment(d.judgment),
                   children=tuple(_zonk_deriv(c) for c in d.children))


def declared_judgment(d: ProcDef) -> Judgment:
    return Judgment(tuple(d.params), tuple(d.constraints), tuple(d.args), d.dest, d.result)


# --------------------------------------------------------------------------
# the checker


class _Checker:
    def __init__(self, sig: Signature, definition: Optional[str]):
        self.sig = sig
        self.env = TypeDefEnv.of(sig)
        self.definition = definition
        self._holes = itertools.count(1)

    # -- helpers -----------------------------------------------------------

    def fail(self, rule, message, p=None, **kw):
        raise CheckError(self.definition, rule, message, loc=getattr(p, "loc", None), **kw)

    def head(self, t, p):
        try:
            return head(self.env, t)
        except CheckError as e:
            self.fail("wf", e.message, p)

    def equal(self, ctx, a, b, rule, what, p):
        try:
            ok = _Equality(self.env).eq(ctx, a, b, frozenset(), 0)
        except CheckError as e:
            self.fail(rule, e.message, p)
        if not ok:
            self.fail(rule, f"type mismatch at {what}", p,
                      expected=show_type(zonk(b)), actual=show_type(zonk(a)))

    def entail(self, ctx, phi, rule, p):
        if not entails(ctx, phi):
            self.fail(rule, f"constraint {show_prop(phi)} does not follow", p,
                      failed_entailment=query_text(ctx, phi))

    def same(self, ctx, phi, psi, rule, p):
        if not same_prop(ctx, phi, psi):
            self.fail(rule, f"constraint {show_prop(phi)} does not match the type's "
                      f"{show_prop(psi)}", p, expected=show_prop(psi), actual=show_prop(phi))

    def defined(self, ctx, e, rule, p):
        extra = fv_expr(e) - set(ctx.vars)
        if extra:
            self.fail(rule, f"unbound index variable {sorted(extra)[0]}", p)
        if not well_defined(ctx, e):
            from .syntax.pretty import show_expr
            self.fail(rule, f"index {show_expr(e)} is not well defined "
                      f"(nonlinear or unguarded subtraction)", p)

    def lookup(self, g, x, p):
        if x not in g:
            self.fail("scope", f"unbound address {show_name(x)}", p)
        return g[x]

    def structural(self, t, x, p, rule):
        t = self.head(t, p)
        if isinstance(t, Hole):
            self.fail(rule, f"the type of {show_name(x)} cannot be inferred here; annotate "
                      f"the cut as '{show_name(x)} : A <- ...'", p)
        return t

    def fresh_var(self, ctx, v):
        return v if v not in ctx.vars else fresh_name(v, ctx.vars)

    def node(self, rule, ctx, g, z, c, p, children=(), call=None):
        return Derivation(rule, Judgment(tuple(ctx.vars), tuple(ctx.constraints),
                                         tuple(g.items()), z, c), p, tuple(children), call)

    # -- synthesis for cut types ----------------------------------------------

    def synth(self, ctx, g, p, x):
        match p:
            case Call(y, f, es, _) if y == x:
                d = self.sig.procs.get(f)
                if d is not None and len(d.params) == len(es):
                    return subst_type(d.result, dict(zip(d.params, es)))
            case Copy(y, src) if y == x and src in g:
                return g[src]
            case Write(y, UnitV()) if y == x:
                return One()
            case Write(y, PairV(a, b)) if y == x and a in g and b in g:
                return Tensor(g[a], g[b])
            case Read(src, v) if src in g:
                t = resolve(head(self.env, g[src]))
                match t, v:
                    case Arrow(_, b), PairV(_, y) if y == x:
                        return b
                    case With(), LabelV(l, y) if y == x and t.get(l) is not None:
                        return t.get(l)
                    case Forall(i, b), IndexV(e, y) if y == x:
                        return subst_type(b, {i: e})
                    case Guard(_, b), PropV(_, y) if y == x:
                        return b
        return None

    # -- rules ---------------------------------------------------------------

    def check(self, ctx: ArithContext, g: dict, p, z, c) -> Derivation:
        match p:
            case Copy(y, x):
                a = self.lookup(g, x, p)
                self.equal(ctx, a, c, "id", f"copy {show_name(y)} <- {show_name(x)}", p)
                return self.node("id", ctx, g, z, c, p)

            case Cut(x, first, second, annot):
                if annot is not None:
                    try:
                        check_type_wf(self.env, ctx, annot, self.definition)
                    except CheckError as e:
                        self.fail("cut", e.message, p)
                    a = annot
                else:
                    a = self.synth(ctx, g, first, x)
                if a is not None:
                    d1 = self.check(ctx, g, first, x, a)
                    d2 = self.check(ctx, {**g, x: a}, second, z, c)
                    return self.node("cut", ctx, g, z, c, p, [d1, d2])
                hole = Hole(next(self._holes), show_name(x), frozenset(ctx.vars))
                d2 = self.check(ctx, {**g, x: hole}, second, z, c)
                if resolve(hole) is hole or isinstance(resolve(zonk(hole)), Hole):
                    self.fail("cut", f"the type of {show_name(x)} cannot be inferred; "
                              f"annotate the cut as '{show_name(x)} : A <- ...'", p)
                a = zonk(hole)
                d1 = self.check(ctx, g, first, x, a)
                return self.node("cut", ctx, g, z, c, p, [d1, d2])

            case Write(x, v):
                t = self.structural(c, x, p, "write")
                return self.write_value(ctx, g, p, v, t, z, c)

            case Read(x, v):
                t = self.structural(self.lookup(g, x, p), x, p, "read")
                return self.read_value(ctx, g, p, x, v, t, z, c)

            case CaseRead(x, k):
                t = self.structural(self.lookup(g, x, p), x, p, "case read")
                return self.read_cont(ctx, g, p, x, k, t, z, c)

            case CaseWrite(x, k):
                t = self.structural(c, x, p, "case write")
                return self.write_cont(ctx, g, p, k, t, z, c)

            case Call(y, f, es, xs):
                return self.call(ctx, g, p, f, es, xs, z, c)

            case Impossible():
                self.entail(ctx, BOT, "impossible", p)
                return self.node("impossible", ctx, g, z, c, p)

        self.fail("internal", f"not a core process: {p!r}", p)

    def write_value(self, ctx, g, p, v, t, z, c):
        match v, t:
            case UnitV(), One():
                return self.node("1R", ctx, g, z, c, p)
            case PairV(a, b), Tensor(ta, tb):
                self.equal(ctx, self.lookup(g, a, p), ta, "⊗R", f"left component {a}", p)
                self.equal(ctx, self.lookup(g, b, p), tb, "⊗R", f"right component {b}", p)
                return self.node("⊗R", ctx, g, z, c, p)
            case LabelV(l, y), Plus():
                if t.get(l) is None:
                    self.fail("⊕R", f"unknown label {l}", p, expected=" | ".join(t.labels),
                              actual=l)
                self.equal(ctx, self.lookup(g, y, p), t.get(l), "⊕R", f"label {l}", p)
                return self.node("⊕R", ctx, g, z, c, p)
            case IndexV(e, y), Exists(i, body):
                self.defined(ctx, e, "∃R", p)
                self.equal(ctx, self.lookup(g, y, p), subst_type(body, {i: e}), "∃R",
                           f"witness continuation {y}", p)
                return self.node("∃R", ctx, g, z, c, p)
            case PropV(phi, y), Assert(psi, body):
                self.same(ctx, phi, psi, "?R", p)
                self.entail(ctx, psi, "?R", p)
                self.equal(ctx, self.lookup(g, y, p), body, "?R", f"continuation {y}", p)
                return self.node("?R", ctx, g, z, c, p)
        self.fail(_right_rule(t, "R"), "value does not match the destination type", p,
                  expected=show_type(zonk(c)), actual=_value_shape(v))

    def read_value(self, ctx, g, p, x, v, t, z, c):
        match v, t:
            case PairV(a, y), Arrow(ta, tb):
                self.equal(ctx, self.lookup(g, a, p), ta, "→L", f"argument {a}", p)
                self.equal(ctx, tb, c, "→L", f"result {y}", p)
                return self.node("→L", ctx, g, z, c, p)
            case LabelV(l, y), With():
                if t.get(l) is None:
                    self.fail("&L", f"unknown label {l}", p, expected=" | ".join(t.labels),
                              actual=l)
                self.equal(ctx, t.get(l), c, "&L", f"label {l}", p)
                return self.node("&L", ctx, g, z, c, p)
            case IndexV(e, y), Forall(i, body):
                self.defined(ctx, e, "∀L", p)
                self.equal(ctx, subst_type(body, {i: e}), c, "∀L", f"instance for {y}", p)
                return self.node("∀L", ctx, g, z, c, p)
            case PropV(phi, y), Guard(psi, body):
                self.same(ctx, phi, psi, "!L", p)
                self.entail(ctx, psi, "!L", p)
                self.equal(ctx, body, c, "!L", f"continuation {y}", p)
                return self.node("!L", ctx, g, z, c, p)
        self.fail(_right_rule(t, "L"), f"value passed to {show_name(x)} does not match "
                  f"its type", p, expected=show_type(zonk(t)), actual=_value_shape(v))

    def read_cont(self, ctx, g, p, x, k, t, z, c):
        match k, t:
            case UnitK(body), One():
                return self.node("1L", ctx, g, z, c, p, [self.check(ctx, g, body, z, c)])
            case PairK(a, b, body), Tensor(ta, tb):
                d = self.check(ctx, {**g, a: ta, b: tb}, body, z, c)
                return self.node("⊗L", ctx, g, z, c, p, [d])
            case LabelK(brs), Plus():
                self.labels_match(k, t, "⊕L", p)
                kids = [self.check(ctx, {**g, k.get(l).pat: a}, k.get(l).body, z, c)
                        for l, a in t.branches]
                return self.node("⊕L", ctx, g, z, c, p, kids)
            case IndexK(i, y, body), Exists(j, tb):
                i2 = self.fresh_var(ctx, i)
                if i2 != i:
                    body = subst_idx_process(body, {i: Var(i2)})
                a = subst_type(tb, {j: Var(i2)})
                d = self.check(ctx.add_var(i2), {**g, y: a}, body, z, c)
                return self.node("∃L", ctx, g, z, c, p, [d])
            case PropK(phi, y, body), Assert(psi, tb):
                self.same(ctx, phi, psi, "?L", p)
                d = self.check(ctx.add_constraint(psi), {**g, y: tb}, body, z, c)
                return self.node("?L", ctx, g, z, c, p, [d])
        self.fail(_right_rule(t, "L"), f"continuation does not match the type of "
                  f"{show_name(x)}", p, expected=show_type(zonk(t)), actual=_cont_shape(k))

    def write_cont(self, ctx, g, p, k, t, z, c):
        match k, t:
            case PairK(a, y, body), Arrow(ta, tb):
                d = self.check(ctx, {**g, a: ta}, body, y, tb)
                return self.node("→R", ctx, g, z, c, p, [d])
            case LabelK(brs), With():
                self.labels_match(k, t, "&R", p)
                kids = [self.check(ctx, g, k.get(l).body, k.get(l).pat, a)
                        for l, a in t.branches]
                return self.node("&R", ctx, g, z, c, p, kids)
            case IndexK(i, y, body), Forall(j, tb):
                i2 = self.fresh_var(ctx, i)
                if i2 != i:
                    body = subst_idx_process(body, {i: Var(i2)})
                d = self.check(ctx.add_var(i2), g, body, y, subst_type(tb, {j: Var(i2)}))
                return self.node("∀R", ctx, g, z, c, p, [d])
            case PropK(phi, y, body), Guard(psi, tb):
                self.same(ctx, phi, psi, "!R", p)
                d = self.check(ctx.add_constraint(psi), g, body, y, tb)
                return self.node("!R", ctx, g, z, c, p, [d])
        self.fail(_right_rule(t, "R"), "continuation does not match the destination type",
                  p, expected=show_type(zonk(c)), actual=_cont_shape(k))

    def labels_match(self, k, t, rule, p):
        have, want = set(k.labels), set(t.labels)
        if have != want:
            extra = sorted(have - want)
            missing = sorted(want - have)
            msg = []
            if extra:
                msg.append(f"unknown label(s) {', '.join(extra)}")
            if missing:
                msg.append(f"missing branch(es) {', '.join(missing)}")
            self.fail(rule, "; ".join(msg), p, expected=", ".join(t.labels),
                      actual=", ".join(k.labels))

    def call(self, ctx, g, p, f, es, xs, z, c):
        d = self.sig.procs.get(f)
        if d is None:
            self.fail("call", f"unknown definition {f}", p)
        if len(es) != len(d.params):
            self.fail("call", f"{f} expects {len(d.params)} index argument(s), got {len(es)}", p)
        if len(xs) != len(d.args):
            self.fail("call", f"{f} expects {len(d.args)} address argument(s), got {len(xs)}", p)
        for e in es:
            self.defined(ctx, e, "call", p)
        s = dict(zip(d.params, es))
        for phi in d.constraints:
            self.entail(ctx, subst_prop(phi, s), "call", p)
        for x, (param, a) in zip(xs, d.args):
            self.equal(ctx, self.lookup(g, x, p), subst_type(a, s), "call",
                       f"argument {show_name(x)} for {param} of {f}", p)
        self.equal(ctx, subst_type(d.result, s), c, "call", f"result of {f}", p)
        site = CallSite(f, tuple(es), tuple(xs), tuple(s.items()), declared_judgment(d), z)
        return self.node("call", ctx, g, z, c, p, call=site)


def _right_rule(t, side: str) -> str:
    sym = {One: "1", Tensor: "⊗", Arrow: "→", Plus: "⊕", With: "&", Exists: "∃",
           Forall: "∀", Assert: "?", Guard: "!"}.get(type(t), "?")
    return sym + side


def _value_shape(v) -> str:
    from .syntax.pretty import show_value
    return show_value(v)


def _cont_shape(k) -> str:
    return {UnitK: "() => ...", PairK: "<x, y> => ...", LabelK: "{ label x => ... }",
            IndexK: "<[i], x> => ...", PropK: "<{phi}, x> => ..."}[type(k)]


# --------------------------------------------------------------------------
# entry points


def check_process(env, ctx, p, dest, a, gamma=None, sig=None, definition=None) -> Derivation:
    """Check ``V; C; G |- p :: (dest : a)``.

    ``ctx`` is an ArithContext; ``gamma`` maps addresses to types.  ``sig``
    supplies program definitions for calls; ``env`` the type definitions.
    """
    if sig is None:
        sig = env if isinstance(env, Signature) else Signature(TypeDefEnv.of(env).types, {})
    ch = _Checker(sig, definition)
    return _zonk_deriv(ch.check(ctx, dict(gamma or {}), p, dest, a))


def check_declarations(sig: Signature) -> list[CheckError]:
    """Well-formedness of every declared type."""
    errs = []
    for d in sig.types.values():
        try:
            check_type_wf(sig, ArithContext(tuple(d.params)), d.body, d.name)
        except CheckError as e:
            errs.append(e)
    for d in sig.procs.values():
        ctx = ArithContext(tuple(d.params))
        try:
            for phi in d.constraints:
                if fv_prop(phi) - set(d.params):
                    raise CheckError(d.name, "wf", "constraint mentions undeclared index "
                                     f"variables: {show_prop(phi)}", loc=d.loc)
            for _, a in d.args:
                check_type_wf(sig, ctx, a, d.name)
            check_type_wf(sig, ctx, d.result, d.name)
            if d.measure is not None:
                for e in d.measure:
                    if fv_expr(e) - set(d.params):
                        raise CheckError(d.name, "wf", "measure mentions undeclared index "
                                         "variables", loc=d.loc)
        except CheckError as e:
            errs.append(e)
    return errs


def check_definition(sig: Signature, name: str) -> Derivation:
    d = sig.procs[name]
    ctx = ArithContext(tuple(d.params), tuple(d.constraints))
    ch = _Checker(sig, name)
    return _zonk_deriv(ch.check(ctx, dict(d.args), d.body, d.dest, d.result))


def check_definitions(sig: Signature) -> tuple[dict[str, Derivation], list[CheckError]]:
    """Check every program definition; never raises on type errors."""
    errs = check_declarations(sig)
    derivs: dict[str, Derivation] = {}
    if errs:
        return derivs, errs
    for name in sig.procs:
        try:
            derivs[name] = check_definition(sig, name)
        except CheckError as e:
            errs.append(e)
    return derivs, errs


def check_signature(sig: Signature) -> dict[str, Derivation]:
    """All derivations, or TypeCheckFailure listing every failing definition."""
    cycles = noncontractive_cycles(sig)
    if cycles:
        raise TypeCheckFailure([contractive_error(c) for c in cycles])
    derivs, errs = check_definitions(sig)
    if errs:
        raise TypeCheckFailure(errs)
    return derivs


def contractive_error(cycle: list[str]) -> CheckError:
    path = " -> ".join(cycle + cycle[:1])
    return CheckError(cycle[0], "contractive", f"type definitions are not contractive: {path}",
                      category="contractive")
