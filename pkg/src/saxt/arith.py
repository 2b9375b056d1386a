"""Presburger arithmetic over the naturals.

Entailment ``V; C |- phi`` is decided by Cooper's quantifier elimination:
the query is valid iff ``exists V. V >= 0 /\\ C /\\ ~phi`` is false.  All
formulas are first put into a quantifier-free negation normal form over
three kinds of atom, ``0 < t``, ``d | t`` and ``~(d | t)``, where ``t`` is
a linear term with integer coefficients.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .syntax.ast import (
    BOT, BinOp, Conn, Constraint, Lit, Not, Quant, Rel, Truth, Var, conj, disj,
)
from .syntax.subst import fv_expr, fv_prop


class NonlinearError(ValueError):
    """Raised for products of two non-constant terms."""


class ArithWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# linear terms


@dataclass(frozen=True)
class Lin:
    coeffs: tuple[tuple[str, int], ...]  # sorted, no zero entries
    const: int = 0

    @staticmethod
    def make(coeffs: dict[str, int], const: int = 0) -> Lin:
        return Lin(tuple(sorted((v, c) for v, c in coeffs.items() if c)), const)

    def coef(self, x: str) -> int:
        for v, c in self.coeffs:
            if v == x:
                return c
        return 0

    @property
    def vars(self) -> set[str]:
        return {v for v, _ in self.coeffs}

    def __add__(self, other: Lin) -> Lin:
        d = dict(self.coeffs)
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return Lin.make(d, self.const + other.const)

    def scale(self, k: int) -> Lin:
        return Lin.make({v: c * k for v, c in self.coeffs}, self.const * k)

    def __neg__(self) -> Lin:
        return self.scale(-1)

    def __sub__(self, other: Lin) -> Lin:
        return self + (-other)

    def shift(self, k: int) -> Lin:
        return Lin(self.coeffs, self.const + k)

    def subst(self, x: str, t: Lin) -> Lin:
        c = self.coef(x)
        if not c:
            return self
        rest = Lin(tuple((v, k) for v, k in self.coeffs if v != x), self.const)
        return rest + t.scale(c)

    def with_coef(self, x: str, c: int) -> Lin:
        d = dict(self.coeffs)
        d[x] = c
        return Lin.make(d, self.const)


def linearize(e) -> Lin:
    match e:
        case Var(name):
            return Lin(((name, 1),), 0)
        case Lit(v):
            return Lin((), v)
        case BinOp("+", a, b):
            return linearize(a) + linearize(b)
        case BinOp("-", a, b):
            return linearize(a) - linearize(b)
        case BinOp("*", a, b):
            la, lb = linearize(a), linearize(b)
            if not la.coeffs:
                return lb.scale(la.const)
            if not lb.coeffs:
                return la.scale(lb.const)
            raise NonlinearError(f"nonlinear product in {e}")
    raise TypeError(e)


# --------------------------------------------------------------------------
# quantifier-free NNF formulas


@dataclass(frozen=True)
class _Const:
    value: bool


TRUE = _Const(True)
FALSE = _Const(False)


@dataclass(frozen=True)
class Lt:
    """0 < term"""

    term: Lin


@dataclass(frozen=True)
class Dvd:
    """d | term (or its negation)"""

    d: int
    term: Lin
    neg: bool = False


@dataclass(frozen=True)
class And:
    parts: frozenset


@dataclass(frozen=True)
class Or:
    parts: frozenset


def mk_lt(t: Lin):
    if not t.coeffs:
        return TRUE if t.const > 0 else FALSE
    g = 0
    for _, c in t.coeffs:
        g = math.gcd(g, c)
    if g > 1:
        # g*s + c > 0  <=>  s + ceil(c/g) > 0
        t = Lin(tuple((v, c // g) for v, c in t.coeffs), -((-t.const) // g))
    return Lt(t)


def mk_dvd(d: int, t: Lin, neg: bool = False):
    if d == 1:
        return FALSE if neg else TRUE
    t = Lin.make({v: c % d for v, c in t.coeffs}, t.const % d)
    if not t.coeffs:
        holds = t.const == 0
        return _Const(holds != neg)
    g = d
    for _, c in t.coeffs:
        g = math.gcd(g, c)
    g = math.gcd(g, t.const)
    if g > 1:
        d = d // g
        t = Lin(tuple((v, c // g) for v, c in t.coeffs), t.const // g)
        if d == 1:
            return FALSE if neg else TRUE
    return Dvd(d, t, neg)


def mk_and(parts: Iterable):
    out = set()
    for p in parts:
        if p is FALSE or p == FALSE:
            return FALSE
        if p == TRUE:
            continue
        if isinstance(p, And):
            out |= p.parts
        else:
            out.add(p)
    out = _tighten(out, conj=True)
    if out is FALSE:
        return FALSE
    if not out:
        return TRUE
    if len(out) == 1:
        return next(iter(out))
    return And(frozenset(out))


def mk_or(parts: Iterable):
    out = set()
    for p in parts:
        if p == TRUE:
            return TRUE
        if p == FALSE:
            continue
        if isinstance(p, Or):
            out |= p.parts
        else:
            out.add(p)
    out = _tighten(out, conj=False)
    if out is TRUE:
        return TRUE
    if not out:
        return FALSE
    if len(out) == 1:
        return next(iter(out))
    return Or(frozenset(out))


def _tighten(parts: set, conj: bool):
    """Keep one bound per linear form: the tightest in a conjunction, the
    loosest in a disjunction.  Opposite bounds that cannot both hold (or
    cannot both fail) collapse the whole connective."""
    best: dict = {}
    rest = []
    for p in parts:
        if isinstance(p, Lt):
            k = p.term.coeffs
            c = p.term.const
            if k in best:
                c = min(best[k], c) if conj else max(best[k], c)
            best[k] = c
        else:
            rest.append(p)
    for k, c in best.items():
        neg = tuple((v, -a) for v, a in k)
        if neg in best and k < neg:
            # 0 < s + c and 0 < -s + c2 hold together iff some s has -c < s < c2
            total = c + best[neg]
            if conj and total < 2:
                return FALSE
            if not conj and total >= 1:
                return TRUE
    return set(rest) | {Lt(Lin(k, c)) for k, c in best.items()}


def negate(f):
    match f:
        case _Const(v):
            return _Const(not v)
        case Lt(t):
            return mk_lt(-t + Lin((), 1))
        case Dvd(d, t, neg):
            return Dvd(d, t, not neg)
        case And(ps):
            return mk_or(negate(p) for p in ps)
        case Or(ps):
            return mk_and(negate(p) for p in ps)
    raise TypeError(f)


def _map_atoms(f, fn):
    match f:
        case And(ps):
            return mk_and(_map_atoms(p, fn) for p in ps)
        case Or(ps):
            return mk_or(_map_atoms(p, fn) for p in ps)
        case _Const():
            return f
    return fn(f)


def _atoms(f, acc=None):
    acc = [] if acc is None else acc
    match f:
        case And(ps) | Or(ps):
            for p in ps:
                _atoms(p, acc)
        case Lt() | Dvd():
            acc.append(f)
    return acc


def _fvars(f) -> set[str]:
    out: set[str] = set()
    for a in _atoms(f):
        out |= a.term.vars
    return out


def _subst(f, x: str, t: Lin):
    def fn(a):
        if not a.term.coef(x):
            return a
        if isinstance(a, Lt):
            return mk_lt(a.term.subst(x, t))
        return mk_dvd(a.d, a.term.subst(x, t), a.neg)
    return _map_atoms(f, fn)


def _rel(op: str, a: Lin, b: Lin):
    match op:
        case "<":
            return mk_lt(b - a)
        case "<=":
            return mk_lt((b - a).shift(1))
        case ">":
            return mk_lt(a - b)
        case ">=":
            return mk_lt((a - b).shift(1))
        case "=":
            return mk_and([mk_lt((b - a).shift(1)), mk_lt((a - b).shift(1))])
    raise ValueError(op)


def to_qf(phi):
    """Quantifier-free NNF equivalent of ``phi``; bound variables range over N."""
    match phi:
        case Truth(v):
            return _Const(v)
        case Rel(op, a, b):
            return _rel(op, linearize(a), linearize(b))
        case Not(a):
            return negate(to_qf(a))
        case Conn("and", a, b):
            return mk_and([to_qf(a), to_qf(b)])
        case Conn("or", a, b):
            return mk_or([to_qf(a), to_qf(b)])
        case Conn("implies", a, b):
            return mk_or([negate(to_qf(a)), to_qf(b)])
        case Quant("exists", v, body):
            return eliminate(v, mk_and([_nonneg(v), to_qf(body)]))
        case Quant("forall", v, body):
            return negate(eliminate(v, mk_and([_nonneg(v), negate(to_qf(body))])))
    raise TypeError(phi)


def _nonneg(v: str):
    return Lt(Lin(((v, 1),), 1))


FINITE_RANGE = 32
SPLIT_LIMIT = 64


@functools.lru_cache(maxsize=1 << 16)
def eliminate(x: str, f):
    """A quantifier-free formula equivalent to ``exists x in Z. f``."""
    match f:
        case Or(ps):
            return mk_or(eliminate(x, p) for p in ps)
        case And(ps):
            inner = [p for p in ps if x in _fvars(p)]
            outer = [p for p in ps if x not in _fvars(p)]
            if outer:
                return mk_and(outer + [eliminate(x, mk_and(inner))])
            ors = [p for p in inner if isinstance(p, Or)]
            if ors and math.prod(len(p.parts) for p in ors) <= SPLIT_LIMIT:
                # exists distributes over the smallest disjunction; past the
                # limit the full case split costs more than it saves
                split = min(ors, key=lambda p: len(p.parts))
                rest = [p for p in inner if p is not split]
                return mk_or(eliminate(x, mk_and(rest + [d])) for d in split.parts)
    if x not in _fvars(f):
        return f
    return _cooper(x, f)


def _const_range(x: str, f) -> Optional[tuple[int, int]]:
    """Constant bounds lo <= x <= hi from the top-level conjuncts of ``f``."""
    lo = hi = None
    for a in f.parts if isinstance(f, And) else (f,):
        if isinstance(a, Lt) and a.term.vars == {x}:
            c, r = a.term.coef(x), a.term.const
            if c > 0:  # x > -r/c
                b = (-r) // c + 1
                lo = b if lo is None else max(lo, b)
            else:  # x < r/|c|
                b = -((-r) // -c) - 1
                hi = b if hi is None else min(hi, b)
    if lo is None or hi is None:
        return None
    return lo, hi


def _cooper(x: str, f):
    box = _const_range(x, f)
    if box is not None and box[1] - box[0] <= FINITE_RANGE:
        return mk_or(_subst(f, x, Lin((), k)) for k in range(box[0], box[1] + 1))
    coefs = [abs(a.term.coef(x)) for a in _atoms(f) if a.term.coef(x)]
    delta = functools.reduce(math.lcm, coefs, 1)

    def unit(a):
        c = a.term.coef(x)
        if not c:
            return a
        m = delta // abs(c)
        t = a.term.scale(m).with_coef(x, 1 if c > 0 else -1)
        if isinstance(a, Lt):
            return mk_lt(t)
        return mk_dvd(a.d * m, t, a.neg)

    f = _map_atoms(f, unit)
    t = _pinned(x, f)
    if t is not None:
        # a conjunct forces x = t: substitute instead of enumerating
        return mk_and([_subst(f, x, t), mk_dvd(delta, t)])
    if delta > 1:
        f = mk_and([f, mk_dvd(delta, Lin(((x, 1),), 0))])

    lower, upper, divisors = [], [], [1]
    for a in _atoms(f):
        c = a.term.coef(x)
        if not c:
            continue
        rest = a.term.with_coef(x, 0)
        if isinstance(a, Lt):
            # 0 < x + r  <=>  x > -r ;  0 < -x + r  <=>  x < r
            (lower if c > 0 else upper).append(-rest if c > 0 else rest)
        else:
            divisors.append(a.d)
    big_d = functools.reduce(math.lcm, divisors, 1)

    use_lower = len(set(lower)) <= len(set(upper))

    def infinity(a):
        if isinstance(a, Lt) and a.term.coef(x):
            c = a.term.coef(x)
            return _Const((c > 0) != use_lower)
        return a

    f_inf = _map_atoms(f, infinity)
    out = []
    for j in range(1, big_d + 1):
        out.append(_subst(f_inf, x, Lin((), j if use_lower else -j)))
        if out[-1] == TRUE:
            return TRUE
    for b in sorted(set(lower if use_lower else upper), key=repr):
        for j in range(1, big_d + 1):
            out.append(_subst(f, x, b.shift(j if use_lower else -j)))
            if out[-1] == TRUE:
                return TRUE
    return mk_or(out)


def _pinned(x: str, f) -> Optional[Lin]:
    """The term t when the top-level conjuncts of ``f`` include both
    0 < x + u and 0 < -x + w with u + w = 2, which force x = 1 - u."""
    parts = f.parts if isinstance(f, And) else (f,)
    ups, downs = {}, {}
    bounds = [a for a in parts if isinstance(a, Lt)]
    for a in sorted(bounds, key=lambda a: (a.term.coeffs, a.term.const)):
        c = a.term.coef(x)
        rest = a.term.with_coef(x, 0)
        if c == 1:
            ups[rest] = a
        elif c == -1:
            downs[rest] = a
    for u in ups:
        if (-u).shift(2) in downs:
            return (-u).shift(1)
    return None


def _closed_value(f) -> bool:
    if isinstance(f, _Const):
        return f.value
    raise AssertionError(f"formula not closed after elimination: {f}")


# --------------------------------------------------------------------------
# public interface


@dataclass(frozen=True)
class ArithContext:
    vars: tuple[str, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    def add_var(self, v: str) -> ArithContext:
        return ArithContext(self.vars + (v,), self.constraints)

    def add_constraint(self, c: Constraint) -> ArithContext:
        return ArithContext(self.vars, self.constraints + (c,))

    def __str__(self) -> str:
        from .syntax.pretty import show_prop
        vs = ", ".join(self.vars) or "."
        cs = ", ".join(show_prop(c) for c in self.constraints) or "."
        return f"{vs}; {cs}"


EMPTY = ArithContext()


def _check_scope(ctx: ArithContext, fvs: set[str]):
    extra = fvs - set(ctx.vars)
    if extra:
        raise ValueError(f"free variables {sorted(extra)} not in context {ctx}")


def entails(ctx: ArithContext, phi: Constraint) -> bool:
    """Whether every valuation of ``ctx.vars`` into N satisfying
    ``ctx.constraints`` also satisfies ``phi``."""
    fvs = fv_prop(phi)
    for c in ctx.constraints:
        fvs |= fv_prop(c)
    _check_scope(ctx, fvs)
    return _entails(tuple(sorted(set(ctx.vars))), frozenset(ctx.constraints), phi)


@functools.lru_cache(maxsize=1 << 16)
def _entails(vars_: tuple[str, ...], cons: frozenset, phi) -> bool:
    parts = [_nonneg(v) for v in vars_]
    parts += [to_qf(c) for c in cons]
    parts.append(negate(to_qf(phi)))
    f = mk_and(parts)
    # pick again each round: variables pinned by an equality first, then
    # the one whose expansion looks cheapest
    left = list(vars_)
    while left and not isinstance(f, _Const):
        atoms = _atoms(f)
        v = min(left, key=lambda v: (_pinned(v, f) is None, _cost(v, atoms), v))
        left.remove(v)
        f = eliminate(v, f)
    return not _closed_value(f)


def _cost(x: str, atoms) -> int:
    lower = upper = 0
    delta = 1
    for a in atoms:
        c = a.term.coef(x)
        if c:
            delta = math.lcm(delta, abs(c))
            if isinstance(a, Lt):
                lower, upper = (lower + 1, upper) if c > 0 else (lower, upper + 1)
    return (min(lower, upper) + 1) * delta


def satisfiable(ctx: ArithContext) -> bool:
    return not entails(ctx, BOT)


def is_linear(e) -> bool:
    try:
        linearize(e)
    except NonlinearError:
        return False
    return True


def _subtractions(e):
    match e:
        case BinOp(op, a, b):
            if op == "-":
                yield a, b
            yield from _subtractions(a)
            yield from _subtractions(b)


def well_defined(ctx: ArithContext, e) -> bool:
    """``V; C |- e``: e is linear and every subtraction is entailment-guarded."""
    if fv_expr(e) - set(ctx.vars):
        return False
    if not is_linear(e):
        return False
    return all(entails(ctx, Rel(">=", a, b)) for a, b in _subtractions(e))


def eval_expr(e) -> int:
    """Value of a closed expression; unguarded subtraction truncates at 0."""
    match e:
        case Lit(v):
            return v
        case Var(name):
            raise ValueError(f"free variable {name} in closed expression")
        case BinOp(op, a, b):
            x, y = eval_expr(a), eval_expr(b)
            if op == "+":
                return x + y
            if op == "*":
                return x * y
            if x < y:
                warnings.warn(f"subtraction {x} - {y} truncated to 0", ArithWarning, stacklevel=2)
                return 0
            return x - y
    raise TypeError(e)


def eval_constraint(phi) -> bool:
    """Truth value of a closed, quantifier-free constraint."""
    match phi:
        case Truth(v):
            return v
        case Rel(op, a, b):
            x, y = eval_expr(a), eval_expr(b)
            return {"<": x < y, "<=": x <= y, "=": x == y, ">=": x >= y, ">": x > y}[op]
        case Not(a):
            return not eval_constraint(a)
        case Conn("and", a, b):
            return eval_constraint(a) and eval_constraint(b)
        case Conn("or", a, b):
            return eval_constraint(a) or eval_constraint(b)
        case Conn("implies", a, b):
            return (not eval_constraint(a)) or eval_constraint(b)
        case Quant():
            raise ValueError("eval_constraint expects a quantifier-free constraint")
    raise TypeError(phi)


# --------------------------------------------------------------------------
# size vectors


class Order(enum.Enum):
    LESS = "strictly-less"
    EQUAL = "equal"
    OTHER = "other"


def pad(a: Sequence, b: Sequence) -> tuple[tuple, tuple]:
    n = max(len(a), len(b))
    zero = Lit(0)
    return (tuple(a) + (zero,) * (n - len(a)), tuple(b) + (zero,) * (n - len(b)))


def lex_lt(smaller: Sequence, larger: Sequence) -> Constraint:
    """Constraint stating ``smaller < larger`` lexicographically, after padding."""
    a, b = pad(smaller, larger)
    cases = []
    for k in range(len(a)):
        prefix = [Rel("=", a[m], b[m]) for m in range(k)]
        cases.append(conj(prefix + [Rel("<", a[k], b[k])]))
    return disj(cases)


def vec_eq(a: Sequence, b: Sequence) -> Constraint:
    a, b = pad(a, b)
    return conj(Rel("=", x, y) for x, y in zip(a, b))


def pad_compare(ctx: ArithContext, smaller: Sequence, larger: Sequence) -> Order:
    """Compare ``smaller`` against ``larger`` under ``ctx``."""
    if entails(ctx, lex_lt(smaller, larger)):
        return Order.LESS
    if entails(ctx, vec_eq(smaller, larger)):
        return Order.EQUAL
    return Order.OTHER


def query_entails(text: str) -> bool:
    """Decide a textual query ``"i, j; j < i |- j < i"``."""
    from .syntax.parser import parse_query
    vs, cs, goal = parse_query(text)
    return entails(ArithContext(vs, cs), goal)
