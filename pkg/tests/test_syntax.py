import pytest

from saxt import corpus
from saxt.pipeline import load
from saxt.syntax import (
    ParseError, check_scopes, desugar, desugar_signature, is_core, parse_constraint,
    parse_expr, parse_process, parse_program, parse_query, parse_type, pretty_program,
    show_process, show_type,
)
from saxt.syntax.subst import all_names
from saxt.syntax.ast import (
    Assert, BinOp, CaseRead, Cut, Exists, IndexK, LabelK, Lit, One, Plus, PropK,
    Rel, TypeRef, Var,
)

ALL = corpus.POSITIVE + corpus.MUTANTS


def test_nat_declaration():
    sig = parse_program(corpus.source("eat"))
    nat = sig.types["nat"]
    assert nat.params == ("i",)
    body = nat.body
    assert isinstance(body, Plus) and body.labels == ("zero", "succ")
    assert isinstance(body.get("zero"), One)
    succ = body.get("succ")
    assert isinstance(succ, Exists) and succ.var == "j"
    assert isinstance(succ.body, Assert)
    assert succ.body.prop == Rel("<", Var("j"), Var("i"))
    assert succ.body.body == TypeRef("nat", (Var("j"),))


def test_empty_file():
    sig = parse_program("")
    assert sig.types == {} and sig.procs == {} and sig.exec is None


def test_eat_definition():
    sig = parse_program(corpus.source("eat"))
    eat = sig.procs["eat"]
    assert eat.params == ("i",) and eat.constraints == ()
    assert [x for x, _ in eat.args] == ["x"]
    assert eat.args[0][1] == TypeRef("nat", (Var("i"),))
    assert eat.dest == "y" and isinstance(eat.result, One)
    assert isinstance(eat.body, CaseRead) and eat.body.addr == "x"
    assert sig.exec.name == "eat" and sig.exec.args == (Lit(2),)


def test_locations_recorded():
    sig = parse_program(corpus.source("eat"))
    eat = sig.procs["eat"]
    assert eat.loc.line == 5
    assert eat.body.loc.line == 6


@pytest.mark.parametrize("text, where", [
    ("type nat[i] = +{zero: 1", (1, 24)),
    ("proc f () -> (y : 1) =\n  write y", (2, 10)),
    ("type t = 2", (1, 10)),
    ("proc f () -> (y : 1) = write y $", (1, 32)),
])
def test_parse_errors_have_positions(text, where):
    with pytest.raises(ParseError) as ei:
        parse_program(text)
    assert (ei.value.loc.line, ei.value.loc.col) == where


def test_duplicates_rejected():
    with pytest.raises(ParseError, match="duplicate type"):
        parse_program("type a = 1\ntype a = 1")
    with pytest.raises(ParseError, match="duplicate program"):
        parse_program("proc f () -> (y : 1) = write y ()\nproc f () -> (y : 1) = write y ()")
    with pytest.raises(ParseError, match="duplicate label"):
        parse_type("+{a: 1, a: 1}")
    with pytest.raises(ParseError, match="at most one exec"):
        parse_program("exec f()\nexec f()")


def test_expression_precedence():
    e = parse_expr("2 + 3 * 4")
    assert e == BinOp("+", Lit(2), BinOp("*", Lit(3), Lit(4)))
    assert parse_expr("a - b - c") == BinOp("-", BinOp("-", Var("a"), Var("b")), Var("c"))


def test_constraints_and_unicode():
    a = parse_constraint("forall i. exists j. 3*j <= i /\\ i < 3*j + 3")
    b = parse_constraint("∀i. ∃j. 3*j ≤ i ∧ i < 3*j + 3")
    assert a == b
    assert parse_constraint("(i + 1) < 2") == Rel("<", BinOp("+", Var("i"), Lit(1)), Lit(2))
    assert parse_type("⊕{a: 𝟏}".replace("𝟏", "1")) == parse_type("+{a: 1}")


def test_query_syntax():
    vs, cs, goal = parse_query("i, j; j < i |- j < i")
    assert vs == ("i", "j") and len(cs) == 1
    assert goal == Rel("<", Var("j"), Var("i"))
    vs, cs, _ = parse_query(". ; . |- 0 = 0")
    assert vs == () and cs == ()


def test_type_printing():
    t = parse_type("forall j. !{j < i}. str[j]")
    assert show_type(t) == "forall j. !{j < i}. str[j]"
    assert show_type(parse_type("(1 * 1) -> 1")) == "1 * 1 -> 1"
    assert show_type(parse_type("1 -> (1 -> 1)")) == "1 -> 1 -> 1"


@pytest.mark.parametrize("name", ALL)
def test_round_trip(name):
    sig = parse_program(corpus.source(name))
    text = pretty_program(sig)
    again = parse_program(text)
    assert again == sig
    assert pretty_program(again) == text


def test_desugar_value_sequence():
    p = parse_process("y <- read x l <[i], y>; write z ()")
    d = desugar(p)
    # one extra cut for the single nesting level
    assert isinstance(d, Cut) and isinstance(d.first, Cut)
    inner = d.first
    assert show_process(inner.first) == f"read x l {inner.var}"
    assert show_process(inner.second) == f"read {inner.var} <[i], y>"
    assert is_core(d) and not is_core(p)


def _cuts(p) -> int:
    match p:
        case Cut(_, a, b, _):
            return 1 + _cuts(a) + _cuts(b)
    return 0


@pytest.mark.parametrize("value, levels", [
    ("()", 0), ("l u", 0), ("l <[i], u>", 1), ("l <[i], <{i < 3}, u>>", 2),
    ("<[i + 1], tail <[i], <{i < i + 1}, y>>>", 3),
])
def test_one_cut_per_nesting_level(value, levels):
    p = parse_process(f"write x {value}")
    assert _cuts(desugar(p)) == levels


def test_desugar_identity_on_core():
    p = parse_process("x <- write x (); case read x (() => write y ())")
    assert is_core(p)
    assert desugar(p) == p


@pytest.mark.parametrize("name", ALL)
def test_desugar_idempotent(name):
    core = desugar_signature(parse_program(corpus.source(name)))
    assert desugar_signature(core) == core
    for d in core.procs.values():
        assert is_core(d.body)


def test_nested_pattern_decomposed():
    core = desugar_signature(parse_program(corpus.source("eat")))
    succ = core.procs["eat"].body.cont.get("succ")
    lab = succ.body
    assert isinstance(lab, CaseRead) and isinstance(lab.cont, IndexK)
    assert lab.cont.var == "j"
    prop = lab.cont.body
    assert isinstance(prop, CaseRead) and isinstance(prop.cont, PropK)
    assert show_process(prop.cont.body) == "y <- call eat [j] (x1)"


def test_fresh_names_avoid_user_names():
    p = parse_process("x_1 <- read x l <[i], x_1>; write z ()")
    d = desugar(p)
    assert d.var == "x_1"
    assert d.first.var not in all_names(p)


@pytest.mark.parametrize("name", corpus.POSITIVE)
def test_scopes_ok(name):
    rep = check_scopes(desugar_signature(parse_program(corpus.source(name))))
    assert rep.ok and not rep.errors


def test_unbound_address():
    sig = parse_program("proc f () -> (y : 1) = y <- z")
    rep = check_scopes(desugar_signature(sig))
    assert not rep.ok
    assert any("unbound address z" in d.message for d in rep.errors)


def test_unbound_index_variable():
    sig = parse_program("type nat[i] = +{z: 1}\nproc f () -> (y : nat[k]) = write y z ()")
    rep = check_scopes(desugar_signature(sig))
    assert not rep.ok


def test_unknown_type_and_arity():
    # reported by the well-formedness check that runs right after scopes
    prog = load("proc f () -> (y : nat[0]) = impossible")
    assert [e.message for e in prog.errors] == ["unknown type nat"]
    prog = load("type nat[i] = +{z: 1}\nproc f () -> (y : nat[0, 1]) = impossible")
    assert "expects 1 index argument" in prog.errors[0].message


def test_shadowing_is_a_warning():
    sig = parse_program("proc f (x : 1) -> (y : 1) = x <- write x (); y <- x")
    rep = check_scopes(desugar_signature(sig))
    assert rep.ok and rep.warnings


def test_pattern_label_with_value_is_label():
    k = parse_process("case read x { a u => y <- u, b <[n], v> => y <- v }").cont
    assert isinstance(k, LabelK) and k.labels == ("a", "b")
