import dataclasses

import pytest

from saxt import corpus
from saxt.arith import EMPTY, ArithContext, entails
from saxt.pipeline import load
from saxt.syntax import (
    desugar_signature, parse_constraint, parse_process, parse_program, parse_type,
    show_type,
)
from saxt.syntax.ast import (
    Call, CaseRead, CaseWrite, Copy, Cut, Impossible, Read, Write,
)
from saxt.typecheck import (
    CheckError, TypeCheckFailure, TypeDefEnv, check_process, check_signature,
    contractive, noncontractive_cycles, type_equal, unfold,
)

NAT = "type nat[i] = +{zero: 1, succ: exists j. ?{j < i}. nat[j]}\n"


def sig_of(text):
    return desugar_signature(parse_program(text))


def errors(text):
    prog = load(text)
    assert not prog.ok
    return prog.errors


def ctx(vs="", *cs):
    return ArithContext(tuple(v.strip() for v in vs.split(",") if v.strip()),
                        tuple(parse_constraint(c) for c in cs))


# -- contractiveness -----------------------------------------------------------

def test_corpus_types_contractive(programs):
    for prog in programs.values():
        assert contractive(prog.core)


def test_self_cycle():
    sig = sig_of("type V[i] = V[i]")
    assert not contractive(sig)
    assert noncontractive_cycles(sig) == [["V"]]


def test_two_step_cycle():
    sig = sig_of("type V[i] = W[i]\ntype W[i] = V[i]\ntype ok = +{a: V[0]}")
    assert not contractive(sig)
    (cycle,) = noncontractive_cycles(sig)
    assert sorted(cycle) == ["V", "W"]


def test_guarded_reference_is_contractive():
    assert contractive(sig_of("type s = &{h: 1, t: s}\ntype u = s"))


def test_noncontractive_rejected_before_typechecking():
    prog = load(corpus.source("noncontractive"))
    assert prog.stage == "contractive"
    assert prog.errors[0].category == "contractive"
    assert "V -> V" in prog.errors[0].message
    assert prog.derivations == {}


# -- unfolding and equality --------------------------------------------------------

def test_unfold_nat(programs):
    env = TypeDefEnv.of(programs["eat"].core)
    assert show_type(unfold(env, parse_type("nat[i]"))) == \
        "+{zero: 1, succ: exists j. ?{j < i}. nat[j]}"
    assert show_type(unfold(env, parse_type("nat[0]"))) == \
        "+{zero: 1, succ: exists j. ?{j < 0}. nat[j]}"


def test_unfold_sp_nu_as_printed():
    # the stream processor's nu layer exactly as printed, with an assertion
    sig = sig_of("type bit = +{b0: 1, b1: 1}\n"
                 "type sp[i, j] = +{put: bit * sp_nu[i, j]}\n"
                 "type sp_nu[i, j] = forall j1. ?{j1 < j}. sp[i, j1]")
    env = TypeDefEnv.of(sig)
    assert show_type(unfold(env, parse_type("sp_nu[i, j]"))) == \
        "forall j1. ?{j1 < j}. sp[i, j1]"
    assert show_type(unfold(env, parse_type("sp_nu[2, k + 1]"))) == \
        "forall j1. ?{j1 < k + 1}. sp[2, j1]"


def test_unfold_is_capture_avoiding():
    sig = sig_of(NAT)
    t = unfold(TypeDefEnv.of(sig), parse_type("nat[j]"))
    # the bound j is renamed away from the argument j
    assert "?{j < j}" not in show_type(t)
    assert type_equal(sig, ctx("j"), t, parse_type("nat[j]"))


def test_unfold_errors():
    env = TypeDefEnv.of(sig_of(NAT))
    with pytest.raises(Exception):
        unfold(env, parse_type("nope[0]"))
    with pytest.raises(Exception):
        unfold(env, parse_type("nat[0, 1]"))


@pytest.mark.parametrize("a, b, c, expected", [
    ("nat[i]", "+{zero: 1, succ: exists j. ?{j < i}. nat[j]}", ("i",), True),
    ("1", "1", (), True),
    ("?{j < i}. 1", "?{j + 0 < i}. 1", ("i, j",), True),
    ("?{j < i}. 1", "?{j <= i}. 1", ("i, j",), False),
    ("?{j < i}. 1", "?{j <= i}. 1", ("i, j", "j < i"), True),
    ("nat[i]", "nat[j]", ("i, j",), False),
    ("nat[i]", "nat[j]", ("i, j", "i = j"), True),
    ("nat[2 * i]", "nat[i + i]", ("i",), True),
    ("+{a: 1, b: 1}", "+{b: 1, a: 1}", (), True),
    ("+{a: 1, b: 1}", "+{a: 1}", (), False),
    ("+{a: 1}", "&{a: 1}", (), False),
    ("1 * 1", "1 -> 1", (), False),
    ("exists k. nat[k]", "exists m. nat[m]", (), True),
    ("forall k. !{k < 3}. nat[k]", "forall m. !{m < 3}. nat[m]", (), True),
    ("exists k. nat[k]", "forall k. nat[k]", (), False),
])
def test_type_equal(a, b, c, expected):
    sig = sig_of(NAT)
    assert type_equal(sig, ctx(*c), parse_type(a), parse_type(b)) is expected


def test_type_equal_coinductive():
    sig = sig_of("type s = &{h: 1, t: s}\ntype s2 = &{h: 1, t: &{h: 1, t: s2}}\n"
                 "type r = &{h: 1 * 1, t: r}")
    assert type_equal(sig, EMPTY, parse_type("s"), parse_type("s2"))
    assert not type_equal(sig, EMPTY, parse_type("s"), parse_type("r"))


# -- single processes ------------------------------------------------------------

def test_unit_right_axiom():
    d = check_process(TypeDefEnv.of(sig_of("")), EMPTY, parse_process("write x ()"),
                      "x", parse_type("1"))
    assert d.skeleton() == ("1R", [])
    assert str(d.judgment) == ".; .; . |- (x : 1)"


def test_rule_names_cover_connectives(programs):
    unit_read = load("proc f (u : 1) -> (y : 1) = case read u (() => write y ())")
    seen = {n.rule for n in unit_read.derivations["f"].walk()}
    for prog in programs.values():
        for d in prog.derivations.values():
            seen |= {n.rule for n in d.walk()}
    assert {"id", "cut", "1R", "1L", "⊕R", "⊕L", "&R", "&L", "∃R", "∃L", "∀R", "∀L",
            "?R", "?L", "!R", "!L", "→R", "→L", "impossible", "call"} <= seen


def test_tensor_rules():
    src = ("proc f (a : 1, b : 1) -> (y : 1 * 1) = write y <a, b>\n"
           "proc g (p : 1 * 1) -> (y : 1) = case read p (<a, b> => y <- b)")
    prog = load(src)
    assert prog.ok, prog.errors
    assert prog.derivations["f"].rule == "⊗R"
    assert prog.derivations["g"].skeleton() == ("⊗L", [("id", [])])


# -- corpus derivations --------------------------------------------------------------

def test_eat_skeleton(programs):
    d = programs["eat"].derivations["eat"]
    assert d.skeleton() == ("⊕L", [("id", []), ("∃L", [("?L", [("call", [])])])])
    (call,) = d.calls()
    assert call.judgment.vars == ("i", "j")
    assert str(call.judgment.arith) == "i, j; j < i"
    assert call.call.callee == "eat" and call.call.args == ("x1",)


def test_tailp_derivation(programs):
    d = programs["evens_odds"].derivations["tailp"]
    assert d.rule == "∀R"
    rules = [n for n in d.walk() if n.rule in ("∀L", "!L")]
    assert [n.rule for n in rules] == ["∀L", "∀L", "!L"]
    first, _, guard = rules
    assert show_type(first.judgment.type) == "str[i + 1]"
    assert show_type(guard.judgment.gamma[-1][1]) == "!{i < i + 1}. str[i]"


def test_evens_odds_calls_recorded(programs):
    ds = programs["evens_odds"].derivations
    callees = {name: [c.call.callee for c in d.calls()] for name, d in ds.items()}
    assert callees["evens"] == ["tailp", "odds"]
    assert callees["odds"] == ["tailp", "evens"]


def test_bin_impossible_branch(programs):
    d = programs["bin"].derivations["bzero"]
    imp = [n for n in d.walk() if n.rule == "impossible"]
    assert len(imp) == 1
    assert "n = 2 * k + 1" in str(imp[0].judgment)


def test_check_signature_raises_on_failure():
    sig = sig_of(corpus.source("eat_wrong_id"))
    with pytest.raises(TypeCheckFailure) as ei:
        check_signature(sig)
    assert ei.value.errors[0].rule == "id"


# -- errors -------------------------------------------------------------------------

def test_wrong_identity_names_id_rule():
    (e,) = errors(corpus.source("eat_wrong_id"))
    assert (e.definition, e.rule, e.category) == ("eat", "id", "type")
    assert (e.expected, e.actual) == ("1", "nat[i]")
    js = e.to_json()
    assert {"definition", "rule", "expected", "actual", "message", "category"} <= set(js)


def test_unknown_label():
    (e,) = errors(NAT + "proc f () -> (y : nat[0]) = u <- write u (); write y zilch u")
    assert e.rule == "⊕R" and "unknown label zilch" in e.message


def test_missing_branch():
    (e,) = errors(NAT + "proc f [i] (x : nat[i]) -> (y : 1) = "
                  "case read x { zero u => y <- u }")
    assert e.rule == "⊕L" and "missing branch" in e.message and "succ" in e.message


def test_failed_entailment_is_reported():
    (e,) = errors(NAT + "proc f () -> (y : nat[1]) = "
                  "u <- write u (); z : nat[0] <- write z zero u; "
                  "write y succ <[1], <{1 < 1}, z>>")
    assert e.rule == "?R"
    assert e.failed_entailment == ".; . |- 1 < 1"
    assert e.to_json()["failedEntailment"] == ".; . |- 1 < 1"


def test_impossible_needs_inconsistency():
    (e,) = errors("proc f [n] () -> (y : 1) = impossible")
    assert e.rule == "impossible"
    assert load("proc f [n | n < 0] () -> (y : 1) = impossible").ok


def test_call_constraint_checked():
    src = corpus.source("stream_processor").replace(
        "p <- call getthen [1, n] ();", "p <- call getthen [0, n] ();")
    (e,) = errors(src)
    assert e.definition == "main" and e.rule == "call"
    assert "0 > 0" in e.failed_entailment


def test_ill_defined_index():
    src = corpus.source("stream_processor").replace("[i, j | i > 0]", "[i, j]")
    errs = errors(src)
    assert errs[0].definition == "getthen"
    assert "i - 1" in errs[0].message


def test_call_argument_type_mismatch():
    # the same-size mutant with x1 in place of x has no subtyping to fall back on
    src = corpus.source("eat").replace("call eat [j] (x1)", "call eat [i] (x1)")
    (e,) = errors(src)
    assert e.rule == "call" and e.expected == "nat[i]" and e.actual == "nat[j]"


def test_cut_type_inferred_from_later_use():
    src = corpus.source("bin").replace("w : bin[1, 0] <- write w eps", "w <- write w eps")
    assert load(src).ok


def test_unannotated_cut_needs_annotation():
    src = NAT + (
        "proc g [j] (z : nat[j]) -> (y : 1) = case read z {\n"
        "  zero u => y <- u,\n"
        "  succ <[k], <{k < j}, z1>> => y <- call g [k] (z1) }\n"
        "proc f [i] (x : nat[i]) -> (y : 1) =\n"
        "  u <- write u (); w <- write w zero u;\n"
        "  case read x { zero v => y <- v,\n"
        "                succ <[j], <{j < i}, x1>> => y <- call g [j] (w) }\n")
    errs = errors(src)
    assert any("annotate the cut" in e.message for e in errs)
    fixed = src.replace("w <- write w zero u", "w : nat[0] <- write w zero u")
    assert not load(fixed).ok  # nat[0] is not nat[j]: still a type error, not a cut error
    assert all("annotate" not in e.message for e in load(fixed).errors)


def test_errors_from_each_definition_aggregated():
    src = NAT + ("proc f () -> (y : 1) = y <- call g ()\n"
                 "proc g () -> (y : nat[0]) = impossible\n"
                 "proc h (x : 1) -> (y : nat[0]) = y <- x\n")
    errs = errors(src)
    assert {e.definition for e in errs} == {"f", "g", "h"}


# -- invariants ----------------------------------------------------------------------

_RULES_BY_PROCESS = {
    Copy: {"id"}, Cut: {"cut"}, Call: {"call"}, Impossible: {"impossible"},
    Write: {"1R", "⊗R", "⊕R", "∃R", "?R"},
    CaseWrite: {"→R", "&R", "∀R", "!R"},
    Read: {"→L", "&L", "∀L", "!L"},
    CaseRead: {"1L", "⊗L", "⊕L", "∃L", "?L"},
}


def test_syntax_directed(programs):
    for prog in programs.values():
        for d in prog.derivations.values():
            for n in d.walk():
                assert n.rule in _RULES_BY_PROCESS[type(n.process)]


def test_weakening(programs):
    for prog in programs.values():
        sig = prog.core
        for name, d in sig.procs.items():
            gamma = tuple(d.args) + (("fresh_w", parse_type("1")),)
            ctx_ = ArithContext(tuple(d.params), tuple(d.constraints))
            w = check_process(sig, ctx_, d.body, d.dest, d.result, gamma=gamma, sig=sig,
                              definition=name)
            assert w.skeleton() == prog.derivations[name].skeleton()


def test_deterministic(programs):
    for prog in programs.values():
        assert check_signature(prog.core) == prog.derivations


def test_knot_substitution(programs):
    for prog in programs.values():
        for d in prog.derivations.values():
            for node in d.calls():
                j = node.judgment
                inst = node.call.instantiated()
                here = dict(j.gamma)
                assert inst.dest == j.dest
                assert type_equal(prog.core, j.arith, inst.type, j.type)
                for x, a in inst.gamma:
                    assert type_equal(prog.core, j.arith, here[x], a)
                for c in inst.constraints:
                    assert entails(j.arith, c)


def test_declared_constraints_default_empty(programs):
    assert programs["eat"].core.procs["eat"].constraints == ()
    getthen = programs["stream_processor"].core.procs["getthen"]
    assert len(getthen.constraints) == 1


def test_checker_error_is_exception():
    e = CheckError("f", "id", "boom")
    assert isinstance(e, Exception)
    assert dataclasses.is_dataclass(e)
