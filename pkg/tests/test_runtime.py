import pytest

from saxt import corpus
from saxt.pipeline import load
from saxt.runtime import (
    Configuration, ConstraintFault, DanglingAddress, ImpossibleReached, RunError,
    ShapeMismatch, Status, WriteOnceViolation, apply_continuation, builder, decode,
    enabled, instantiate, run, run_config, start, step,
)
from saxt.syntax import desugar, parse_process, parse_type, show_process
from saxt.syntax.ast import (
    TOP, Addr, IndexV, LabelV, PairV, PropV, UnitV, Lit,
)
from saxt.syntax.subst import subst_addr_process, subst_idx_process

A, B, C, D = (Addr(n) for n in range(4))
SEEDS = range(5)


def proc(text, **addrs):
    """Core process over runtime addresses: proc("write a ()", a=A)."""
    return subst_addr_process(desugar(parse_process(text)), addrs)


def config(procs=(), cells=(), counter=10):
    return Configuration(dict(procs), dict(cells), counter)


@pytest.fixture(scope="module")
def eat_sig():
    return load(corpus.source("eat")).core


# -- enabled -----------------------------------------------------------------------

def test_enabled_write_value():
    (r,) = enabled(config({A: proc("write a ()", a=A)}))
    assert r.rule == "write-value" and r.addrs == (A,)


def test_enabled_blocked_read():
    assert enabled(config({B: proc("case read a (() => write b ())", a=A, b=B)})) == []


def test_enabled_read_value():
    k = "case read a { zero x => write b (), succ x => write b () }"
    cfg = config({B: proc(k, a=A, b=B)}, {A: LabelV("succ", C)})
    (r,) = enabled(cfg)
    assert r.rule == "read-value" and r.addrs == (A, B)


def test_enabled_every_rule():
    cfg = config({
        B: proc("b <- a", a=A, b=B),
        C: proc("x <- write x (); c <- x", c=C),
        D: proc("read a head d", a=A, d=D),
    }, {A: UnitV()})
    assert [r.rule for r in enabled(cfg)] == ["copy", "cut", "pass"]


# -- the evaluation table -------------------------------------------------------------

def test_row_unit():
    k = parse_process("case read a (() => write z ())").cont
    assert apply_continuation(UnitV(), k) == parse_process("write z ()")


def test_row_pair():
    k = proc("case read p (<x, y> => case write z (<u, v> => read y <x, v>))", p=D).cont
    got = apply_continuation(PairV(A, B), k)
    assert got == proc("case write z (<u, v> => read b <a, v>)", a=A, b=B)


def test_row_label():
    k = proc("case read a { zero x => z <- x, succ x => read x head z }", a=D).cont
    assert apply_continuation(LabelV("succ", A), k) == proc("read a head z", a=A)
    assert apply_continuation(LabelV("zero", B), k) == proc("z <- b", b=B)


def test_row_index():
    k = proc("case read a (<[i], x> => z <- call f [i + 1] (x))", a=D).cont
    got = apply_continuation(IndexV(Lit(3), B), k)
    # P(n, b): the index is substituted and so is the address
    assert show_process(got) == f"z <- call f [3 + 1] ({B})"


def test_row_constraint():
    k = proc("case read a (<{i < 3}, x> => z <- x)", a=D).cont
    assert apply_continuation(PropV(TOP, A), k) == proc("z <- a", a=A)


@pytest.mark.parametrize("value, pattern", [
    (PairV(A, B), "() => write z ()"),
    (UnitV(), "<x, y> => write z ()"),
    (IndexV(Lit(1), A), "<{1 < 2}, x> => write z ()"),
    (LabelV("huh", A), "{ a x => write z () }"),
])
def test_shape_mismatch(value, pattern):
    k = parse_process(f"case read q {pattern}" if pattern.startswith("{")
                      else f"case read q ({pattern})").cont
    with pytest.raises(ShapeMismatch):
        apply_continuation(value, k)


def test_read_of_continuation_cell_is_a_fault():
    k = parse_process("case write a (() => write z ())").cont
    cfg = config({B: proc("case read a (() => write b ())", a=A, b=B)}, {A: k})
    with pytest.raises(ShapeMismatch):
        step(None, cfg)


# -- steps ----------------------------------------------------------------------------

def test_cut_allocates_fresh():
    cfg = config({C: proc("x <- write x (); c <- x", c=C)}, counter=7)
    r = step(None, cfg)
    a = Addr(7)
    assert r.rule == "cut" and r.addrs == (C, a)
    assert cfg.procs == {C: proc("c <- a", c=C, a=a), a: proc("write a ()", a=a)}


def test_copy():
    w = LabelV("succ", C)
    cfg = config({B: proc("b <- a", a=A, b=B)}, {A: w})
    step(None, cfg)
    assert cfg.final and cfg.cells == {A: w, B: w}


def test_call_instantiates(eat_sig):
    y, x = Addr(5), Addr(6)
    p = proc("y <- call eat [2] (x)", y=y, x=x)
    body = eat_sig.procs["eat"].body
    expected = subst_addr_process(body, {"x": x, "y": y})
    expected = subst_idx_process(expected, {"i": Lit(2)})
    assert instantiate(eat_sig, y, p) == expected
    cfg = config({y: p})
    step(eat_sig, cfg)
    assert cfg.procs[y] == expected


def test_call_evaluates_indices(eat_sig):
    p = proc("y <- call eat [1 + 1] (x)", y=A, x=B)
    assert instantiate(eat_sig, A, p) == instantiate(eat_sig, A, proc(
        "y <- call eat [2] (x)", y=A, x=B))


def test_write_closes_values():
    cfg = config({A: proc("write a <[2 + 3], b>", a=A, b=B)})
    step(None, cfg)
    assert cfg.cells[A] == IndexV(Lit(5), B)
    cfg = config({A: proc("write a <{1 < 2}, b>", a=A, b=B)})
    step(None, cfg)
    assert cfg.cells[A] == PropV(TOP, B)


def test_false_constraint_value_faults():
    cfg = config({A: proc("write a <{2 < 1}, b>", a=A, b=B)})
    with pytest.raises(ConstraintFault):
        step(None, cfg)


def test_write_once():
    cfg = config({A: proc("write a ()", a=A)}, {A: UnitV()})
    with pytest.raises(WriteOnceViolation):
        step(None, cfg)
    with pytest.raises(WriteOnceViolation):
        Configuration(cells={A: UnitV()}).write(A, UnitV())


def test_impossible_faults():
    cfg = config({A: parse_process("impossible")})
    with pytest.raises(ImpossibleReached):
        step(None, cfg)
    with pytest.raises(ImpossibleReached):
        run_config(None, config({A: parse_process("impossible")}))


# -- runs -------------------------------------------------------------------------------

def test_empty_configuration_is_final():
    cfg = Configuration()
    assert run_config(None, cfg) is Status.FINAL and cfg.steps == 0


def test_stuck():
    cfg = config({B: proc("case read a (() => write b ())", a=A, b=B)})
    assert run_config(None, cfg) is Status.STUCK


def test_eat_two(eat_sig):
    res = run(eat_sig, "eat", (2,), schedule="leftmost")
    assert res.status is Status.FINAL and res.exit_code == 0
    assert res.value() == "()"
    assert res.config.cells[res.root] == UnitV()


@pytest.mark.parametrize("n", [0, 1, 2, 5, 9])
def test_eat_step_count_is_linear(eat_sig, n):
    counts = {run(eat_sig, "eat", (n,), seed=s).steps for s in SEEDS}
    assert counts == {10 * n + 6}


def test_evens_head_of_constant_stream(programs):
    res = run(programs["evens_odds"].core, "main", (3,), probe="head")
    assert res.status is Status.FINAL and res.value() == "b1"


def test_out_of_fuel():
    sig = load(corpus.source("loop")).core
    res = run(sig, "loop", (3,), fuel=200)
    assert res.status is Status.OUT_OF_FUEL and res.exit_code == 3
    assert res.steps == 200


def test_trace_format(eat_sig):
    res = run(eat_sig, "eat", (1,))
    assert len(res.trace) == res.steps
    assert [t["step"] for t in res.trace] == list(range(1, res.steps + 1))
    assert {t["rule"] for t in res.trace} <= {
        "copy", "cut", "pass", "read-value", "call", "write-value", "write-continuation"}
    assert all(isinstance(a, str) for t in res.trace for a in t["addrs"])


def test_start_errors(eat_sig):
    with pytest.raises(RunError):
        start(eat_sig, "nope", ())
    with pytest.raises(RunError):
        start(eat_sig, "eat", ())
    with pytest.raises(RunError):
        start(eat_sig, "eat", (-1,))


def test_probe_requires_continuation(eat_sig):
    with pytest.raises(RunError):
        run(eat_sig, "eat", (1,), probe="head")


def test_builder_rejects_other_types(programs):
    with pytest.raises(RunError):
        builder(programs["evens_odds"].core, parse_type("str[2]"))


def test_persistence(programs):
    sig = programs["stream_processor"].core
    cfg, _ = start(sig, "main", (2,))
    before = {}
    while not cfg.final:
        step(sig, cfg)
        for a, w in before.items():
            assert cfg.cells[a] is w
        before = dict(cfg.cells)


# -- decoding -----------------------------------------------------------------------------

def test_decode_nat(eat_sig):
    cfg = Configuration()
    a = cfg.fresh()
    cfg.spawn(a, subst_addr_process(builder(eat_sig, parse_type("nat[2]"), "x"), {"x": a}))
    assert run_config(eat_sig, cfg) is Status.FINAL
    assert decode(cfg, a) == "succ(succ(zero))"
    assert decode(cfg, a, show_indices=True) == "succ([1] succ([0] zero))"


def test_decode_unit_and_closure(programs):
    assert decode(Configuration(cells={A: UnitV()}), A) == "()"
    k = parse_process("case write a (() => write z ())").cont
    assert decode(Configuration(cells={A: k}), A) == "<closure>"
    sig = programs["evens_odds"].core
    assert decode(Configuration(), A, parse_type("str[1]"), sig=sig) == "<closure>"


def test_decode_dangling():
    with pytest.raises(DanglingAddress):
        decode(Configuration(cells={A: LabelV("l", B)}), A)


# -- properties over the corpus ---------------------------------------------------------------

ENTRIES = [("eat", "eat", (3,), None), ("evens_odds", "main", (3,), "head"),
           ("stream_processor", "main", (3,), "head"), ("bin", "main", (), None),
           ("bin", "main0", (), None)]


@pytest.mark.parametrize("name, entry, args, probe", ENTRIES)
def test_confluent_and_write_once(programs, name, entry, args, probe):
    sig = programs[name].core
    values = set()
    for s in SEEDS:
        res = run(sig, entry, args, seed=s, probe=probe)
        assert res.status is Status.FINAL
        values.add(res.value())
    res = run(sig, entry, args, schedule="leftmost", probe=probe)
    values.add(res.value())
    assert len(values) == 1


def test_bin_answers(programs):
    sig = programs["bin"].core
    assert run(sig, "main").value() == "no"
    assert run(sig, "main0").value() == "()"


def test_configuration_str():
    cfg = config({B: proc("b <- a", a=A, b=B)}, {A: UnitV()})
    assert str(cfg) == f"cell {A} ()\nproc {B} ({B} <- {A})"
