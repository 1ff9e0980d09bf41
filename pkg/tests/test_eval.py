from __future__ import annotations

import random

import pytest

from conftest import load, read_trace
from coreff.big import Agree, check_agreement, eval_big
from coreff.checker import synth_comp
from coreff.equiv.enumerate import CORPUS_TABLE, corpus
from coreff.small import IsOpCall, IsValue, OutOfFuel, Stepped, Stuck, render_trace, run_small, step, trace
from coreff.surface import parse_computation, show
from coreff.syntax import (
    Let,
    OpCall,
    OpCallResult,
    StuckError,
    Timeout,
    UnitE,
    Val,
    ValueResult,
    With,
    Zero,
    alpha_eq,
    alpha_normalize,
    free_vars,
    nat,
)
from coreff.types import subtype_dirty

T = CORPUS_TABLE
DIVERGE = "let rec f x : unit -> unit ! {} = f x in f ()"


def c(text, table=T):
    return parse_computation(text, table)


# ---------------------------------------------------------------- small step


def test_if_true_steps_to_then_branch():
    assert step(c("if true then val 0 else val 1"), T) == Stepped(c("val 0"))


def test_value_is_terminal():
    assert step(c("val 0"), T) == IsValue(Zero())


def test_op_call_is_terminal():
    out = step(c("r1#lookup ()"), T)
    assert isinstance(out, IsOpCall) and (out.inst, out.op) == ("r1", "lookup")


def test_let_hoists_operation_call():
    out = step(c("let x = r1#lookup((); y. val y) in val x"), T)
    assert isinstance(out, Stepped)
    assert alpha_eq(out.next, c("r1#lookup((); y. let x = val y in val x)"))


def test_hoisting_freshens_a_captured_binder():
    # y is free in the let body, so the hoisted binder must not be y.
    term = parse_computation("let x = r1#lookup((); y. val y) in val y", T, env=("y",))
    out = step(term, T)
    assert isinstance(out, Stepped) and isinstance(out.next, OpCall)
    assert out.next.y != "y"
    assert "y" in free_vars(out.next)


def test_handler_value_case(handled):
    h = handled.body.handler
    out = step(With(h, Val(nat(2))), handled.table)
    assert isinstance(out, Stepped)
    assert alpha_eq(out.next, c("ι#update(2; y. val y)", handled.table))


def test_ill_typed_dead_end_is_stuck():
    assert isinstance(step(c("if 0 then val 0 else val 1"), T), Stuck)
    with pytest.raises(StuckError):
        run_small(c("if 0 then val 0 else val 1"), T)


def test_run_small_example(handled):
    r = run_small(handled.body, handled.table, fuel=100)
    assert isinstance(r, OpCallResult)
    assert alpha_eq(r.to_computation(), c("ι#update(2; y. val y)", handled.table))


def test_divergence_times_out():
    with pytest.raises(Timeout):
        run_small(c(DIVERGE), T, fuel=50)
    with pytest.raises(Timeout):
        eval_big(c(DIVERGE), T, fuel=50)


def test_unit_value_runs_at_any_fuel():
    for fuel in (0, 1, 10):
        assert run_small(c("val ()"), T, fuel) == ValueResult(UnitE())


def test_trivial_traces():
    assert trace(c("val 0"), T).steps == [c("val 0")]
    tr = trace(c("(fun x : nat. val x) 0"), T)
    assert len(tr.steps) == 2 and tr.outcome == IsValue(Zero())


def test_trace_out_of_fuel_is_reported():
    tr = trace(c(DIVERGE), T, fuel=5)
    assert isinstance(tr.outcome, OutOfFuel) and tr.steps_used == 5
    assert render_trace(tr).endswith("TIMEOUT\n")


def test_golden_trace(handled):
    expected = read_trace("handled.trace", handled.table)
    got = trace(handled.body, handled.table, fuel=100).steps
    assert len(got) == len(expected)
    for a, b in zip(got, expected):
        assert alpha_normalize(a) == alpha_normalize(b), show(a)


def test_trace_steps_are_single_steps(handled):
    tr = trace(handled.body, handled.table, fuel=100)
    for a, b in zip(tr.steps, tr.steps[1:]):
        assert step(a, handled.table) == Stepped(b)


# ---------------------------------------------------------------- big step


def test_big_step_examples(handled):
    assert eval_big(c("val 3"), T) == ValueResult(nat(3))
    r = eval_big(c("let x = r1#lookup((); y. val y) in val x"), T)
    assert isinstance(r, OpCallResult)
    assert alpha_eq(r.to_computation(), c("r1#lookup((); y. let x = val y in val x)"))
    assert alpha_eq(eval_big(handled.body, handled.table).to_computation(), c("ι#update(2; y. val y)", handled.table))


def test_big_step_handles_deep_let_chains():
    # let x = (let x = (... val 0 ...) in val 1) in val 1, nested on the left
    term = Val(Zero())
    for _ in range(5000):
        term = Let("x", term, Val(nat(1)))
    assert eval_big(term, T, fuel=100_000) == ValueResult(nat(1))


def test_agreement_examples(handled):
    assert isinstance(check_agreement(handled.body, handled.table), Agree)
    assert isinstance(check_agreement(c("val 0"), T), Agree)
    assert check_agreement(c(DIVERGE), T, fuel=50) == Agree("timeout")


@pytest.mark.parametrize("name", ["swap-correct.eff", "swap-wrong.eff", "handled.eff"])
def test_agreement_on_golden_programs(name):
    prog = load(name)
    assert isinstance(check_agreement(prog.body, prog.table, fuel=1000), Agree)


def test_swap_correct_returns_unit():
    prog = load("swap-correct.eff")
    assert eval_big(prog.body, prog.table) == ValueResult(UnitE())


def _sample(n, seed=11):
    return random.Random(seed).sample(list(corpus(3)), n)


def test_agreement_on_a_corpus_sample():
    for p in _sample(300):
        assert isinstance(check_agreement(p, T, fuel=500), Agree), show(p)


def test_evaluation_is_deterministic():
    for p in _sample(100, seed=2):
        for run in (run_small, eval_big):
            try:
                first = run(p, T, 500)
            except Timeout:
                with pytest.raises(Timeout):
                    run(p, T, 500)
                continue
            assert run(p, T, 500) == first


def test_progress_and_preservation_on_a_sample():
    for p in _sample(200, seed=4):
        ty = synth_comp(T, (), p)
        cur = p
        for _ in range(200):
            out = step(cur, T)
            assert not isinstance(out, Stuck), show(cur)
            if isinstance(out, IsOpCall):
                assert (out.inst, out.op) in ty.dirt
            if not isinstance(out, Stepped):
                break
            assert subtype_dirty(synth_comp(T, (), out.next), ty), show(out.next)
            cur = out.next
