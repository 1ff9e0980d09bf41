from __future__ import annotations

import pytest
from hypothesis import given, settings

from conftest import GOLDEN, NAMES, comps, load
from coreff.equiv.enumerate import CORPUS_TABLE, corpus
from coreff.surface import (
    ParseError,
    ResolveError,
    parse_computation,
    parse_expression,
    parse_program,
    parse_type,
    show,
    show_type,
)
from coreff.syntax import Fun, Inst, Let, OpCall, Succ, UnitE, Val, Var, Zero, nat
from coreff.types import NAT, UNIT, Arrow, Dirty, EffT, HandlerT

PREAMBLE = "effect ref { lookup : unit -> nat  update : nat -> unit }\ninstance r1, r2 : ref\n"


def test_numeral_is_succ_chain():
    assert parse_computation("val 2", CORPUS_TABLE) == Val(Succ(Succ(Zero())))
    assert show(Val(nat(2))) == "val 2"


def test_generic_operation_sugar():
    c = parse_computation("r1#lookup ()", CORPUS_TABLE)
    assert c == OpCall(Inst("r1"), "lookup", UnitE(), "y", Val(Var("y")))


def test_let_and_binder_scoping():
    c = parse_computation("let x = r1#lookup () in val x", CORPUS_TABLE)
    assert isinstance(c, Let) and c.body == Val(Var("x"))


def test_unknown_name_is_a_resolve_error():
    with pytest.raises(ResolveError):
        parse_computation("val x", CORPUS_TABLE)


def test_unknown_operation_is_a_resolve_error():
    with pytest.raises(ResolveError):
        parse_program(PREAMBLE + "do r1#frobnicate ()")


def test_unknown_effect_is_a_resolve_error():
    with pytest.raises(ResolveError):
        parse_program("instance r : ref\ndo val ()")


def test_unknown_instance_in_a_dirt_is_a_resolve_error():
    with pytest.raises(ResolveError):
        parse_program(PREAMBLE + "do let rec f x : nat -> nat ! {r9#lookup} = val x in val ()")
    with pytest.raises(ResolveError):
        parse_type("nat ! {r9#lookup}", CORPUS_TABLE)


def test_syntax_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse_program(PREAMBLE + "do let x = in val x")
    assert err.value.span is not None
    assert err.value.render("f.eff").startswith("f.eff:3:")


def test_type_syntax():
    assert parse_type("nat -> nat ! {}") == Arrow(NAT, Dirty(NAT))
    t = parse_type("nat ! {r1#lookup} => unit ! {}", CORPUS_TABLE)
    assert t == HandlerT(Dirty(NAT, frozenset({("r1", "lookup")})), Dirty(UNIT))
    assert parse_type("ref^{r2, r1}", CORPUS_TABLE) == EffT("ref", frozenset({"r1", "r2"}))


def test_dirt_prints_sorted():
    t = Dirty(NAT, frozenset({("r2", "update"), ("r1", "update"), ("r1", "lookup")}))
    assert show_type(t) == "nat ! {r1#lookup, r1#update, r2#update}"


def test_printing_is_deterministic_and_parseable():
    text = "fun x : nat. let y = r1#update(x; _. val ()) in val y"
    e = parse_expression(text, CORPUS_TABLE)
    assert isinstance(e, Fun)
    assert parse_expression(show(e), CORPUS_TABLE) == e
    assert show(parse_expression(show(e), CORPUS_TABLE)) == show(e)


def test_comments_are_skipped():
    assert parse_computation("(* a (* nested *) note *) val ()", CORPUS_TABLE) == Val(UnitE())


def test_spans_do_not_affect_equality():
    a = parse_computation("val  0", CORPUS_TABLE)
    b = parse_computation("val 0", CORPUS_TABLE)
    assert a == b and a.span != b.span


@settings(max_examples=400)
@given(comps)
def test_round_trip_random_terms(c):
    assert parse_computation(show(c), CORPUS_TABLE, env=NAMES) == c


def test_round_trip_corpus_sample():
    for c in corpus(3):
        assert parse_computation(show(c), CORPUS_TABLE) == c


@pytest.mark.parametrize("path", sorted(p.name for p in GOLDEN.glob("*.eff")))
def test_round_trip_golden_files(path):
    prog = load(path)
    again = parse_program(show(prog))
    assert again.body == prog.body
    assert again.table == prog.table
