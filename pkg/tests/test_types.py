from __future__ import annotations

import pytest
from hypothesis import given, settings

from declarative import Declarative
from typegen import pure_types, types_up_to
from coreff.equiv.enumerate import CORPUS_TABLE
from coreff.surface import parse_type, show_type
from coreff.types import (
    BOOL,
    NAT,
    UNIT,
    Arrow,
    Dirty,
    NoBound,
    SkArrow,
    SkEffect,
    SkHandler,
    dirty,
    eff,
    join_pure,
    meet_pure,
    skeleton,
    subtype_dirty,
    subtype_pure,
)

T = CORPUS_TABLE
LE = Declarative(T).le


def ty(text):
    return parse_type(text, T)


@pytest.mark.parametrize(
    "sub, sup",
    [
        ("ref^{r1}", "ref^{r1, r2}"),
        ("nat -> nat ! {}", "nat -> nat ! {r1#lookup}"),
        ("ref^{r1, r2} -> unit ! {}", "ref^{r1} -> unit ! {}"),
        ("nat ! {r1#lookup} => nat ! {}", "nat ! {} => nat ! {r2#update}"),
        ("(nat -> nat ! {r1#update}) -> nat ! {}", "(nat -> nat ! {}) -> nat ! {}"),
    ],
)
def test_subtype_examples(sub, sup):
    assert subtype_pure(ty(sub), ty(sup))
    assert not subtype_pure(ty(sup), ty(sub))


def test_subtype_rejects_different_shapes():
    assert not subtype_pure(NAT, BOOL)
    assert not subtype_pure(eff("ref", "r1"), NAT)
    assert not subtype_pure(ty("nat -> nat ! {}"), ty("nat ! {} => nat ! {}"))


def test_dirty_subtyping_needs_both_parts():
    assert subtype_dirty(dirty(NAT), dirty(NAT, ("r1", "lookup")))
    assert not subtype_dirty(dirty(NAT, ("r1", "lookup")), dirty(NAT))
    assert not subtype_dirty(dirty(NAT), dirty(UNIT, ("r1", "lookup")))


def test_skeleton_examples():
    assert skeleton(ty("ref^{r1, r2}")) == SkEffect("ref")
    assert skeleton(ty("nat -> nat ! {r1#lookup}")) == SkArrow(NAT, NAT)
    assert skeleton(ty("nat ! {r1#lookup} => unit ! {}")) == SkHandler(NAT, UNIT)
    assert show_type(skeleton(ty("(ref^{r1} -> nat ! {}) -> unit ! {}"))) == "(ref -> nat) -> unit"


def test_join_and_meet_examples():
    a, b = ty("ref^{r1} -> nat ! {r1#lookup}"), ty("ref^{r2} -> nat ! {r2#update}")
    assert join_pure(a, b) == Arrow(eff("ref"), dirty(NAT, ("r1", "lookup"), ("r2", "update")))
    assert meet_pure(a, b) == Arrow(eff("ref", "r1", "r2"), Dirty(NAT))
    with pytest.raises(NoBound):
        join_pure(NAT, UNIT)


SMALL = types_up_to(3)


def test_reflexive_on_small_types():
    for a in SMALL:
        assert subtype_pure(a, a)


def test_subtyping_matches_declarative_rules_on_small_types():
    for a in SMALL[:400]:
        for b in SMALL:
            assert subtype_pure(a, b) == LE(a, b), (a, b)


@settings(max_examples=300)
@given(pure_types, pure_types, pure_types)
def test_transitive(a, b, c):
    if subtype_pure(a, b) and subtype_pure(b, c):
        assert subtype_pure(a, c)


@settings(max_examples=300)
@given(pure_types, pure_types)
def test_antisymmetric(a, b):
    if subtype_pure(a, b) and subtype_pure(b, a):
        assert a == b


@settings(max_examples=300)
@given(pure_types, pure_types)
def test_subtypes_share_skeletons(a, b):
    if subtype_pure(a, b):
        assert skeleton(a) == skeleton(b)


@settings(max_examples=300)
@given(pure_types, pure_types)
def test_join_and_meet_are_bounds(a, b):
    if skeleton(a) != skeleton(b):
        with pytest.raises(NoBound):
            join_pure(a, b)
        return
    j, m = join_pure(a, b), meet_pure(a, b)
    assert subtype_pure(a, j) and subtype_pure(b, j)
    assert subtype_pure(m, a) and subtype_pure(m, b)
    assert skeleton(j) == skeleton(a) == skeleton(m)


@settings(max_examples=200)
@given(pure_types)
def test_type_printing_round_trips(a):
    assert parse_type(show_type(a), T) == a
