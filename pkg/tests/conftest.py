from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from coreff.surface import parse_computation, parse_program
from coreff.syntax import (
    App,
    FalseE,
    Fun,
    Handler,
    If,
    Inst,
    Let,
    LetRec,
    Match,
    OpCall,
    OpCase,
    Succ,
    TrueE,
    UnitE,
    Val,
    Var,
    With,
    Zero,
)
from coreff.types import NAT, Dirty

sys.path.insert(0, str(Path(__file__).parent))

GOLDEN = Path(__file__).parent / "golden"


def load(name: str):
    return parse_program((GOLDEN / name).read_text(encoding="utf-8"))


def read_trace(name: str, table) -> list:
    """Blocks of a golden trace file, parsed as computations."""
    text = (GOLDEN / name).read_text(encoding="utf-8")
    blocks, cur = [], []
    for line in text.splitlines():
        if line.strip() == "~>":
            blocks.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    blocks.append("\n".join(cur))
    return [parse_computation(b, table) for b in blocks]


@pytest.fixture(scope="session")
def handled():
    return load("handled.eff")


@pytest.fixture(scope="session")
def handled_body():
    return load("handled-body.eff")


# Random, untyped terms over a tiny name pool, so that shadowing and capture
# situations come up often.  Depth is bounded explicitly; open recursion
# through deferred strategies branches too widely to terminate quickly.

NAMES = ("x", "y", "z")
names = st.sampled_from(NAMES)
OPS = st.sampled_from(["lookup", "update"])
LEAVES = st.one_of(
    names.map(Var),
    st.sampled_from([Zero(), UnitE(), TrueE(), FalseE(), Inst("r1")]),
)


def _exprs(depth):
    if depth == 0:
        return LEAVES
    c, e = _comps(depth - 1), _exprs(depth - 1)
    return st.one_of(
        LEAVES,
        st.builds(Succ, e),
        st.builds(Fun, names, st.just(NAT), c),
        st.builds(
            Handler,
            names,
            st.just(NAT),
            c,
            st.lists(st.builds(OpCase, st.just(Inst("r1")), OPS, names, names, c), max_size=2).map(tuple),
        ),
    )


def _comps(depth):
    e = _exprs(depth)
    if depth == 0:
        return st.builds(Val, e)
    c = _comps(depth - 1)
    return st.one_of(
        st.builds(Val, e),
        st.builds(OpCall, st.just(Inst("r1")), OPS, e, names, c),
        st.builds(Let, names, c, c),
        st.builds(App, e, e),
        st.builds(If, e, c, c),
        st.builds(Match, e, c, names, c),
        st.builds(LetRec, names, names, st.just(NAT), st.just(Dirty(NAT)), c, c),
        st.builds(With, e, c),
    )


exprs = _exprs(3)
comps = _comps(3)
