"""The monadic state handler and the ``H[c, e]`` run-with-initial-state wrapper."""

from __future__ import annotations

from ..syntax import (
    App,
    Computation,
    EffectTable,
    Expression,
    Fun,
    Handler,
    Let,
    OpCase,
    UnitE,
    Val,
    Var,
    With,
    free_vars,
    fresh,
)


def mk_state_handler(ref: Expression, table: EffectTable, value_type) -> Handler:
    """Thread the contents of ``ref`` through the handled computation as a function argument."""
    state = table.signature("lookup").result
    return Handler(
        "x",
        value_type,
        Val(Fun("s", state, Val(Var("x")))),
        (
            OpCase(
                ref,
                "lookup",
                "_",
                "k",
                Val(Fun("s", state, Let("f", App(Var("k"), Var("s")), App(Var("f"), Var("s"))))),
            ),
            OpCase(
                ref,
                "update",
                "s'",
                "k",
                Val(Fun("s", state, Let("f", App(Var("k"), UnitE()), App(Var("f"), Var("s'"))))),
            ),
        ),
    )


def mk_H(
    c: Computation, e: Expression, ref: Expression, table: EffectTable, value_type=None
) -> Computation:
    """``let f = (with state_ref handle c) in f e``.

    ``value_type`` is the pure type of ``c``; it is synthesized when ``c`` is
    closed and the argument is omitted.
    """
    if value_type is None:
        from ..checker import synth_comp

        value_type = synth_comp(table, (), c).pure
    f = fresh("f", free_vars(e))
    return Let(f, With(mk_state_handler(ref, table, value_type), c), App(Var(f), e))
