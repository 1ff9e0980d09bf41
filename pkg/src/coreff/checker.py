"""Type-and-effect checking by minimal-type synthesis, plus skeletal typing.

Synthesis works bottom-up: instances get singleton regions, ``val`` gets the
empty dirt, and branching constructs join their branches.  Checking a term
against a type synthesizes and then tests subtyping.
"""

from __future__ import annotations

from typing import Sequence

from .syntax import (
    Absurd,
    App,
    EffectTable,
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
from .types import (
    BOOL,
    EMPTY,
    NAT,
    UNIT,
    Arrow,
    Dirty,
    EffT,
    HandlerT,
    NoBound,
    SkArrow,
    SkEffect,
    SkHandler,
    join_dirty,
    skeleton,
    skeleton_dirty,
    subtype_dirty,
    subtype_pure,
)

Context = tuple  # tuple of (name, type) pairs; the rightmost binding wins

_MAX_HANDLER_ROUNDS = 64


class TypingError(Exception):
    def __init__(self, rule: str, message: str, span=None):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule
        self.message = message
        self.span = span

    def render(self, filename: str = "<input>") -> str:
        if self.span is None:
            return f"{filename}: [{self.rule}] {self.message}"
        return f"{filename}:{self.span.line}:{self.span.column}: [{self.rule}] {self.message}"


class SubsumptionError(TypingError):
    """Synthesis succeeded but the synthesized type is not below the target."""


def lookup(ctx: Context, x: str):
    for name, t in reversed(ctx):
        if name == x:
            return t
    return None


def _show(t) -> str:
    from .surface import show_type

    return show_type(t)


class TypeChecker:
    def __init__(self, table: EffectTable):
        self.table = table

    # -- expressions

    def synth_expr(self, ctx: Context, e):
        match e:
            case Var(x):
                t = lookup(ctx, x)
                if t is None:
                    raise TypingError("Var", f"unbound variable {x}", e.span)
                return t
            case TrueE() | FalseE():
                return BOOL
            case Zero():
                return NAT
            case UnitE():
                return UNIT
            case Succ(arg):
                self._expect_expr(ctx, arg, NAT, "Succ")
                return NAT
            case Fun(x, ann, body):
                return Arrow(ann, self.synth_comp(ctx + ((x, ann),), body))
            case Inst(name):
                eff = self.table.effect_of_instance(name)
                if eff is None:
                    raise TypingError("Inst", f"unknown instance {name}", e.span)
                return EffT(eff, frozenset({name}))
            case Handler():
                return self.synth_handler(ctx, e)
        raise TypingError("Expr", f"not an expression: {e!r}")

    def _expect_expr(self, ctx, e, target, rule):
        t = self.synth_expr(ctx, e)
        if not subtype_pure(t, target):
            raise TypingError(rule, f"expected {_show(target)}, got {_show(t)}", e.span)

    def _effect_of(self, ctx, e, op, rule):
        """Type the instance expression of an operation; return (effect, region, signature)."""
        t = self.synth_expr(ctx, e)
        if not isinstance(t, EffT):
            raise TypingError(rule, f"expected an effect instance, got {_show(t)}", e.span)
        if self.table.effect_of_op(op) != t.effect:
            raise TypingError(rule, f"operation {op} does not belong to effect {t.effect}", e.span)
        return t.effect, t.region, self.table.signature(op)

    # -- handlers

    def handled_dirt(self, ctx: Context, cases: Sequence[OpCase]) -> frozenset:
        """Operations the cases are guaranteed to handle (singleton regions only)."""
        handled = set()
        for case in cases:
            _, region, _ = self._effect_of(ctx, case.inst, case.op, "OpCases-Cons")
            if len(region) == 1:
                handled.add((next(iter(region)), case.op))
        return frozenset(handled)

    def ocs_handled(self, ctx: Context, cases: Sequence[OpCase], outgoing: Dirty) -> frozenset:
        """Check every case body against ``outgoing``; return the handled dirt."""
        for case in cases:
            _, _, sig = self._effect_of(ctx, case.inst, case.op, "OpCases-Cons")
            inner = ctx + ((case.x, sig.param), (case.k, Arrow(sig.result, outgoing)))
            t = self.synth_comp(inner, case.body)
            if not subtype_dirty(t, outgoing):
                raise TypingError(
                    "OpCases-Cons",
                    f"case {case.op} has type {_show(t)}, expected {_show(outgoing)}",
                    case.span,
                )
        return self.handled_dirt(ctx, cases)

    def synth_handler(self, ctx: Context, h: Handler, extra=frozenset()) -> HandlerT:
        """Synthesize a handler type; ``extra`` is dirt the handler must forward."""
        value_t = self.synth_comp(ctx + ((h.x, h.ann),), h.body)
        if h.out is not None:
            out = h.out
            if not subtype_dirty(value_t, out):
                raise TypingError(
                    "Hand", f"value case has type {_show(value_t)}, expected {_show(out)}", h.span
                )
        else:
            out = Dirty(value_t.pure, value_t.dirt | extra)
            for _ in range(_MAX_HANDLER_ROUNDS):
                grown = out
                for case in h.cases:
                    _, _, sig = self._effect_of(ctx, case.inst, case.op, "OpCases-Cons")
                    inner = ctx + ((case.x, sig.param), (case.k, Arrow(sig.result, out)))
                    t = self.synth_comp(inner, case.body)
                    try:
                        grown = join_dirty(grown, t)
                    except NoBound:
                        raise TypingError(
                            "OpCases-Cons",
                            f"case {case.op} has type {_show(t)}, incompatible with {_show(out)}",
                            case.span,
                        ) from None
                if grown == out:
                    break
                out = grown
            else:
                raise TypingError("Hand", "outgoing type does not stabilise", h.span)
        handled = self.ocs_handled(ctx, h.cases, out)
        return HandlerT(Dirty(h.ann, handled | out.dirt), out)

    # -- computations

    def synth_comp(self, ctx: Context, c) -> Dirty:
        match c:
            case Val(e):
                return Dirty(self.synth_expr(ctx, e))
            case OpCall(e1, op, e2, y, body):
                _, region, sig = self._effect_of(ctx, e1, op, "Op")
                self._expect_expr(ctx, e2, sig.param, "Op")
                t = self.synth_comp(ctx + ((y, sig.result),), body)
                return Dirty(t.pure, t.dirt | {(i, op) for i in region})
            case With(e, body):
                body_t = self.synth_comp(ctx, body)
                if isinstance(e, Handler) and e.out is None:
                    extra = body_t.dirt - self.handled_dirt(ctx, e.cases)
                    ht = self.synth_handler(ctx, e, extra)
                else:
                    ht = self.synth_expr(ctx, e)
                    if not isinstance(ht, HandlerT):
                        raise TypingError("With", f"expected a handler, got {_show(ht)}", e.span)
                if not subtype_dirty(body_t, ht.ingoing):
                    raise TypingError(
                        "With",
                        f"handled computation has type {_show(body_t)}, handler expects {_show(ht.ingoing)}",
                        c.span,
                    )
                return ht.outgoing
            case If(e, c1, c2):
                self._expect_expr(ctx, e, BOOL, "IfThenElse")
                return self._join(self.synth_comp(ctx, c1), self.synth_comp(ctx, c2), "IfThenElse", c)
            case Absurd(ann, e):
                self._expect_expr(ctx, e, EMPTY, "Absurd")
                return ann
            case App(e1, e2):
                t = self.synth_expr(ctx, e1)
                if not isinstance(t, Arrow):
                    raise TypingError("App", f"expected a function, got {_show(t)}", e1.span)
                self._expect_expr(ctx, e2, t.dom, "App")
                return t.cod
            case Match(e, c1, x, c2):
                self._expect_expr(ctx, e, NAT, "Match")
                t1 = self.synth_comp(ctx, c1)
                t2 = self.synth_comp(ctx + ((x, NAT),), c2)
                return self._join(t1, t2, "Match", c)
            case Let(x, c1, c2):
                t1 = self.synth_comp(ctx, c1)
                t2 = self.synth_comp(ctx + ((x, t1.pure),), c2)
                return Dirty(t2.pure, t1.dirt | t2.dirt)
            case LetRec(f, x, dom, cod, c1, c2):
                ft = Arrow(dom, cod)
                t1 = self.synth_comp(ctx + ((f, ft), (x, dom)), c1)
                if not subtype_dirty(t1, cod):
                    raise TypingError(
                        "LetRec", f"body has type {_show(t1)}, annotation says {_show(cod)}", c.span
                    )
                return self.synth_comp(ctx + ((f, ft),), c2)
        raise TypingError("Comp", f"not a computation: {c!r}")

    def _join(self, t1, t2, rule, node):
        try:
            return join_dirty(t1, t2)
        except NoBound:
            raise TypingError(
                rule, f"branches have incompatible types {_show(t1)} and {_show(t2)}", node.span
            ) from None

    # -- checking

    def check_expr(self, ctx: Context, e, target) -> None:
        t = self.synth_expr(ctx, e)
        if not subtype_pure(t, target):
            raise SubsumptionError("SubExpr", f"{_show(t)} is not a subtype of {_show(target)}", e.span)

    def check_comp(self, ctx: Context, c, target: Dirty) -> None:
        t = self.synth_comp(ctx, c)
        if not subtype_dirty(t, target):
            raise SubsumptionError("SubComp", f"{_show(t)} is not a subtype of {_show(target)}", c.span)

    # -- skeletal typing

    def skel_expr(self, ctx: Context, e):
        match e:
            case Var(x):
                t = lookup(ctx, x)
                if t is None:
                    raise TypingError("Var", f"unbound variable {x}", e.span)
                return t
            case TrueE() | FalseE():
                return BOOL
            case Zero():
                return NAT
            case UnitE():
                return UNIT
            case Succ(arg):
                self._skel_expect(self.skel_expr(ctx, arg), NAT, "Succ", arg)
                return NAT
            case Fun(x, ann, body):
                s = skeleton(ann)
                return SkArrow(s, self.skel_comp(ctx + ((x, s),), body))
            case Inst(name):
                eff = self.table.effect_of_instance(name)
                if eff is None:
                    raise TypingError("Inst'", f"unknown instance {name}", e.span)
                return SkEffect(eff)
            case Handler(x, ann, body, cases, out):
                s = self.skel_comp(ctx + ((x, skeleton(ann)),), body)
                for case in cases:
                    sig = self._skel_op(ctx, case.inst, case.op, "OpCases-Cons'")
                    inner = ctx + ((case.x, skeleton(sig.param)), (case.k, SkArrow(skeleton(sig.result), s)))
                    self._skel_expect(self.skel_comp(inner, case.body), s, "OpCases-Cons'", case)
                if out is not None:
                    self._skel_expect(skeleton_dirty(out), s, "OpCases-Nil'", e)
                return SkHandler(skeleton(ann), s)
        raise TypingError("Expr", f"not an expression: {e!r}")

    def _skel_expect(self, got, want, rule, node):
        if got != want:
            raise TypingError(rule, f"expected {_show(want)}, got {_show(got)}", getattr(node, "span", None))

    def _skel_op(self, ctx, e, op, rule):
        t = self.skel_expr(ctx, e)
        if not isinstance(t, SkEffect):
            raise TypingError(rule, f"expected an effect instance, got {_show(t)}", e.span)
        if self.table.effect_of_op(op) != t.effect:
            raise TypingError(rule, f"operation {op} does not belong to effect {t.effect}", e.span)
        return self.table.signature(op)

    def skel_comp(self, ctx: Context, c):
        match c:
            case Val(e):
                return self.skel_expr(ctx, e)
            case OpCall(e1, op, e2, y, body):
                sig = self._skel_op(ctx, e1, op, "Op'")
                self._skel_expect(self.skel_expr(ctx, e2), skeleton(sig.param), "Op'", e2)
                return self.skel_comp(ctx + ((y, skeleton(sig.result)),), body)
            case With(e, body):
                h = self.skel_expr(ctx, e)
                if not isinstance(h, SkHandler):
                    raise TypingError("With", f"expected a handler, got {_show(h)}", e.span)
                self._skel_expect(self.skel_comp(ctx, body), h.ingoing, "With", body)
                return h.outgoing
            case If(e, c1, c2):
                self._skel_expect(self.skel_expr(ctx, e), BOOL, "IfThenElse", e)
                s = self.skel_comp(ctx, c1)
                self._skel_expect(self.skel_comp(ctx, c2), s, "IfThenElse", c2)
                return s
            case Absurd(ann, e):
                self._skel_expect(self.skel_expr(ctx, e), EMPTY, "Absurd", e)
                return skeleton_dirty(ann)
            case App(e1, e2):
                f = self.skel_expr(ctx, e1)
                if not isinstance(f, SkArrow):
                    raise TypingError("App", f"expected a function, got {_show(f)}", e1.span)
                self._skel_expect(self.skel_expr(ctx, e2), f.dom, "App", e2)
                return f.cod
            case Match(e, c1, x, c2):
                self._skel_expect(self.skel_expr(ctx, e), NAT, "Match", e)
                s = self.skel_comp(ctx, c1)
                self._skel_expect(self.skel_comp(ctx + ((x, NAT),), c2), s, "Match", c2)
                return s
            case Let(x, c1, c2):
                s = self.skel_comp(ctx, c1)
                return self.skel_comp(ctx + ((x, s),), c2)
            case LetRec(f, x, dom, cod, c1, c2):
                fs = SkArrow(skeleton(dom), skeleton_dirty(cod))
                s1 = self.skel_comp(ctx + ((f, fs), (x, skeleton(dom))), c1)
                self._skel_expect(s1, skeleton_dirty(cod), "LetRec", c1)
                return self.skel_comp(ctx + ((f, fs),), c2)
        raise TypingError("Comp", f"not a computation: {c!r}")


def skeleton_context(ctx: Context) -> Context:
    return tuple((x, skeleton(t)) for x, t in ctx)


# Module-level conveniences.


def synth_expr(table, ctx, e):
    return TypeChecker(table).synth_expr(tuple(ctx), e)


def synth_comp(table, ctx, c) -> Dirty:
    return TypeChecker(table).synth_comp(tuple(ctx), c)


def check_expr(table, ctx, e, target) -> None:
    TypeChecker(table).check_expr(tuple(ctx), e, target)


def check_comp(table, ctx, c, target) -> None:
    TypeChecker(table).check_comp(tuple(ctx), c, target)


def ocs_handled(table, ctx, cases, outgoing) -> frozenset:
    return TypeChecker(table).ocs_handled(tuple(ctx), cases, outgoing)


def skeletal_type(table, sctx, t):
    """The unique skeletal type of an expression or computation."""
    tc = TypeChecker(table)
    from .syntax import COMPUTATION_TYPES

    if isinstance(t, COMPUTATION_TYPES):
        return tc.skel_comp(tuple(sctx), t)
    return tc.skel_expr(tuple(sctx), t)
