"""Directed beta and eta rewriting.

Rules are tried at each position in leftmost-outermost order.  A position is
visited together with a typing context for the binders above it; the
type-directed eta rules only fire when that context pins down the type they
need.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from ..checker import TypeChecker, TypingError
from ..small import _dispatchable, handle_op, hoist_let
from ..syntax import (
    Absurd,
    App,
    Computation,
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
    Term,
    TrueE,
    UnitE,
    Val,
    Var,
    With,
    Zero,
    alpha_eq,
    free_vars,
    fresh,
    subst,
)
from ..types import NAT, Arrow, Empty, UnitT


class NoRedex(Exception):
    """No rule of the chosen set applies anywhere in the term."""


@dataclass(frozen=True)
class RewriteRule:
    name: str
    kind: str
    fire: Callable
    typed: bool = False

    def __repr__(self):
        return f"<rule {self.name}>"


# ---------------------------------------------------------------- beta


def _if_true(t, ctx, env):
    if isinstance(t, If) and isinstance(t.cond, TrueE):
        return t.then


def _if_false(t, ctx, env):
    if isinstance(t, If) and isinstance(t.cond, FalseE):
        return t.orelse


def _match_zero(t, ctx, env):
    if isinstance(t, Match) and isinstance(t.scrutinee, Zero):
        return t.zero


def _match_succ(t, ctx, env):
    if isinstance(t, Match) and isinstance(t.scrutinee, Succ):
        return subst(t.succ, t.scrutinee.arg, t.x)


def _app_fun(t, ctx, env):
    if isinstance(t, App) and isinstance(t.fn, Fun):
        return subst(t.fn.body, t.arg, t.fn.var)


def _let_val(t, ctx, env):
    if isinstance(t, Let) and isinstance(t.bound, Val):
        return subst(t.body, t.bound.expr, t.x)


def _let_op(t, ctx, env):
    if isinstance(t, Let) and isinstance(t.bound, OpCall):
        return hoist_let(t.x, t.bound, t.body)


def _let_rec(t, ctx, env):
    if isinstance(t, LetRec):
        unfolded = Fun(t.x, t.dom, LetRec(t.f, t.x, t.dom, t.cod, t.fn_body, t.fn_body))
        return subst(t.body, unfolded, t.f)


def _handle_val(t, ctx, env):
    if isinstance(t, With) and isinstance(t.handler, Handler) and isinstance(t.body, Val):
        return subst(t.handler.body, t.body.expr, t.handler.x)


def _handle_op(t, ctx, env):
    if (
        isinstance(t, With)
        and _dispatchable(t.handler)
        and isinstance(t.body, OpCall)
        and isinstance(t.body.inst, Inst)
    ):
        return handle_op(t.handler, t.body, env.table)


# ---------------------------------------------------------------- eta


def _eta_unit(t, ctx, env):
    if isinstance(t, Var) and isinstance(lookup(ctx, t.name), UnitT):
        return UnitE()


def _eta_fun(t, ctx, env):
    if isinstance(t, Fun) and isinstance(t.body, App):
        fn, arg = t.body.fn, t.body.arg
        if arg == Var(t.var) and t.var not in free_vars(fn):
            return fn


def _eta_let(t, ctx, env):
    if isinstance(t, Let) and t.body == Val(Var(t.x)):
        return t.bound


def _eta_if(t, ctx, env):
    if isinstance(t, If):
        return anti_unify(t.then, t.orelse, TrueE(), FalseE(), t.cond)


def _eta_match(t, ctx, env):
    if isinstance(t, Match):
        return anti_unify(t.zero, t.succ, Zero(), Succ(Var(t.x)), t.scrutinee, bound=t.x)


def _eta_absurd(t, ctx, env):
    if isinstance(t, COMPUTATIONS) and not isinstance(t, Absurd):
        for name, ty in reversed(ctx):
            if isinstance(ty, Empty) and lookup(ctx, name) is ty:
                try:
                    dirty = env.checker.synth_comp(_known(ctx), t)
                except TypingError:
                    return None
                return Absurd(dirty, Var(name))


# ---------------------------------------------------------------- derived


def _handle_let(t, ctx, env):
    if isinstance(t, With) and isinstance(t.handler, Handler) and not t.handler.cases:
        return Let(t.handler.x, t.body, t.handler.body)


BETA = (
    RewriteRule("if-true", "beta", _if_true),
    RewriteRule("if-false", "beta", _if_false),
    RewriteRule("match-zero", "beta", _match_zero),
    RewriteRule("match-succ", "beta", _match_succ),
    RewriteRule("app-fun", "beta", _app_fun),
    RewriteRule("let-val", "beta", _let_val),
    RewriteRule("let-op", "beta", _let_op),
    RewriteRule("let-rec", "beta", _let_rec),
    RewriteRule("handle-val", "beta", _handle_val),
    RewriteRule("handle-op", "beta", _handle_op),
)
ETA_ABSURD = RewriteRule("eta-absurd", "eta", _eta_absurd, typed=True)
ETA = (
    RewriteRule("eta-unit", "eta", _eta_unit, typed=True),
    RewriteRule("eta-fun", "eta", _eta_fun),
    RewriteRule("eta-let", "eta", _eta_let),
    RewriteRule("eta-if", "eta", _eta_if),
    RewriteRule("eta-match", "eta", _eta_match),
)
DERIVED = (RewriteRule("handle-let", "derived", _handle_let),)

RULESETS = {
    "beta": BETA,
    "eta": ETA,
    "beta-eta": BETA + ETA + DERIVED,
}

COMPUTATIONS = (Val, OpCall, With, If, Absurd, App, Match, Let, LetRec)


# ---------------------------------------------------------------- anti-unification


def anti_unify(c1, c2, p1, p2, e, bound: Optional[str] = None):
    """Find ``c`` with ``c1 = c[p1/h]`` and ``c2 = c[p2/h]`` and return ``c[e/h]``.

    Returns None when no such template exists or when ``bound`` would still
    occur in it.
    """
    avoid = set(free_vars(c1) | free_vars(c2) | free_vars(e)) | _all_names(c1) | _all_names(c2)
    hole = fresh("hole", avoid)
    template = _generalize(c1, c2, p1, p2, Var(hole))
    if template is None:
        return None
    if bound is not None and bound in free_vars(template):
        return None
    if not (alpha_eq(subst(template, p1, hole), c1) and alpha_eq(subst(template, p2, hole), c2)):
        return None
    return subst(template, e, hole)


def _generalize(a, b, p1, p2, hole):
    if a == p1 and b == p2:
        return hole
    if type(a) is not type(b):
        return None
    if isinstance(a, tuple):
        if len(a) != len(b):
            return None
        parts = [_generalize(x, y, p1, p2, hole) for x, y in zip(a, b)]
        return None if any(p is None for p in parts) else tuple(parts)
    if dataclasses.is_dataclass(a) and isinstance(a, TERMS):
        changes = {}
        for f in dataclasses.fields(a):
            if f.name == "span":
                continue
            x, y = getattr(a, f.name), getattr(b, f.name)
            if isinstance(x, TERMS) or isinstance(x, tuple):
                g = _generalize(x, y, p1, p2, hole)
                if g is None:
                    return None
                changes[f.name] = g
            elif x != y:
                return None
        return dataclasses.replace(a, **changes)
    return a if a == b else None


def _all_names(t) -> set:
    out = set()
    if isinstance(t, tuple):
        for x in t:
            out |= _all_names(x)
    elif isinstance(t, TERMS):
        for f in dataclasses.fields(t):
            v = getattr(t, f.name)
            if isinstance(v, str):
                out.add(v)
            elif isinstance(v, (tuple,) + TERMS):
                out |= _all_names(v)
    return out


TERMS = COMPUTATIONS + (Var, TrueE, FalseE, Zero, Succ, UnitE, Fun, Inst, Handler, OpCase)


# ---------------------------------------------------------------- traversal


def lookup(ctx, name):
    for x, t in reversed(ctx):
        if x == name:
            return t
    return None


def _known(ctx) -> tuple:
    """The context with unknown and shadowed entries removed."""
    seen, out = set(), []
    for x, t in reversed(ctx):
        if x in seen:
            continue
        seen.add(x)
        if t is not None:
            out.append((x, t))
    return tuple(reversed(out))


@dataclass
class _Env:
    table: EffectTable
    checker: TypeChecker


def _children(t, ctx, env) -> list:
    """``(field, child, child_ctx)`` for each direct subterm, left to right."""
    sig = env.table.signature
    match t:
        case Succ(e):
            return [("arg", e, ctx)]
        case Fun(x, a, c):
            return [("body", c, ctx + ((x, a),))]
        case Handler(x, a, cv, cases, _):
            return [("body", cv, ctx + ((x, a),))] + [
                (("cases", i), k, ctx) for i, k in enumerate(cases)
            ]
        case OpCase(e, op, x, k, c):
            return [("inst", e, ctx), ("body", c, ctx + ((x, sig(op).param), (k, None)))]
        case Val(e):
            return [("expr", e, ctx)]
        case OpCall(e1, op, e2, y, c):
            return [("inst", e1, ctx), ("arg", e2, ctx), ("body", c, ctx + ((y, sig(op).result),))]
        case With(h, c):
            return [("handler", h, ctx), ("body", c, ctx)]
        case If(e, c1, c2):
            return [("cond", e, ctx), ("then", c1, ctx), ("orelse", c2, ctx)]
        case Absurd(_, e):
            return [("expr", e, ctx)]
        case App(e1, e2):
            return [("fn", e1, ctx), ("arg", e2, ctx)]
        case Match(e, c1, x, c2):
            return [("scrutinee", e, ctx), ("zero", c1, ctx), ("succ", c2, ctx + ((x, NAT),))]
        case Let(x, c1, c2):
            try:
                tx = env.checker.synth_comp(_known(ctx), c1).pure
            except TypingError:
                tx = None
            return [("bound", c1, ctx), ("body", c2, ctx + ((x, tx),))]
        case LetRec(f, x, a, cc, c1, c2):
            ft = Arrow(a, cc)
            return [("fn_body", c1, ctx + ((f, ft), (x, a))), ("body", c2, ctx + ((f, ft),))]
    return []


def _replace(t, field, new):
    if isinstance(field, tuple):
        name, i = field
        items = list(getattr(t, name))
        items[i] = new
        return dataclasses.replace(t, **{name: tuple(items)})
    return dataclasses.replace(t, **{field: new})


def redexes(t: Term, rules, table: EffectTable, ctx: tuple = ()) -> Iterator[tuple]:
    """Every ``(rule, path, result)`` in leftmost-outermost order.

    ``result`` is the whole term with that single rewrite performed.
    """
    env = _Env(table, TypeChecker(table))
    yield from _redexes(t, tuple(rules), tuple(ctx), env, ())


def _redexes(t, rules, ctx, env, path):
    for rule in rules:
        out = rule.fire(t, ctx, env)
        if out is not None:
            yield rule, path, out
    for field, child, cctx in _children(t, ctx, env):
        for rule, p, new in _redexes(child, rules, cctx, env, path + (field,)):
            yield rule, p, _replace(t, field, new)


def rewrite_step(c: Computation, table: EffectTable, rules=BETA, ctx: tuple = ()):
    """The first redex as ``(rule, result)``, or None."""
    for rule, _, out in redexes(c, rules, table, ctx):
        return rule, out
    return None


def rewrite_once(c: Computation, table: EffectTable, rules=BETA, ctx: tuple = ()) -> Computation:
    found = rewrite_step(c, table, rules, ctx)
    if found is None:
        raise NoRedex(c)
    return found[1]


@dataclass(frozen=True)
class Normalized:
    term: Computation
    steps: int
    exhausted: bool
    rules_used: tuple = ()


def normalize(c: Computation, table: EffectTable, rules=BETA, fuel: int = 10_000) -> Normalized:
    used = []
    for _ in range(fuel):
        found = rewrite_step(c, table, rules)
        if found is None:
            return Normalized(c, len(used), False, tuple(used))
        rule, c = found
        used.append(rule.name)
    exhausted = rewrite_step(c, table, rules) is not None
    return Normalized(c, len(used), exhausted, tuple(used))


def normalize_beta(c: Computation, table: EffectTable, fuel: int = 10_000) -> Normalized:
    """Apply beta rules until none applies or ``fuel`` rewrites have been made."""
    return normalize(c, table, BETA, fuel)
