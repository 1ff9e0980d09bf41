"""Deterministic enumeration of small well-typed computations.

Size counts computation nodes: ``val e`` has size 1, an operation call or a
``let`` adds one to the sizes of its sub-computations, and so on.
Expressions are drawn from a finite pool of atoms (numerals up to
``nat_max``, booleans, unit and in-scope variables of the right type).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from ..checker import TypeChecker, TypingError
from ..syntax import (
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
    Signature,
    TrueE,
    UnitE,
    Val,
    Var,
    With,
    nat,
)
from ..types import BOOL, NAT, UNIT, Arrow, Dirty, Nat, Bool, UnitT, is_ground
from .state import mk_H

CONSTRUCTS = frozenset({"val", "op", "let", "if", "match", "app", "letrec", "handle", "state"})


def ref_table(*instances: str, state=NAT) -> EffectTable:
    """A table with one ``ref`` effect over ``state`` and the given instances."""
    return EffectTable(
        {"ref": {"lookup": Signature(UNIT, state), "update": Signature(state, UNIT)}},
        {i: "ref" for i in instances},
    )


CORPUS_TABLE = ref_table("r1", "r2")


@dataclass(frozen=True)
class Shape:
    name: str
    constructs: frozenset
    ops: tuple = ()
    nat_max: int = 1
    types: tuple = (NAT, BOOL, UNIT)

    def __post_init__(self):
        unknown = set(self.constructs) - CONSTRUCTS
        if unknown:
            raise ValueError(f"unknown constructs {sorted(unknown)}")


def _ops(*insts):
    return tuple((i, op) for i in insts for op in ("lookup", "update"))


SHAPES = {
    "pure": Shape("pure", frozenset({"val", "let", "if", "match", "app", "letrec"})),
    "state": Shape("state", frozenset({"val", "op", "let"}), _ops("r1")),
    "two-refs": Shape("two-refs", frozenset({"val", "op", "let"}), _ops("r1", "r2"), types=(NAT, UNIT)),
    "handlers": Shape("handlers", frozenset({"val", "op", "let", "handle", "state"}), _ops("r1")),
    "control": Shape("control", frozenset({"val", "op", "if", "match", "letrec"}), _ops("r1")),
}


class Enumerator:
    def __init__(self, shape: Shape, table: EffectTable = CORPUS_TABLE):
        self.shape = shape
        self.table = table
        self.has = shape.constructs.__contains__
        self._cache: dict = {}

    # -- atoms

    def literals(self, ty) -> list:
        match ty:
            case Nat():
                return [nat(n) for n in range(self.shape.nat_max + 1)]
            case Bool():
                return [TrueE(), FalseE()]
            case UnitT():
                return [UnitE()]
        return []

    def atoms(self, env, ty) -> list:
        out = list(self.literals(ty))
        seen = set()
        for name, t in reversed(env):
            if name in seen:
                continue
            seen.add(name)
            if t == ty:
                out.append(Var(name))
        return out

    # -- computations

    def exactly(self, n: int, env: tuple, ty) -> list:
        key = (n, env, ty)
        if key not in self._cache:
            self._cache[key] = list(self._gen(n, env, ty))
        return self._cache[key]

    def _gen(self, n, env, ty) -> Iterator:
        depth = len(env)
        if n == 1:
            if self.has("val"):
                for a in self.atoms(env, ty):
                    yield Val(a)
            for name, t in reversed(env):
                if isinstance(t, Arrow) and t.cod.pure == ty and is_ground(t.dom):
                    for a in self.atoms(env, t.dom):
                        yield App(Var(name), a)
            return
        if self.has("op"):
            for inst, op in self.shape.ops:
                sig = self.table.signature(op)
                y = f"y{depth}"
                for a in self.atoms(env, sig.param):
                    for body in self.exactly(n - 1, env + ((y, sig.result),), ty):
                        yield OpCall(Inst(inst), op, a, y, body)
        if self.has("let"):
            x = f"x{depth}"
            for n1 in range(1, n - 1):
                for t1 in self.shape.types:
                    for c1 in self.exactly(n1, env, t1):
                        for c2 in self.exactly(n - 1 - n1, env + ((x, t1),), ty):
                            yield Let(x, c1, c2)
        if self.has("if"):
            for a in self.atoms(env, BOOL):
                for n1 in range(1, n - 1):
                    for c1 in self.exactly(n1, env, ty):
                        for c2 in self.exactly(n - 1 - n1, env, ty):
                            yield If(a, c1, c2)
        if self.has("match"):
            x = f"n{depth}"
            for a in self.atoms(env, NAT):
                for n1 in range(1, n - 1):
                    for c1 in self.exactly(n1, env, ty):
                        for c2 in self.exactly(n - 1 - n1, env + ((x, NAT),), ty):
                            yield Match(a, c1, x, c2)
        if self.has("app"):
            x = f"a{depth}"
            for t in self.shape.types:
                for a in self.literals(t):
                    for body in self.exactly(n - 1, env + ((x, t),), ty):
                        yield App(Fun(x, t, body), a)
        if self.has("letrec") and n >= 3:
            f, x = f"f{depth}", f"z{depth}"
            dirt = frozenset(self.shape.ops)
            for t in (NAT,):
                ft = Arrow(t, Dirty(ty, dirt))
                for c1 in self.exactly(n - 2, env + ((f, ft), (x, t)), ty):
                    for a in self.literals(t):
                        yield LetRec(f, x, t, Dirty(ty, dirt), c1, App(Var(f), a))
        if self.has("handle"):
            for h in self.handler_menu(ty):
                for body in self.exactly(n - 1, env, ty):
                    yield With(h, body)
        if self.has("state"):
            insts = sorted({i for i, _ in self.shape.ops})
            for inst in insts:
                for body in self.exactly(n - 1, env, ty):
                    for e in self.literals(self.table.signature("lookup").result):
                        yield mk_H(body, e, Inst(inst), self.table, ty)

    def handler_menu(self, ty) -> list:
        """A few handlers whose value case accepts ``ty``."""
        menu = [Handler("v", ty, Val(Var("v")))]
        insts = sorted({i for i, _ in self.shape.ops})
        for inst in insts:
            ops = [op for i, op in self.shape.ops if i == inst]
            answer = []
            for op in ops:
                res = self.table.signature(op).result
                lits = self.literals(res)
                if lits:
                    answer.append(OpCase(Inst(inst), op, "p", "k", App(Var("k"), lits[-1])))
            if answer:
                menu.append(Handler("v", ty, Val(Var("v")), tuple(answer)))
            lits = self.literals(ty)
            if ops and lits:
                abort = OpCase(Inst(inst), ops[-1], "p", "k", Val(lits[0]))
                menu.append(Handler("v", ty, Val(Var("v")), (abort,)))
        return menu


def enumerate_computations(
    shape: Shape, size: int, table: EffectTable = CORPUS_TABLE, env: tuple = (), types=None
) -> list:
    """All well-typed computations of ``shape`` up to ``size``, in a fixed order."""
    en = Enumerator(shape, table)
    tc = TypeChecker(table)
    out = []
    for n in range(1, size + 1):
        for ty in types or shape.types:
            for c in en.exactly(n, tuple(env), ty):
                try:
                    tc.synth_comp(tuple(env), c)
                except TypingError:
                    continue
                out.append(c)
    return out


@lru_cache(maxsize=None)
def corpus(size: int = 4, shapes: tuple = tuple(SHAPES)) -> tuple:
    """The union of the named shapes' enumerations, without duplicates."""
    seen, out = set(), []
    for name in shapes:
        for c in enumerate_computations(SHAPES[name], size):
            if c not in seen:
                seen.add(c)
                out.append(c)
    return tuple(out)
