"""Instantiated state laws checked with the equivalence oracle.

Each suite turns a schematic law into finitely many closed pairs by drawing
its meta-variables from small enumerations, then asks ``op_equiv`` about
every pair.  A suite passes when no pair is distinguished.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from ..checker import synth_comp
from ..syntax import (
    Computation,
    Inst,
    Let,
    OpCall,
    UnitE,
    Val,
    Var,
    With,
    nat,
    subst,
)
from ..types import NAT, UNIT
from .enumerate import CORPUS_TABLE, SHAPES, Enumerator, Shape, corpus, enumerate_computations
from .oracle import Distinguished, Equivalent, Inconclusive, op_equiv
from .state import mk_H

STATE_VALUES = (0, 1, 2)
I1, I2 = Inst("r1"), Inst("r2")


@dataclass(frozen=True)
class LawInstance:
    law: str
    index: int
    lhs: Computation
    rhs: Computation


@dataclass
class LawReport:
    suite: str
    rows: list = field(default_factory=list)

    @property
    def total(self):
        return len(self.rows)

    def count(self, kind):
        return sum(isinstance(v, kind) for _, v in self.rows)

    @property
    def passed(self) -> bool:
        return self.count(Distinguished) == 0

    def summary(self) -> str:
        return (
            f"total={self.total} eq={self.count(Equivalent)} "
            f"dist={self.count(Distinguished)} inc={self.count(Inconclusive)}"
        )

    def lines(self) -> list[str]:
        out = [f"{inst.law} {inst.index} {_tag(v)}" for inst, v in self.rows]
        return out + [self.summary()]

    def to_json(self) -> str:
        from ..surface import show_comp

        return json.dumps(
            {
                "suite": self.suite,
                "instances": [
                    {
                        "law": inst.law,
                        "index": inst.index,
                        "verdict": _tag(v),
                        "detail": str(v),
                        "lhs": show_comp(inst.lhs),
                        "rhs": show_comp(inst.rhs),
                    }
                    for inst, v in self.rows
                ],
                "total": self.total,
                "eq": self.count(Equivalent),
                "dist": self.count(Distinguished),
                "inc": self.count(Inconclusive),
            },
            indent=2,
            ensure_ascii=False,
        )


def _tag(v) -> str:
    match v:
        case Equivalent():
            return "equivalent"
        case Distinguished():
            return "distinguished"
    return "inconclusive"


# ---------------------------------------------------------------- meta-variables


def _values():
    return [nat(n) for n in STATE_VALUES]


def bodies(
    size: int, insts=(I1,), env: tuple = (), constructs=("val", "op", "let"), nat_max: int = 2
) -> list:
    """Bodies over lookup/update on ``insts`` with the free variables of ``env``."""
    ops = tuple((i.name, op) for i in insts for op in ("lookup", "update"))
    shape = Shape("law-body", frozenset(constructs), ops, nat_max=nat_max, types=(NAT, UNIT))
    return enumerate_computations(shape, size, CORPUS_TABLE, env)


def _H(c, e, ref, ty):
    return mk_H(c, e, ref, CORPUS_TABLE, ty)


def _closed_type(c):
    return synth_comp(CORPUS_TABLE, (), c).pure


def _lookup(ref, y, c):
    return OpCall(ref, "lookup", UnitE(), y, c)


def _update(ref, e, c, y="_"):
    return OpCall(ref, "update", e, y, c)


def _single(lhs_body, rhs_body, e):
    """Both sides under one state handler for r1 started at ``e``."""
    ty = _closed_type(lhs_body)
    return _H(lhs_body, e, I1, ty), _H(rhs_body, e, I1, ty)


def _double(lhs_body, rhs_body, e1, e2, nesting):
    """Both sides under state handlers for r1 and r2, nested as ``nesting``."""
    ty = _closed_type(lhs_body)
    outer, inner = ((I1, e1), (I2, e2)) if nesting == "12" else ((I2, e2), (I1, e1))

    def wrap(c):
        return _H(_H(c, inner[1], inner[0], ty), outer[1], outer[0], ty)

    return wrap(lhs_body), wrap(rhs_body)


# ---------------------------------------------------------------- suites


def basics(size: int = 2, nesting: str = "12"):
    vs = _values()
    for c in bodies(size, env=(("y", NAT),)):
        ty = _closed_type(_lookup(I1, "y", c))
        for e in vs:
            yield "H-lookup", _H(_lookup(I1, "y", c), e, I1, ty), _H(subst(c, e, "y"), e, I1, ty)
    for c in bodies(size):
        ty = _closed_type(c)
        for e in vs:
            for e2 in vs:
                yield "H-update", _H(_update(I1, e2, c), e, I1, ty), _H(c, e2, I1, ty)
    for e in vs:
        for e2 in vs:
            yield "H-val", _H(Val(e2), e, I1, NAT), Val(e2)


def seven_equations(size: int = 2, nesting: str = "12"):
    vs = _values()
    # single-instance laws
    for c in bodies(size):
        for e in vs:
            yield ("lookup-update", *_single(_lookup(I1, "y", _update(I1, Var("y"), c)), c, e))
    for c in bodies(size, env=(("y", NAT), ("z", NAT))):
        for e in vs:
            lhs = _lookup(I1, "y", _lookup(I1, "z", c))
            rhs = _lookup(I1, "y", subst(c, Var("y"), "z"))
            yield ("lookup-lookup", *_single(lhs, rhs, e))
    for c in bodies(size):
        for e in vs:
            for u in vs:
                for u2 in vs:
                    lhs = _update(I1, u, _update(I1, u2, c))
                    yield ("update-update", *_single(lhs, _update(I1, u2, c), e))
    for c in bodies(size, env=(("y", NAT),)):
        for e in vs:
            for u in vs:
                lhs = _update(I1, u, _lookup(I1, "y", c))
                rhs = _update(I1, u, subst(c, u, "y"))
                yield ("update-lookup", *_single(lhs, rhs, e))
    # two-instance commutations
    pairs = [(e1, e2) for e1 in vs for e2 in vs]
    for c in bodies(size, (I1, I2), env=(("y1", NAT), ("y2", NAT))):
        for e1, e2 in pairs:
            lhs = _lookup(I1, "y1", _lookup(I2, "y2", c))
            rhs = _lookup(I2, "y2", _lookup(I1, "y1", c))
            yield ("lookup1-lookup2", *_double(lhs, rhs, e1, e2, nesting))
    for c in bodies(size, (I1, I2)):
        for e1, e2 in pairs:
            for u1 in vs:
                for u2 in vs:
                    lhs = _update(I1, u1, _update(I2, u2, c))
                    rhs = _update(I2, u2, _update(I1, u1, c))
                    yield ("update1-update2", *_double(lhs, rhs, e1, e2, nesting))
    for c in bodies(size, (I1, I2), env=(("y2", NAT),)):
        for e1, e2 in pairs:
            for u1 in vs:
                lhs = _update(I1, u1, _lookup(I2, "y2", c))
                rhs = _lookup(I2, "y2", _update(I1, u1, c))
                yield ("update1-lookup2", *_double(lhs, rhs, e1, e2, nesting))


def eta_let(size: int = 3, nesting: str = "12"):
    for c in corpus(size):
        x = "x"
        yield "eta-let", Let(x, c, Val(Var(x))), c


COMMUTE_STATES = ((2, 1),)


def commutativity(size: int = 3, nesting: str = "12", states=COMMUTE_STATES):
    """``let x1 = c1 in let x2 = c2 in c`` against the swapped order.

    ``c1`` and ``c2`` are chains of val and operation calls on one instance
    each; the initial states are distinct from every numeral the bodies write.
    """
    left = bodies(size, (I1,), constructs=("val", "op"), nat_max=1)
    right = bodies(size, (I2,), constructs=("val", "op"), nat_max=1)
    for c1 in left:
        for c2 in right:
            for c in (Val(Var("x1")), Val(Var("x2"))):
                lhs = Let("x1", c1, Let("x2", c2, c))
                rhs = Let("x2", c2, Let("x1", c1, c))
                for e1, e2 in states:
                    yield ("commutativity", *_double(lhs, rhs, nat(e1), nat(e2), nesting))


def hoist(size: int = 2, nesting: str = "12"):
    """An inner handler with no lookup case lets the lookup through."""
    vs = _values()
    for c in bodies(size, env=(("y", NAT),)):
        ty = _closed_type(_lookup(I1, "y", c))
        en = Enumerator(SHAPES["two-refs"], CORPUS_TABLE)
        for h in en.handler_menu(ty):
            if any(k.op == "lookup" and k.inst == I1 for k in h.cases):
                continue
            for e in vs:
                lhs = _H(With(h, _lookup(I1, "y", c)), e, I1, ty)
                rhs = _H(With(h, subst(c, e, "y")), e, I1, ty)
                yield "hoist", lhs, rhs


SUITES: dict[str, Callable] = {
    "basics": basics,
    "seven-equations": seven_equations,
    "eta-let": eta_let,
    "commutativity": commutativity,
    "hoist": hoist,
}
DEFAULT_SIZES = {"basics": 2, "seven-equations": 2, "eta-let": 3, "commutativity": 3, "hoist": 2}


def law_instances(which: str, size: int | None = None, nesting: str = "12") -> list[LawInstance]:
    if which not in SUITES:
        raise ValueError(f"unknown law suite {which!r}; choose from {', '.join(SUITES)}")
    size = DEFAULT_SIZES[which] if size is None else size
    out = []
    for i, (law, lhs, rhs) in enumerate(SUITES[which](size, nesting)):
        out.append(LawInstance(law, i, lhs, rhs))
    return out


def law_suite(
    which: str,
    size: int | None = None,
    probe_depth: int = 3,
    fuel: int = 10_000,
    nesting: str = "12",
) -> LawReport:
    report = LawReport(which)
    for inst in law_instances(which, size, nesting):
        verdict = op_equiv(inst.lhs, inst.rhs, CORPUS_TABLE, probe_depth, fuel)
        report.rows.append((inst, verdict))
    return report
