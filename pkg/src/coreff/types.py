"""Pure, dirty and skeletal types, with structural subtyping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

Op = tuple[str, str]  # (instance, operation symbol)


@dataclass(frozen=True)
class Bool:
    pass


@dataclass(frozen=True)
class Nat:
    pass


@dataclass(frozen=True)
class UnitT:
    pass


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Arrow:
    dom: PureType
    cod: Dirty


@dataclass(frozen=True)
class EffT:
    effect: str
    region: frozenset[str]


@dataclass(frozen=True)
class HandlerT:
    ingoing: Dirty
    outgoing: Dirty


@dataclass(frozen=True)
class Dirty:
    pure: PureType
    dirt: frozenset[Op] = frozenset()


PureType = Union[Bool, Nat, UnitT, Empty, Arrow, EffT, HandlerT]

BOOL, NAT, UNIT, EMPTY = Bool(), Nat(), UnitT(), Empty()
GROUND = (BOOL, NAT, UNIT, EMPTY)


# Skeletal types reuse the ground singletons above.


@dataclass(frozen=True)
class SkArrow:
    dom: SkelType
    cod: SkelType


@dataclass(frozen=True)
class SkEffect:
    effect: str


@dataclass(frozen=True)
class SkHandler:
    ingoing: SkelType
    outgoing: SkelType


SkelType = Union[Bool, Nat, UnitT, Empty, SkArrow, SkEffect, SkHandler]


def eff(effect: str, *instances: str) -> EffT:
    return EffT(effect, frozenset(instances))


def dirty(pure: PureType, *ops: Op) -> Dirty:
    return Dirty(pure, frozenset(ops))


def is_ground(t: PureType) -> bool:
    return isinstance(t, (Bool, Nat, UnitT, Empty))


def subtype_pure(a: PureType, b: PureType) -> bool:
    match a, b:
        case Arrow(d1, c1), Arrow(d2, c2):
            return subtype_pure(d2, d1) and subtype_dirty(c1, c2)
        case EffT(e1, r1), EffT(e2, r2):
            return e1 == e2 and r1 <= r2
        case HandlerT(i1, o1), HandlerT(i2, o2):
            return subtype_dirty(i2, i1) and subtype_dirty(o1, o2)
    return is_ground(a) and a == b


def subtype_dirty(c: Dirty, d: Dirty) -> bool:
    return c.dirt <= d.dirt and subtype_pure(c.pure, d.pure)


def skeleton(a: PureType) -> SkelType:
    match a:
        case Arrow(dom, cod):
            return SkArrow(skeleton(dom), skeleton_dirty(cod))
        case EffT(e, _):
            return SkEffect(e)
        case HandlerT(i, o):
            return SkHandler(skeleton_dirty(i), skeleton_dirty(o))
    return a


def skeleton_dirty(c: Dirty) -> SkelType:
    return skeleton(c.pure)


class NoBound(Exception):
    """Two types with different skeletons have no join or meet."""

    def __init__(self, left, right):
        super().__init__(f"no common bound for {left!r} and {right!r}")
        self.left = left
        self.right = right


def join_pure(a: PureType, b: PureType) -> PureType:
    """Least upper bound of two pure types with the same skeleton."""
    match a, b:
        case Arrow(d1, c1), Arrow(d2, c2):
            return Arrow(meet_pure(d1, d2), join_dirty(c1, c2))
        case EffT(e1, r1), EffT(e2, r2) if e1 == e2:
            return EffT(e1, r1 | r2)
        case HandlerT(i1, o1), HandlerT(i2, o2):
            return HandlerT(meet_dirty(i1, i2), join_dirty(o1, o2))
    if is_ground(a) and a == b:
        return a
    raise NoBound(a, b)


def meet_pure(a: PureType, b: PureType) -> PureType:
    match a, b:
        case Arrow(d1, c1), Arrow(d2, c2):
            return Arrow(join_pure(d1, d2), meet_dirty(c1, c2))
        case EffT(e1, r1), EffT(e2, r2) if e1 == e2:
            return EffT(e1, r1 & r2)
        case HandlerT(i1, o1), HandlerT(i2, o2):
            return HandlerT(join_dirty(i1, i2), meet_dirty(o1, o2))
    if is_ground(a) and a == b:
        return a
    raise NoBound(a, b)


def join_dirty(c: Dirty, d: Dirty) -> Dirty:
    return Dirty(join_pure(c.pure, d.pure), c.dirt | d.dirt)


def meet_dirty(c: Dirty, d: Dirty) -> Dirty:
    return Dirty(meet_pure(c.pure, d.pure), c.dirt & d.dirt)


def add_dirt(c: Dirty, ops) -> Dirty:
    return Dirty(c.pure, c.dirt | frozenset(ops))
