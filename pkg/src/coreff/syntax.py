"""Abstract syntax of core Eff, substitution, alpha-equivalence and handler dispatch.

Terms are immutable dataclasses.  Every node carries an optional source span
which takes no part in equality, so terms built by hand compare equal to the
same terms produced by the parser.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .types import Dirty, Op, PureType


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int


def _span():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- effect table


@dataclass(frozen=True)
class Signature:
    param: PureType
    result: PureType


class EffectTable:
    """Declared effects, their operation signatures and their instances."""

    def __init__(
        self,
        effects: Mapping[str, Mapping[str, Signature]] | None = None,
        instances: Mapping[str, str] | None = None,
    ):
        self.effects: dict[str, dict[str, Signature]] = {
            e: dict(ops) for e, ops in (effects or {}).items()
        }
        self.instances: dict[str, str] = dict(instances or {})
        self._op_owner: dict[str, str] = {}
        for e, ops in self.effects.items():
            for op in ops:
                if op in self._op_owner:
                    raise ValueError(
                        f"operation {op} declared by both {self._op_owner[op]} and {e}"
                    )
                self._op_owner[op] = e
        for inst, e in self.instances.items():
            if e not in self.effects:
                raise ValueError(f"instance {inst} of undeclared effect {e}")

    def __eq__(self, other):
        return (
            isinstance(other, EffectTable)
            and self.effects == other.effects
            and self.instances == other.instances
        )

    def __repr__(self):
        return f"EffectTable({self.effects!r}, {self.instances!r})"

    def effect_of_op(self, op: str) -> str | None:
        return self._op_owner.get(op)

    def effect_of_instance(self, inst: str) -> str | None:
        return self.instances.get(inst)

    def signature(self, op: str) -> Signature:
        return self.effects[self._op_owner[op]][op]

    def instances_of(self, effect: str) -> list[str]:
        return sorted(i for i, e in self.instances.items() if e == effect)

    def all_ops(self) -> list[Op]:
        """Every well-formed operation ``(instance, op)``, sorted."""
        return sorted(
            (i, op) for i, e in self.instances.items() for op in self.effects[e]
        )


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TrueE:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FalseE:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Zero:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Succ:
    arg: Expression
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class UnitE:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Fun:
    var: str
    ann: PureType
    body: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Inst:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class OpCase:
    inst: Expression
    op: str
    x: str
    k: str
    body: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Handler:
    """``handler val x : A -> c_v | cases | nil_C``.

    The operation cases are kept as an ordered tuple; ``out`` is the
    annotation on the terminating ``nil`` (``None`` when omitted).
    """

    x: str
    ann: PureType
    body: Computation
    cases: tuple[OpCase, ...] = ()
    out: Optional[Dirty] = None
    span: Optional[SourceSpan] = _span()


Expression = Union[Var, TrueE, FalseE, Zero, Succ, UnitE, Fun, Inst, Handler]


# ---------------------------------------------------------------- computations


@dataclass(frozen=True)
class Val:
    expr: Expression
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class OpCall:
    inst: Expression
    op: str
    arg: Expression
    y: str
    body: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class With:
    handler: Expression
    body: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class If:
    cond: Expression
    then: Computation
    orelse: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Absurd:
    ann: Dirty
    expr: Expression
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class App:
    fn: Expression
    arg: Expression
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Match:
    scrutinee: Expression
    zero: Computation
    x: str
    succ: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Let:
    x: str
    bound: Computation
    body: Computation
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LetRec:
    f: str
    x: str
    dom: PureType
    cod: Dirty
    fn_body: Computation
    body: Computation
    span: Optional[SourceSpan] = _span()


Computation = Union[Val, OpCall, With, If, Absurd, App, Match, Let, LetRec]
Term = Union[Expression, Computation, OpCase]

EXPRESSION_TYPES = (Var, TrueE, FalseE, Zero, Succ, UnitE, Fun, Inst, Handler)
COMPUTATION_TYPES = (Val, OpCall, With, If, Absurd, App, Match, Let, LetRec)


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class ValueResult:
    value: Expression

    def to_computation(self) -> Computation:
        return Val(self.value)


@dataclass(frozen=True)
class OpCallResult:
    inst: str
    op: str
    arg: Expression
    y: str
    body: Computation

    def to_computation(self) -> Computation:
        return OpCall(Inst(self.inst), self.op, self.arg, self.y, self.body)


EvalResult = Union[ValueResult, OpCallResult]


class Timeout(Exception):
    """Evaluation ran out of fuel."""

    def __init__(self, fuel: int, last: Computation | None = None):
        super().__init__(f"fuel {fuel} exhausted")
        self.fuel = fuel
        self.last = last


class StuckError(Exception):
    def __init__(self, term, reason: str):
        super().__init__(reason)
        self.term = term
        self.reason = reason


def as_result(c: Computation) -> EvalResult | None:
    """Return the result a terminal computation denotes, or ``None``."""
    match c:
        case Val(e):
            return ValueResult(e)
        case OpCall(Inst(i), op, arg, y, body):
            return OpCallResult(i, op, arg, y, body)
    return None


# ---------------------------------------------------------------- helpers


def nat(n: int) -> Expression:
    e: Expression = Zero()
    for _ in range(n):
        e = Succ(e)
    return e


def nat_value(e: Expression) -> int | None:
    """The integer a closed numeral denotes, else ``None``."""
    n = 0
    while isinstance(e, Succ):
        e, n = e.arg, n + 1
    return n if isinstance(e, Zero) else None


def generic(inst: Expression, op: str, arg: Expression, y: str = "y") -> OpCall:
    """The generic effect ``inst#op arg``, i.e. ``inst#op(arg; y. val y)``."""
    return OpCall(inst, op, arg, y, Val(Var(y)))


_SUFFIX = re.compile(r"\d+$")


def fresh(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    stem = _SUFFIX.sub("", base) or "v"
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


# ---------------------------------------------------------------- free variables


def free_vars(t: Term) -> frozenset[str]:
    # Terms are immutable, so the answer is memoized on the node itself.
    try:
        return t.__dict__["_fv"]
    except KeyError:
        pass
    except AttributeError:
        raise TypeError(f"not a term: {t!r}") from None
    fv = _free_vars(t)
    object.__setattr__(t, "_fv", fv)
    return fv


def _free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(x):
            return frozenset({x})
        case TrueE() | FalseE() | Zero() | UnitE() | Inst():
            return frozenset()
        case Succ(e):
            return free_vars(e)
        case Fun(x, _, c):
            return free_vars(c) - {x}
        case Handler(x, _, cv, cases, _):
            out = free_vars(cv) - {x}
            for case in cases:
                out |= free_vars(case)
            return out
        case OpCase(e, _, x, k, c):
            return free_vars(e) | (free_vars(c) - {x, k})
        case Val(e):
            return free_vars(e)
        case OpCall(e1, _, e2, y, c):
            return free_vars(e1) | free_vars(e2) | (free_vars(c) - {y})
        case With(e, c):
            return free_vars(e) | free_vars(c)
        case If(e, c1, c2):
            return free_vars(e) | free_vars(c1) | free_vars(c2)
        case Absurd(_, e):
            return free_vars(e)
        case App(e1, e2):
            return free_vars(e1) | free_vars(e2)
        case Match(e, c1, x, c2):
            return free_vars(e) | free_vars(c1) | (free_vars(c2) - {x})
        case Let(x, c1, c2):
            return free_vars(c1) | (free_vars(c2) - {x})
        case LetRec(f, x, _, _, c1, c2):
            return (free_vars(c1) - {f, x}) | (free_vars(c2) - {f})
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- substitution


def subst(t: Term, replacement: Expression, var: str) -> Term:
    """Capture-avoiding ``t[replacement/var]``."""
    return subst_many(t, {var: replacement})


def subst_many(t: Term, sigma: Mapping[str, Expression]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    sigma = {x: e for x, e in sigma.items() if x in free_vars(t)}
    if not sigma:
        return t
    return _Subst(sigma).term(t)


class _Subst:
    def __init__(self, sigma: Mapping[str, Expression]):
        self.sigma = dict(sigma)

    def _under(self, binders: list[str], bodies: list[Term]):
        """Prepare to descend under ``binders``.

        Returns the (possibly renamed) binders and a substitution object for
        the bodies.  Binders that would capture a free variable of the range
        are renamed fresh.
        """
        sigma = {x: e for x, e in self.sigma.items() if x not in binders}
        live = frozenset().union(*(free_vars(b) for b in bodies))
        sigma = {x: e for x, e in sigma.items() if x in live}
        if not sigma:
            return binders, None
        range_fv = frozenset().union(*(free_vars(e) for e in sigma.values()))
        avoid = set(range_fv) | set(live) | set(sigma) | set(binders)
        new_binders = []
        for b in binders:
            if b in range_fv:
                nb = fresh(b, avoid)
                avoid.add(nb)
                sigma[b] = Var(nb)
                new_binders.append(nb)
            else:
                new_binders.append(b)
        return new_binders, _Subst(sigma)

    def term(self, t: Term) -> Term:
        match t:
            case Var(x):
                return self.sigma.get(x, t)
            case TrueE() | FalseE() | Zero() | UnitE() | Inst():
                return t
            case Succ(e):
                return Succ(self.term(e))
            case Fun(x, a, c):
                (x2,), s = self._under([x], [c])
                return Fun(x2, a, s.term(c) if s else c)
            case Handler(x, a, cv, cases, out):
                (x2,), s = self._under([x], [cv])
                return Handler(
                    x2, a, s.term(cv) if s else cv, tuple(self.term(k) for k in cases), out
                )
            case OpCase(e, op, x, k, c):
                (x2, k2), s = self._under([x, k], [c])
                return OpCase(self.term(e), op, x2, k2, s.term(c) if s else c)
            case Val(e):
                return Val(self.term(e))
            case OpCall(e1, op, e2, y, c):
                (y2,), s = self._under([y], [c])
                return OpCall(self.term(e1), op, self.term(e2), y2, s.term(c) if s else c)
            case With(e, c):
                return With(self.term(e), self.term(c))
            case If(e, c1, c2):
                return If(self.term(e), self.term(c1), self.term(c2))
            case Absurd(a, e):
                return Absurd(a, self.term(e))
            case App(e1, e2):
                return App(self.term(e1), self.term(e2))
            case Match(e, c1, x, c2):
                (x2,), s = self._under([x], [c2])
                return Match(self.term(e), self.term(c1), x2, s.term(c2) if s else c2)
            case Let(x, c1, c2):
                (x2,), s = self._under([x], [c2])
                return Let(x2, self.term(c1), s.term(c2) if s else c2)
            case LetRec(f, x, a, cc, c1, c2):
                sig1 = {k: v for k, v in self.sigma.items() if k not in (f, x)}
                sig2 = {k: v for k, v in self.sigma.items() if k != f}
                sig1 = {k: v for k, v in sig1.items() if k in free_vars(c1)}
                sig2 = {k: v for k, v in sig2.items() if k in free_vars(c2)}
                fv1 = frozenset().union(*(free_vars(e) for e in sig1.values()))
                fv2 = frozenset().union(*(free_vars(e) for e in sig2.values()))
                avoid = set(fv1 | fv2 | free_vars(c1) | free_vars(c2)) | set(self.sigma) | {f, x}
                f2 = fresh(f, avoid) if f in fv1 | fv2 else f
                avoid.add(f2)
                x2 = fresh(x, avoid) if x in fv1 else x
                if f2 != f:
                    sig1[f] = sig2[f] = Var(f2)
                if x2 != x:
                    sig1[x] = Var(x2)
                return LetRec(
                    f2,
                    x2,
                    a,
                    cc,
                    _Subst(sig1).term(c1) if sig1 else c1,
                    _Subst(sig2).term(c2) if sig2 else c2,
                )
        raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- alpha-equivalence


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Equality up to consistent renaming of bound variables."""
    return _alpha(t1, t2, {}, {}, 0)


def _alpha(a, b, env1: dict, env2: dict, depth: int) -> bool:
    def bind(names1, names2):
        e1, e2 = dict(env1), dict(env2)
        for i, (n1, n2) in enumerate(zip(names1, names2)):
            e1[n1] = depth + i
            e2[n2] = depth + i
        return e1, e2, depth + len(names1)

    match a, b:
        case Var(x), Var(y):
            bx, by = env1.get(x), env2.get(y)
            if bx is None and by is None:
                return x == y
            return bx == by
        case (TrueE(), TrueE()) | (FalseE(), FalseE()) | (Zero(), Zero()) | (
            UnitE(),
            UnitE(),
        ):
            return True
        case Inst(i), Inst(j):
            return i == j
        case Succ(e1), Succ(e2):
            return _alpha(e1, e2, env1, env2, depth)
        case Fun(x, a1, c1), Fun(y, a2, c2):
            if a1 != a2:
                return False
            e1, e2, d = bind([x], [y])
            return _alpha(c1, c2, e1, e2, d)
        case Handler(x, a1, cv1, cs1, o1), Handler(y, a2, cv2, cs2, o2):
            if a1 != a2 or o1 != o2 or len(cs1) != len(cs2):
                return False
            e1, e2, d = bind([x], [y])
            return _alpha(cv1, cv2, e1, e2, d) and all(
                _alpha(p, q, env1, env2, depth) for p, q in zip(cs1, cs2)
            )
        case OpCase(i1, op1, x1, k1, c1), OpCase(i2, op2, x2, k2, c2):
            if op1 != op2 or not _alpha(i1, i2, env1, env2, depth):
                return False
            e1, e2, d = bind([x1, k1], [x2, k2])
            return _alpha(c1, c2, e1, e2, d)
        case Val(e1), Val(e2):
            return _alpha(e1, e2, env1, env2, depth)
        case OpCall(i1, op1, a1, y1, c1), OpCall(i2, op2, a2, y2, c2):
            if op1 != op2:
                return False
            if not (_alpha(i1, i2, env1, env2, depth) and _alpha(a1, a2, env1, env2, depth)):
                return False
            e1, e2, d = bind([y1], [y2])
            return _alpha(c1, c2, e1, e2, d)
        case With(h1, c1), With(h2, c2):
            return _alpha(h1, h2, env1, env2, depth) and _alpha(c1, c2, env1, env2, depth)
        case If(e1, p1, q1), If(e2, p2, q2):
            return (
                _alpha(e1, e2, env1, env2, depth)
                and _alpha(p1, p2, env1, env2, depth)
                and _alpha(q1, q2, env1, env2, depth)
            )
        case Absurd(a1, e1), Absurd(a2, e2):
            return a1 == a2 and _alpha(e1, e2, env1, env2, depth)
        case App(f1, x1), App(f2, x2):
            return _alpha(f1, f2, env1, env2, depth) and _alpha(x1, x2, env1, env2, depth)
        case Match(s1, z1, x1, c1), Match(s2, z2, x2, c2):
            if not (_alpha(s1, s2, env1, env2, depth) and _alpha(z1, z2, env1, env2, depth)):
                return False
            e1, e2, d = bind([x1], [x2])
            return _alpha(c1, c2, e1, e2, d)
        case Let(x1, b1, c1), Let(x2, b2, c2):
            if not _alpha(b1, b2, env1, env2, depth):
                return False
            e1, e2, d = bind([x1], [x2])
            return _alpha(c1, c2, e1, e2, d)
        case LetRec(f1, x1, a1, cc1, b1, c1), LetRec(f2, x2, a2, cc2, b2, c2):
            if a1 != a2 or cc1 != cc2:
                return False
            e1, e2, d = bind([f1, x1], [f2, x2])
            if not _alpha(b1, b2, e1, e2, d):
                return False
            e1, e2, d = bind([f1], [f2])
            return _alpha(c1, c2, e1, e2, d)
    return False


def alpha_normalize(t: Term, prefix: str = "_") -> Term:
    """Rename every bound variable canonically (``_0``, ``_1``, ... in binding order)."""
    counter = itertools.count()
    return _Canon(counter, prefix).term(t, {})


class _Canon:
    def __init__(self, counter, prefix):
        self.counter = counter
        self.prefix = prefix

    def new(self):
        return f"{self.prefix}{next(self.counter)}"

    def term(self, t, env):
        match t:
            case Var(x):
                return Var(env.get(x, x))
            case TrueE() | FalseE() | Zero() | UnitE() | Inst():
                return t
            case Succ(e):
                return Succ(self.term(e, env))
            case Fun(x, a, c):
                n = self.new()
                return Fun(n, a, self.term(c, {**env, x: n}))
            case Handler(x, a, cv, cases, out):
                n = self.new()
                body = self.term(cv, {**env, x: n})
                return Handler(n, a, body, tuple(self.term(k, env) for k in cases), out)
            case OpCase(e, op, x, k, c):
                inst = self.term(e, env)
                nx, nk = self.new(), self.new()
                return OpCase(inst, op, nx, nk, self.term(c, {**env, x: nx, k: nk}))
            case Val(e):
                return Val(self.term(e, env))
            case OpCall(e1, op, e2, y, c):
                i, a = self.term(e1, env), self.term(e2, env)
                n = self.new()
                return OpCall(i, op, a, n, self.term(c, {**env, y: n}))
            case With(e, c):
                return With(self.term(e, env), self.term(c, env))
            case If(e, c1, c2):
                return If(self.term(e, env), self.term(c1, env), self.term(c2, env))
            case Absurd(a, e):
                return Absurd(a, self.term(e, env))
            case App(e1, e2):
                return App(self.term(e1, env), self.term(e2, env))
            case Match(e, c1, x, c2):
                s, z = self.term(e, env), self.term(c1, env)
                n = self.new()
                return Match(s, z, n, self.term(c2, {**env, x: n}))
            case Let(x, c1, c2):
                b = self.term(c1, env)
                n = self.new()
                return Let(n, b, self.term(c2, {**env, x: n}))
            case LetRec(f, x, a, cc, c1, c2):
                nf, nx = self.new(), self.new()
                b = self.term(c1, {**env, f: nf, x: nx})
                return LetRec(nf, nx, a, cc, b, self.term(c2, {**env, f: nf}))
        raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- dispatch


def ocs_dispatch(
    cases: Iterable[OpCase], inst: str, op: str, arg: Expression, kont: Expression
) -> Computation:
    """Run the first case matching ``inst#op``, or re-issue the call.

    A case matches when its instance expression is the literal ``inst`` and
    its symbol is ``op``.  With no match the result forwards the call as
    ``inst#op(arg; y. kont y)`` for a fresh ``y``.
    """
    for case in cases:
        if isinstance(case.inst, Inst) and case.inst.name == inst and case.op == op:
            return subst_many(case.body, {case.x: arg, case.k: kont})
    y = fresh("y", free_vars(kont))
    return OpCall(Inst(inst), op, arg, y, App(kont, Var(y)))
