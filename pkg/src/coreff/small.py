"""Small-step operational semantics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .syntax import (
    Absurd,
    App,
    Computation,
    EffectTable,
    EvalResult,
    Expression,
    FalseE,
    Fun,
    Handler,
    If,
    Inst,
    Let,
    LetRec,
    Match,
    OpCall,
    OpCallResult,
    StuckError,
    Succ,
    Timeout,
    TrueE,
    Val,
    ValueResult,
    Var,
    With,
    Zero,
    free_vars,
    fresh,
    ocs_dispatch,
    subst,
)


@dataclass(frozen=True)
class Stepped:
    next: Computation


@dataclass(frozen=True)
class IsValue:
    value: Expression


@dataclass(frozen=True)
class IsOpCall:
    inst: str
    op: str
    arg: Expression
    y: str
    body: Computation


@dataclass(frozen=True)
class Stuck:
    reason: str


@dataclass(frozen=True)
class OutOfFuel:
    fuel: int


StepOutcome = Union[Stepped, IsValue, IsOpCall, Stuck]


def hoist_let(x: str, call: OpCall, c2: Computation) -> OpCall:
    """``let x = i#op(e; y. c1) in c2`` becomes ``i#op(e; y. let x = c1 in c2)``."""
    y, c1 = call.y, call.body
    if y in free_vars(c2):
        y2 = fresh(y, free_vars(c1) | free_vars(c2) | {x})
        c1, y = subst(c1, Var(y2), y), y2
    return OpCall(call.inst, call.op, call.arg, y, Let(x, c1, c2))


def handle_op(h: Handler, call: OpCall, table: EffectTable) -> Computation:
    """Pass an operation call to ``h``'s cases with the re-wrapped continuation."""
    y, body = call.y, call.body
    if y in free_vars(h):
        y2 = fresh(y, free_vars(h) | free_vars(body))
        body, y = subst(body, Var(y2), y), y2
    kont = Fun(y, table.signature(call.op).result, With(h, body))
    return ocs_dispatch(h.cases, call.inst.name, call.op, call.arg, kont)


def _dispatchable(h) -> bool:
    return isinstance(h, Handler) and all(isinstance(k.inst, Inst) for k in h.cases)


def step(c: Computation, table: EffectTable) -> StepOutcome:
    """Take one step of the reduction relation, or report why none applies."""
    match c:
        case Val(e):
            return IsValue(e)
        case OpCall(Inst(i), op, arg, y, body):
            return IsOpCall(i, op, arg, y, body)
        case OpCall():
            return Stuck("operation called on a non-instance")
        case If(TrueE(), c1, _):
            return Stepped(c1)
        case If(FalseE(), _, c2):
            return Stepped(c2)
        case If():
            return Stuck("condition is not a boolean literal")
        case Match(Zero(), c1, _, _):
            return Stepped(c1)
        case Match(Succ(e), _, x, c2):
            return Stepped(subst(c2, e, x))
        case Match():
            return Stuck("scrutinee is not a numeral")
        case App(Fun(x, _, body), e):
            return Stepped(subst(body, e, x))
        case App():
            return Stuck("applying a non-function")
        case Let(x, Val(e), c2):
            return Stepped(subst(c2, e, x))
        case Let(x, OpCall(Inst()) as call, c2):
            return Stepped(hoist_let(x, call, c2))
        case Let(x, c1, c2):
            inner = step(c1, table)
            if isinstance(inner, Stepped):
                return Stepped(Let(x, inner.next, c2))
            return inner if isinstance(inner, Stuck) else Stuck("let-bound computation is stuck")
        case LetRec(f, x, dom, cod, c1, c2):
            unfolded = Fun(x, dom, LetRec(f, x, dom, cod, c1, c1))
            return Stepped(subst(c2, unfolded, f))
        case With(h, Val(e)):
            if not isinstance(h, Handler):
                return Stuck("handling with a non-handler")
            return Stepped(subst(h.body, e, h.x))
        case With(h, OpCall(Inst()) as call):
            if not _dispatchable(h):
                return Stuck("handling with a non-handler")
            return Stepped(handle_op(h, call, table))
        case With(h, body):
            inner = step(body, table)
            if isinstance(inner, Stepped):
                return Stepped(With(h, inner.next))
            return inner if isinstance(inner, Stuck) else Stuck("handled computation is stuck")
        case Absurd():
            return Stuck("absurd has no reduction")
    return Stuck(f"not a computation: {c!r}")


def run_small(c: Computation, table: EffectTable, fuel: int = 10_000) -> EvalResult:
    """Iterate ``step`` at most ``fuel`` times."""
    for _ in range(fuel + 1):
        out = step(c, table)
        match out:
            case Stepped(nxt):
                c = nxt
            case IsValue(e):
                return ValueResult(e)
            case IsOpCall(i, op, arg, y, body):
                return OpCallResult(i, op, arg, y, body)
            case Stuck(reason):
                raise StuckError(c, reason)
    raise Timeout(fuel, c)


@dataclass
class Trace:
    steps: list[Computation] = field(default_factory=list)
    outcome: Union[StepOutcome, OutOfFuel, None] = None

    @property
    def steps_used(self) -> int:
        return len(self.steps) - 1

    def result(self) -> EvalResult | None:
        match self.outcome:
            case IsValue(e):
                return ValueResult(e)
            case IsOpCall(i, op, arg, y, body):
                return OpCallResult(i, op, arg, y, body)
        return None


def trace(c: Computation, table: EffectTable, fuel: int = 10_000) -> Trace:
    tr = Trace([c])
    for _ in range(fuel + 1):
        out = step(c, table)
        if not isinstance(out, Stepped):
            tr.outcome = out
            return tr
        if tr.steps_used == fuel:
            break
        c = out.next
        tr.steps.append(c)
    tr.outcome = OutOfFuel(fuel)
    return tr


def render_trace(tr: Trace) -> str:
    """One computation per block, blocks separated by ``~>`` lines."""
    from .surface import show_comp

    text = "\n~>\n".join(show_comp(c) for c in tr.steps)
    match tr.outcome:
        case OutOfFuel():
            text += "\nTIMEOUT"
        case Stuck(reason):
            text += f"\nSTUCK: {reason}"
    return text + "\n"
