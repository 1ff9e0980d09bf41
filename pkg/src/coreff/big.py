"""Big-step evaluation and its agreement with the small-step semantics.

The evaluator keeps the pending ``let`` bodies and enclosing handlers on an
explicit stack, so deep ``let`` chains and long handler loops do not consume
Python stack frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .small import _dispatchable, handle_op, hoist_let, run_small
from .syntax import (
    App,
    Computation,
    EffectTable,
    EvalResult,
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
    With,
    Zero,
    alpha_eq,
    subst,
)


def eval_big(c: Computation, table: EffectTable, fuel: int = 10_000) -> EvalResult:
    """Evaluate ``c`` to a result; ``fuel`` bounds the number of rule applications."""
    frames: list[tuple] = []
    budget = fuel

    def tick():
        nonlocal budget
        if budget <= 0:
            raise Timeout(fuel, c)
        budget -= 1

    while True:
        tick()
        match c:
            case Val(e):
                result: EvalResult = ValueResult(e)
            case OpCall(Inst(i), op, arg, y, body):
                result = OpCallResult(i, op, arg, y, body)
            case If(TrueE(), c1, _):
                c = c1
                continue
            case If(FalseE(), _, c2):
                c = c2
                continue
            case Match(Zero(), c1, _, _):
                c = c1
                continue
            case Match(Succ(e), _, x, c2):
                c = subst(c2, e, x)
                continue
            case App(Fun(x, _, body), e):
                c = subst(body, e, x)
                continue
            case LetRec(f, x, dom, cod, c1, c2):
                c = subst(c2, Fun(x, dom, LetRec(f, x, dom, cod, c1, c1)), f)
                continue
            case Let(x, c1, c2):
                frames.append(("let", x, c2))
                c = c1
                continue
            case With(h, body):
                frames.append(("handle", h))
                c = body
                continue
            case _:
                raise StuckError(c, f"no big-step rule applies to {type(c).__name__}")

        # Propagate the result outwards until a frame produces a new computation.
        while frames:
            frame = frames.pop()
            tick()
            if frame[0] == "let":
                _, x, c2 = frame
                if isinstance(result, ValueResult):
                    c = subst(c2, result.value, x)
                    break
                call = hoist_let(x, result.to_computation(), c2)
                result = OpCallResult(result.inst, call.op, call.arg, call.y, call.body)
            else:
                h = frame[1]
                if isinstance(result, ValueResult):
                    if not isinstance(h, Handler):
                        raise StuckError(With(h, result.to_computation()), "handling with a non-handler")
                    c = subst(h.body, result.value, h.x)
                    break
                if not _dispatchable(h):
                    raise StuckError(With(h, result.to_computation()), "handling with a non-handler")
                c = handle_op(h, result.to_computation(), table)
                break
        else:
            return result


@dataclass(frozen=True)
class Agree:
    outcome: str


@dataclass(frozen=True)
class Disagree:
    small: object
    big: object

    def __str__(self):
        return f"small-step gave {self.small!r}, big-step gave {self.big!r}"


def _outcome(run, c, table, fuel):
    try:
        return run(c, table, fuel)
    except Timeout:
        return "timeout"
    except StuckError as err:
        return ("stuck", err.reason)


def check_agreement(c: Computation, table: EffectTable, fuel: int = 10_000) -> Union[Agree, Disagree]:
    """Run both semantics with the same fuel and compare their outcomes."""
    small = _outcome(run_small, c, table, fuel)
    big = _outcome(eval_big, c, table, fuel)
    if small == "timeout" and big == "timeout":
        return Agree("timeout")
    if isinstance(small, tuple) and isinstance(big, tuple):
        return Agree("stuck")
    if isinstance(small, (ValueResult, OpCallResult)) and type(small) is type(big):
        if alpha_eq(small.to_computation(), big.to_computation()):
            return Agree("result")
    return Disagree(small, big)
