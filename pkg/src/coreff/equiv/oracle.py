"""A bounded observational-equivalence oracle.

Two closed computations are compared by running them with the big-step
evaluator.  Values are compared when they are ground.  Operation calls must
agree on instance, operation and argument; their continuations are then
probed with every ground value of the result type (numerals up to the probe
depth).  Running out of fuel, probes or nesting gives an inconclusive verdict
rather than a guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..big import eval_big
from ..syntax import (
    Computation,
    EffectTable,
    FalseE,
    Inst,
    StuckError,
    Succ,
    Timeout,
    TrueE,
    UnitE,
    ValueResult,
    Zero,
    alpha_eq,
    nat,
    subst,
)
from ..types import Bool, Empty, Nat, UnitT


@dataclass(frozen=True)
class Equivalent:
    def __str__(self):
        return "equivalent"


@dataclass(frozen=True)
class Distinguished:
    probe: str
    left: str
    right: str

    def __str__(self):
        return f"distinguished after [{self.probe}]: {self.left} vs {self.right}"


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def __str__(self):
        return f"inconclusive: {self.reason}"


Verdict = Union[Equivalent, Distinguished, Inconclusive]


def _ground(e) -> bool:
    match e:
        case TrueE() | FalseE() | UnitE() | Zero() | Inst():
            return True
        case Succ(a):
            return _ground(a)
    return False


def probes(ty, depth: int):
    """Ground values of ``ty`` used to drive a continuation, or None if ``ty`` is not ground."""
    match ty:
        case Nat():
            return [nat(n) for n in range(depth + 1)]
        case Bool():
            return [TrueE(), FalseE()]
        case UnitT():
            return [UnitE()]
        case Empty():
            return []
    return None


class _Stop(Exception):
    def __init__(self, verdict):
        self.verdict = verdict


def op_equiv(
    c1: Computation,
    c2: Computation,
    table: EffectTable,
    probe_depth: int = 3,
    fuel: int = 10_000,
    max_calls: int = 8,
    max_runs: int = 1024,
) -> Verdict:
    """Compare two closed computations observationally.

    ``max_calls`` bounds how many nested operation calls are followed along
    any single probe path and ``max_runs`` bounds the total number of
    evaluations; hitting either makes the verdict inconclusive at best.
    """
    from ..surface import show

    pending = False
    runs = 0

    def run(c):
        nonlocal runs
        runs += 1
        try:
            return eval_big(c, table, fuel)
        except Timeout:
            return "timeout"
        except StuckError as err:
            return err

    def compare(r1, r2, path, calls):
        nonlocal pending
        where = "; ".join(path) or "start"
        if r1 == "timeout" or r2 == "timeout":
            if r1 == "timeout" and r2 == "timeout":
                pending = pending or f"both out of fuel at {where}"
            else:
                pending = pending or f"one side out of fuel at {where}"
            return
        if isinstance(r1, StuckError) or isinstance(r2, StuckError):
            pending = pending or f"stuck at {where}"
            return
        if type(r1) is not type(r2):
            raise _Stop(Distinguished(where, show(r1), show(r2)))
        if isinstance(r1, ValueResult):
            if _ground(r1.value) and _ground(r2.value):
                if r1.value != r2.value:
                    raise _Stop(Distinguished(where, show(r1), show(r2)))
            elif not alpha_eq(r1.value, r2.value):
                pending = pending or f"non-ground values at {where}"
            return
        if (r1.inst, r1.op) != (r2.inst, r2.op):
            raise _Stop(Distinguished(where, show(r1), show(r2)))
        if _ground(r1.arg) and _ground(r2.arg):
            if r1.arg != r2.arg:
                raise _Stop(Distinguished(where, show(r1), show(r2)))
        elif not alpha_eq(r1.arg, r2.arg):
            pending = pending or f"non-ground arguments at {where}"
            return
        values = probes(table.signature(r1.op).result, probe_depth)
        if values is None:
            if not alpha_eq(r1.to_computation(), r2.to_computation()):
                pending = pending or f"non-ground continuation input at {where}"
            return
        if calls >= max_calls:
            pending = pending or f"more than {max_calls} nested calls at {where}"
            return
        if runs + 2 * len(values) > max_runs:
            pending = pending or f"probe budget of {max_runs} runs spent at {where}"
            return
        for v in values:
            step = f"{r1.inst}#{r1.op}({show(r1.arg)}) -> {show(v)}"
            compare(
                run(subst(r1.body, v, r1.y)),
                run(subst(r2.body, v, r2.y)),
                path + (step,),
                calls + 1,
            )

    try:
        compare(run(c1), run(c2), (), 0)
    except _Stop as stop:
        return stop.verdict
    return Inconclusive(pending) if pending else Equivalent()
