"""The ``coreff`` command-line front end.

Exit codes: 0 success, 1 type error (or a distinguished verdict), 2 parse
or usage error, 3 out of fuel or inconclusive, 4 stuck.
"""

from __future__ import annotations

import argparse
import os
import sys

from .big import eval_big
from .checker import TypingError, synth_comp
from .equiv.laws import SUITES, law_suite
from .equiv.oracle import Distinguished, Equivalent, op_equiv
from .equiv.rewrite import RULESETS, normalize
from .small import OutOfFuel, render_trace, run_small, trace
from .surface import ParseError, ProgramFile, parse_program, show, show_type
from .syntax import StuckError, Timeout

DEFAULT_FUEL = 10_000
DEFAULT_PROBE_DEPTH = 3
SPEC_SUITES = ("basics", "seven-equations", "eta-let", "commutativity")


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def default_fuel() -> int:
    raw = os.environ.get("COREFF_FUEL")
    if raw is None:
        return DEFAULT_FUEL
    try:
        return int(raw)
    except ValueError:
        print(f"coreff: ignoring non-integer COREFF_FUEL={raw!r}", file=sys.stderr)
        return DEFAULT_FUEL


def _load(path: str) -> ProgramFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        print(f"coreff: {err}", file=sys.stderr)
        raise _Exit(2)
    try:
        return parse_program(text)
    except ParseError as err:
        print(err.render(path), file=sys.stderr)
        raise _Exit(2)


def _typed(path: str) -> tuple[ProgramFile, object]:
    prog = _load(path)
    try:
        return prog, synth_comp(prog.table, (), prog.body)
    except TypingError as err:
        print(err.render(path), file=sys.stderr)
        raise _Exit(1)


def cmd_check(args) -> int:
    _, ty = _typed(args.file)
    print(show_type(ty))
    return 0


def cmd_run(args) -> int:
    prog, _ = _typed(args.file)
    if args.trace:
        tr = trace(prog.body, prog.table, args.fuel)
        sys.stdout.write(render_trace(tr))
        if tr.result() is not None:
            return 0
        return 3 if isinstance(tr.outcome, OutOfFuel) else 4
    run = run_small if args.semantics == "small" else eval_big
    try:
        result = run(prog.body, prog.table, args.fuel)
    except Timeout:
        print("TIMEOUT")
        return 3
    except StuckError as err:
        print(f"STUCK: {err.reason}")
        return 4
    print(show(result))
    return 0


def cmd_rewrite(args) -> int:
    prog, _ = _typed(args.file)
    out = normalize(prog.body, prog.table, RULESETS[args.rules], args.fuel)
    print(show(ProgramFile(prog.table, out.term, prog.effect_order, prog.instance_order)))
    if out.exhausted:
        print(f"(stopped after {out.steps} rewrites: fuel exhausted)", file=sys.stderr)
        return 3
    return 0


def cmd_equiv(args) -> int:
    p1, _ = _typed(args.file1)
    p2, _ = _typed(args.file2)
    if p1.table != p2.table:
        print("coreff: the two files declare different effects or instances", file=sys.stderr)
        return 2
    verdict = op_equiv(p1.body, p2.body, p1.table, args.probe_depth, args.fuel)
    print(verdict)
    if isinstance(verdict, Equivalent):
        return 0
    return 1 if isinstance(verdict, Distinguished) else 3


def cmd_laws(args) -> int:
    names = SPEC_SUITES if args.law == "all" else (args.law,)
    reports = [
        law_suite(name, args.size, args.probe_depth, args.fuel, args.nesting) for name in names
    ]
    if args.json:
        print("[" + ",\n".join(r.to_json() for r in reports) + "]")
    else:
        for r in reports:
            for line in r.lines():
                print(line)
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    fuel = default_fuel()
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(
        prog="coreff", description="Type-check, run and compare core effect programs."
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="print the synthesized type of the program body", formatter_class=fmt)
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="evaluate the program body", formatter_class=fmt)
    p.add_argument("file")
    p.add_argument("--semantics", choices=("small", "big"), default="small")
    p.add_argument("--fuel", type=int, default=fuel, help="step budget (env COREFF_FUEL)")
    p.add_argument("--trace", action="store_true", help="print every small step")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("rewrite", help="normalize the program body by rewriting", formatter_class=fmt)
    p.add_argument("file")
    p.add_argument("--rules", choices=("beta", "beta-eta"), default="beta")
    p.add_argument("--fuel", type=int, default=fuel, help="rewrite budget (env COREFF_FUEL)")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("equiv", help="compare two programs observationally", formatter_class=fmt)
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--probe-depth", type=int, default=DEFAULT_PROBE_DEPTH)
    p.add_argument("--fuel", type=int, default=fuel, help="step budget per run (env COREFF_FUEL)")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("laws", help="check instantiated state laws", formatter_class=fmt)
    p.add_argument("--law", choices=("all",) + tuple(SUITES), default="all")
    p.add_argument("--size", type=int, default=None, help="body size (suite default if omitted)")
    p.add_argument("--nesting", choices=("12", "21"), default="12", help="order of the two state handlers")
    p.add_argument("--probe-depth", type=int, default=DEFAULT_PROBE_DEPTH)
    p.add_argument("--fuel", type=int, default=fuel, help="step budget per run (env COREFF_FUEL)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_laws)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "trace", False) and args.semantics != "small":
        ap.error("--trace is only available with --semantics small")
    try:
        return args.func(args)
    except _Exit as ex:
        return ex.code


if __name__ == "__main__":
    sys.exit(main())
