"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with its key numbers,
whether or not pytest captures output.
"""

from __future__ import annotations

import time

import pytest

from conftest import GOLDEN, load, read_trace
from coreff.big import Agree, check_agreement, eval_big
from coreff.checker import TypingError, ocs_handled, skeletal_type, synth_comp, synth_expr
from coreff.cli import main
from coreff.equiv.enumerate import CORPUS_TABLE, corpus
from coreff.equiv.laws import I1, law_instances, law_suite
from coreff.equiv.oracle import Distinguished, op_equiv
from coreff.equiv.rewrite import RULESETS, redexes
from coreff.equiv.state import mk_H
from coreff.small import IsOpCall, Stepped, Stuck, step
from coreff.surface import parse_computation, parse_expression, parse_program, parse_type, show, show_type
from coreff.syntax import Timeout, alpha_eq, alpha_normalize, nat
from coreff.types import skeleton, subtype_dirty, subtype_pure
from typegen import types_up_to

T = CORPUS_TABLE
SIZE = 4
FUEL = 500  # every terminating corpus program finishes within a dozen steps
GOLDEN_FILES = sorted(p.name for p in GOLDEN.glob("*.eff"))


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail, started):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail} ({time.perf_counter() - started:.1f}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return _report


def _golden_programs():
    progs = [load(name) for name in GOLDEN_FILES]
    out = [(p.body, p.table) for p in progs]
    out.append((mk_H(parse_computation("r1#lookup((); y. val y)", T), nat(5), I1, T), T))
    out.append((mk_H(parse_computation("r1#update(3; _. r1#lookup((); y. val y))", T), nat(0), I1, T), T))
    return out


def test_criterion_1_golden_trace(capsys, report):
    started = time.perf_counter()
    path = GOLDEN / "handled.eff"
    code = main(["run", str(path), "--semantics", "small", "--trace"])
    out = capsys.readouterr().out
    table = parse_program(path.read_text(encoding="utf-8")).table
    got = [alpha_normalize(parse_computation(b, table)) for b in out.strip().split("\n~>\n")]
    want = [alpha_normalize(b) for b in read_trace("handled.trace", table)]
    last = out.strip().splitlines()[-1]
    ok = code == 0 and got == want and last == "ι#update(2; y. val y)"
    report(1, ok, f"{len(got)} blocks vs {len(want)} golden, final {last!r}", started)


def test_criterion_2_golden_types(report):
    started = time.perf_counter()
    body, ex = load("handled-body.eff"), load("handled.eff")
    checks = {
        "c": show_type(synth_comp(body.table, (), body.body)) == "nat ! {ι#lookup, ι#update}",
        "h": show_type(synth_expr(ex.table, (), ex.body.handler))
        == "(nat ! {ι#lookup, ι#update}) => (unit ! {ι#update})",
    }
    wide = parse_program(
        "effect ref { lookup : unit -> nat  update : nat -> unit }\ninstance ι, ι' : ref\ndo val ()"
    ).table
    h = parse_expression(
        "handler { val x : nat -> ι#update x | u#lookup(x; k) -> k 1 | u#update(x; k) -> k () }",
        wide,
        env=("u",),
    )
    ctx = (("u", parse_type("ref^{ι, ι'}", wide)),)
    out = synth_expr(wide, ctx, h).outgoing
    checks["widened"] = ocs_handled(wide, ctx, h.cases, out) == frozenset()
    for name, want in (("swap-correct.eff", "unit ! {}"), ("swap-wrong.eff", "unit ! {ι1#lookup, ι1#update}")):
        prog = load(name)
        checks[name] = show_type(synth_comp(prog.table, (), prog.body)) == want
    failed = [k for k, v in checks.items() if not v]
    report(2, not failed, f"{len(checks)} golden types, failed: {failed or 'none'}", started)


def test_criterion_3_agreement(report):
    started = time.perf_counter()
    programs = [(c, T) for c in corpus(SIZE)] + _golden_programs()
    bad = [show(c) for c, table in programs if not isinstance(check_agreement(c, table, FUEL), Agree)]
    elapsed = time.perf_counter() - started
    ok = not bad and len(programs) >= 1000 and elapsed < 30
    report(3, ok, f"{len(programs)} programs, {len(bad)} disagreements, target < 30s", started)


def test_criterion_4_progress_and_preservation(report):
    started = time.perf_counter()
    stuck = escaped = grew = steps = 0
    for c in corpus(SIZE):
        ty = synth_comp(T, (), c)
        cur = c
        for _ in range(FUEL):
            out = step(cur, T)
            if isinstance(out, Stuck):
                stuck += 1
                break
            if isinstance(out, IsOpCall):
                escaped += (out.inst, out.op) not in ty.dirt
                break
            if not isinstance(out, Stepped):
                break
            steps += 1
            try:
                ok_step = subtype_dirty(synth_comp(T, (), out.next), ty)
            except TypingError:
                ok_step = False
            grew += not ok_step
            cur = out.next
    ok = stuck == escaped == grew == 0
    report(4, ok, f"{steps} steps, stuck={stuck} escaped-dirt={escaped} type-grew={grew}", started)


def test_criterion_5_skeletal_coherence(report):
    started = time.perf_counter()
    types = types_up_to(4)
    pairs = mismatched = 0
    for a in types:
        for b in types:
            if subtype_pure(a, b):
                pairs += 1
                mismatched += skeleton(a) != skeleton(b)
    disagree = nondet = 0
    for c in corpus(SIZE):
        s = skeletal_type(T, (), c)
        disagree += s != skeleton(synth_comp(T, (), c).pure)
        nondet += s != skeletal_type(T, (), c)
    ok = pairs > 0 and mismatched == disagree == nondet == 0
    detail = f"{pairs} subtype pairs over {len(types)} types, skeleton mismatches={mismatched}, corpus disagreements={disagree}, nondeterministic={nondet}"
    report(5, ok, detail, started)


def test_criterion_6_rewrite_soundness(report):
    started = time.perf_counter()
    applications = refuted = retyped = 0
    for c in corpus(SIZE):
        ty = synth_comp(T, (), c)
        for rule, _, new in redexes(c, RULESETS["beta-eta"], T):
            applications += 1
            try:
                ok_type = subtype_dirty(synth_comp(T, (), new), ty)
            except TypingError:
                ok_type = False
            retyped += not ok_type
            refuted += isinstance(op_equiv(c, new, T, probe_depth=3, fuel=FUEL), Distinguished)
    ok = applications > 0 and refuted == retyped == 0
    report(6, ok, f"{applications} rule applications, distinguished={refuted}, type violations={retyped}", started)


def test_criterion_7_state_laws(report):
    started = time.perf_counter()
    totals, dist, changed = 0, 0, 0
    for suite in ("basics", "seven-equations"):
        a = law_suite(suite, size=2, nesting="12")
        b = law_suite(suite, size=2, nesting="21")
        totals += a.total
        dist += a.count(Distinguished) + b.count(Distinguished)
        changed += sum(type(u) is not type(v) for (_, u), (_, v) in zip(a.rows, b.rows)) + abs(a.total - b.total)
    ok = totals > 0 and dist == changed == 0
    report(7, ok, f"{totals} instances per nesting, distinguished={dist}, verdicts changed by nesting={changed}", started)


def test_criterion_8_commutativity(report):
    started = time.perf_counter()
    instances = law_instances("commutativity", size=3)
    differ = refuted = 0
    for inst in instances:
        try:
            r1, r2 = eval_big(inst.lhs, T, FUEL), eval_big(inst.rhs, T, FUEL)
            differ += not alpha_eq(r1.to_computation(), r2.to_computation())
        except Timeout:
            differ += 1
        refuted += isinstance(op_equiv(inst.lhs, inst.rhs, T, fuel=FUEL), Distinguished)
    elapsed = time.perf_counter() - started
    ok = instances and differ == refuted == 0 and elapsed < 60
    report(8, ok, f"{len(instances)} instances, unequal results={differ}, distinguished={refuted}, target < 60s", started)


def test_criterion_9_round_trip(report):
    started = time.perf_counter()
    bad = [c for c in corpus(SIZE) if not alpha_eq(parse_computation(show(c), T), c)]
    for name in GOLDEN_FILES:
        prog = load(name)
        again = parse_program(show(prog))
        if again.table != prog.table or not alpha_eq(again.body, prog.body):
            bad.append(name)
    report(9, not bad, f"{len(corpus(SIZE))} corpus programs and {len(GOLDEN_FILES)} golden files, failures={len(bad)}", started)
