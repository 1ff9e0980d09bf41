"""Enumerate well-typed programs and use them to test the implementation.

Every program of a given size is generated, type checked and then run
through both evaluators and the rewrite rules.

    python demos/03_differential_testing.py
"""

from __future__ import annotations

from collections import Counter

from coreff.big import Agree, check_agreement
from coreff.checker import synth_comp
from coreff.equiv.enumerate import CORPUS_TABLE as T
from coreff.equiv.enumerate import SHAPES, corpus, enumerate_computations
from coreff.equiv.oracle import op_equiv
from coreff.equiv.rewrite import RULESETS, normalize_beta, redexes
from coreff.surface import show, show_type

for name, shape in SHAPES.items():
    counts = [len(enumerate_computations(shape, n)) for n in range(1, 4)]
    print(f"{name:9} sizes 1..3: {counts}")

programs = corpus(3)
print(f"\n{len(programs)} distinct programs up to size 3; a few of them:")
for p in programs[200:1400:300]:
    print(f"  {show(p):60} : {show_type(synth_comp(T, (), p))}")

results = [check_agreement(p, T, 500) for p in programs]
outcomes = Counter(r.outcome if isinstance(r, Agree) else "disagree" for r in results)
print(f"\nsmall vs big step: {dict(outcomes)}")

verdicts = Counter()
for p in programs:
    for rule, _, new in redexes(p, RULESETS["beta-eta"], T):
        verdicts[rule.name, type(op_equiv(p, new, T, fuel=500)).__name__] += 1
print("\nrule applications by verdict:")
for (rule, verdict), n in sorted(verdicts.items()):
    print(f"  {rule:11} {verdict:13} {n}")

# The program whose beta normal form takes the most rewrites to reach.
runs = [(normalize_beta(p, T, fuel=200), p) for p in programs]
out, p = max(((n, p) for n, p in runs if not n.exhausted), key=lambda np: np[0].steps)
print(f"\nlongest normalization ({out.steps} rewrites, rules {sorted(set(out.rules_used))}):")
print("  ", show(p))
print("  ->", show(out.term))
