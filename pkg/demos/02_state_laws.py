"""Interpret references with a state handler and test the state laws.

``mk_H(c, e, r)`` runs ``c`` with the reference ``r`` initialised to ``e``;
every law is checked by comparing both sides with the bounded oracle.

    python demos/02_state_laws.py
"""

from __future__ import annotations

from coreff.big import eval_big
from coreff.equiv.enumerate import CORPUS_TABLE as T
from coreff.equiv.laws import I1, law_suite
from coreff.equiv.oracle import op_equiv
from coreff.equiv.state import mk_H
from coreff.surface import parse_computation, show
from coreff.syntax import nat


def c(text):
    return parse_computation(text, T)


# Running a stateful computation with an initial state gives a pure value.
prog = mk_H(c("r1#update(3; _. r1#lookup((); y. val (succ y)))"), nat(0), I1, T)
print(show(prog))
print("=>", show(eval_big(prog, T)))
print()

# Reading a reference and writing the value back changes nothing.
lhs = mk_H(c("r1#lookup((); y. r1#update(y; _. val 7))"), nat(2), I1, T)
rhs = mk_H(c("val 7"), nat(2), I1, T)
print("lookup then update  :", op_equiv(lhs, rhs, T))

# Dropping the later of two updates is not a law, and the oracle says so.
lhs = mk_H(c("r1#update(1; _. r1#update(2; _. r1#lookup((); y. val y)))"), nat(0), I1, T)
rhs = mk_H(c("r1#update(1; _. r1#lookup((); y. val y))"), nat(0), I1, T)
print("forgetting an update:", op_equiv(lhs, rhs, T))
print()

# The suites instantiate each law over enumerated bodies and states 0..2.
for suite in ("basics", "seven-equations"):
    for nesting in ("12", "21"):
        report = law_suite(suite, size=1, nesting=nesting)
        print(f"{suite:16} nesting {nesting}: {report.summary()}")
