"""Type, trace and run a small handled program.

The computation reads a reference, writes the value back and returns its
successor.  A handler answers every lookup with 1, swallows updates, and in
its value case performs a real update with the final result.

    python demos/01_handlers_step_by_step.py
"""

from __future__ import annotations

from coreff.big import check_agreement, eval_big
from coreff.checker import synth_comp, synth_expr
from coreff.small import render_trace, trace
from coreff.surface import parse_program, show, show_type

SOURCE = """
effect ref { lookup : unit -> nat  update : nat -> unit }
instance ι : ref
do with handler { val x : nat -> ι#update x
                | ι#lookup(x; k) -> k 1
                | ι#update(x; k) -> k () }
   handle let x1 = ι#lookup () in let x2 = ι#update x1 in val (succ x1)
"""

prog = parse_program(SOURCE)
handler, body = prog.body.handler, prog.body.body

print("body    :", show_type(synth_comp(prog.table, (), body)))
print("handler :", show_type(synth_expr(prog.table, (), handler)))
print("program :", show_type(synth_comp(prog.table, (), prog.body)))
# The handler takes care of both operations on ι, but its value case issues
# a fresh update, so exactly that one survives in the program's dirt.

print()
tr = trace(prog.body, prog.table)
print(render_trace(tr))
print(f"{tr.steps_used} steps")

# The big-step evaluator lands on the same operation call.
print("big-step:", show(eval_big(prog.body, prog.table)))
print("agree   :", check_agreement(prog.body, prog.table))
