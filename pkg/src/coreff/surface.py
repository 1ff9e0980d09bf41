"""Concrete syntax: a recursive-descent parser and a deterministic printer.

Program files look like::

    effect ref { lookup : unit -> nat  update : nat -> unit }
    instance r : ref
    do let x = r#lookup () in r#update(succ x; _. val x)

Numerals ``n`` abbreviate ``succ^n 0``; ``e#op e'`` abbreviates
``e#op(e'; y. val y)``.  Comments are ``(* ... *)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .syntax import (
    Absurd,
    App,
    EffectTable,
    FalseE,
    Fun,
    Handler,
    If,
    Inst,
    Let,
    LetRec,
    Match,
    OpCall,
    OpCase,
    Signature,
    SourceSpan,
    Succ,
    TrueE,
    UnitE,
    Val,
    Var,
    With,
    Zero,
    nat_value,
)
from .syntax import Computation, Expression, OpCallResult, ValueResult
from .types import (
    Arrow,
    Bool,
    Dirty,
    EffT,
    Empty,
    HandlerT,
    Nat,
    SkArrow,
    SkEffect,
    SkHandler,
    UnitT,
    BOOL,
    EMPTY,
    NAT,
    UNIT,
)


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def render(self, filename: str = "<input>") -> str:
        if self.span is None:
            return f"{filename}: {self.message}"
        return f"{filename}:{self.span.line}:{self.span.column}: {self.message}"


class ResolveError(ParseError):
    """A name that the preamble does not declare."""


@dataclass
class ProgramFile:
    table: EffectTable
    body: Computation
    effect_order: list[str] = field(default_factory=list)
    instance_order: list[str] = field(default_factory=list)


# ---------------------------------------------------------------- lexer

KEYWORDS = {
    "effect",
    "instance",
    "do",
    "val",
    "fun",
    "handler",
    "with",
    "handle",
    "if",
    "then",
    "else",
    "match",
    "succ",
    "absurd",
    "let",
    "rec",
    "in",
    "true",
    "false",
    "bool",
    "nat",
    "unit",
    "empty",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\(\*)
  | (?P<num>\d+)
  | (?P<name>[^\W\d][\w']*)
  | (?P<sym>->|=>|[#();.:!{}|^,=\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "kw", "num", "sym", "eof"
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0

    def span_at(start, end):
        return SourceSpan(start, end, line, start - line_start + 1)

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", span_at(pos, pos + 1))
        kind = m.lastgroup
        if kind == "comment":
            depth, i = 1, m.end()
            while depth:
                if i >= len(text):
                    raise ParseError("unterminated comment", span_at(pos, pos + 2))
                if text.startswith("(*", i):
                    depth, i = depth + 1, i + 2
                elif text.startswith("*)", i):
                    depth, i = depth - 1, i + 2
                else:
                    i += 1
            end = i
        else:
            end = m.end()
            if kind != "ws":
                word = m.group()
                if kind == "name" and word in KEYWORDS:
                    kind = "kw"
                tokens.append(Token(kind, word, span_at(pos, end)))
        chunk = text[pos:end]
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = end
    tokens.append(Token("eof", "", span_at(pos, pos)))
    return tokens


# ---------------------------------------------------------------- parser


class Parser:
    def __init__(self, text: str, table: EffectTable | None = None, env=()):
        self.tokens = tokenize(text)
        self.i = 0
        self.table = table or EffectTable()
        self.scope: list[str] = list(env)
        self._types_seen: list = []

    # -- token plumbing

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.span)
        tok = self.tok
        self.i += 1
        return tok

    def name(self) -> str:
        if self.tok.kind != "name":
            raise ParseError(f"expected a name, found {self.tok.text or 'end of input'!r}", self.tok.span)
        text = self.tok.text
        self.i += 1
        return text

    def span_from(self, start: Token) -> SourceSpan:
        end = self.tokens[max(self.i - 1, 0)].span.end
        return SourceSpan(start.span.start, end, start.span.line, start.span.column)

    def bound(self, names, fn):
        self.scope.extend(names)
        try:
            return fn()
        finally:
            del self.scope[len(self.scope) - len(names) :]

    def attempt(self, fn):
        """Run ``fn``; on a parse error rewind and return ``None``."""
        saved, scope = self.i, list(self.scope)
        try:
            return fn()
        except ResolveError:
            raise
        except ParseError:
            self.i, self.scope = saved, scope
            return None

    # -- program

    def program(self) -> ProgramFile:
        effects: dict[str, dict[str, tuple]] = {}
        instances: dict[str, str] = {}
        effect_order, instance_order = [], []
        while not self.at("do"):
            start = self.tok
            if self.accept("effect"):
                name = self.name()
                if name in effects:
                    raise ParseError(f"effect {name} declared twice", start.span)
                self.expect("{")
                ops = {}
                while not self.accept("}"):
                    op = self.name()
                    self.expect(":")
                    param = self.pure_atom_or_paren()
                    self.expect("->")
                    result = self.pure_type()
                    ops[op] = (param, result, start)
                    self.accept(";") or self.accept(",")
                effects[name] = ops
                effect_order.append(name)
            elif self.accept("instance"):
                names = [self.name()]
                while self.accept(","):
                    names.append(self.name())
                self.expect(":")
                eff_tok = self.tok
                e = self.name()
                for n in names:
                    if n in instances:
                        raise ParseError(f"instance {n} declared twice", start.span)
                    instances[n] = (e, eff_tok)
                    instance_order.append(n)
            else:
                raise ParseError(f"expected 'effect', 'instance' or 'do', found {self.tok.text!r}", self.tok.span)
        self.expect("do")
        for n, (e, tok) in instances.items():
            if e not in effects:
                raise ResolveError(f"unknown effect {e}", tok.span)
        try:
            self.table = EffectTable(
                {e: {op: Signature(p, r) for op, (p, r, _) in ops.items()} for e, ops in effects.items()},
                {n: e for n, (e, _) in instances.items()},
            )
        except ValueError as err:
            raise ParseError(str(err)) from None
        body = self.computation()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self.tok.text!r} after program body", self.tok.span)
        self._check_types_resolved()
        return ProgramFile(self.table, body, effect_order, instance_order)

    def _check_types_resolved(self):
        for e, ops in self.table.effects.items():
            for sig in ops.values():
                for t in (sig.param, sig.result):
                    check_type_wellformed(t, self.table)
        for t, tok in self._types_seen:
            try:
                check_type_wellformed(t, self.table)
            except ResolveError as err:
                raise ResolveError(err.message, tok.span) from None

    # -- types

    def pure_type(self):
        d, explicit = self.dirty_type_flag()
        if explicit:
            raise ParseError("expected a pure type, found a dirty type", self.tok.span)
        return d.pure

    def dirty_type(self) -> Dirty:
        return self.dirty_type_flag()[0]

    def dirty_type_flag(self) -> tuple[Dirty, bool]:
        """Parse a type; the flag records whether an explicit ``!`` was seen."""
        start = self.tok
        d, explicit = self._dirty_type_flag()
        self._types_seen.append((d, start))
        return d, explicit

    def _dirty_type_flag(self) -> tuple[Dirty, bool]:
        if self.accept("("):
            inner, explicit = self.dirty_type_flag()
            self.expect(")")
            if explicit:
                if self.accept("=>"):
                    return Dirty(HandlerT(inner, self.dirty_type())), False
                return inner, True
            atom = inner.pure
        else:
            atom = self.pure_atom()
        if self.accept("!"):
            d = Dirty(atom, self.dirt())
            if self.accept("=>"):
                return Dirty(HandlerT(d, self.dirty_type())), False
            return d, True
        if self.at("->"):
            saved = self.i
            self.i += 1
            cod = self.attempt(self.dirty_type)
            if cod is not None:
                return Dirty(Arrow(atom, cod)), False
            self.i = saved
        if self.accept("=>"):
            return Dirty(HandlerT(Dirty(atom), self.dirty_type())), False
        return Dirty(atom), False

    def pure_atom_or_paren(self):
        if self.accept("("):
            t = self.pure_type()
            self.expect(")")
            return t
        return self.pure_atom()

    def pure_atom(self):
        tok = self.tok
        for kw, t in (("bool", BOOL), ("nat", NAT), ("unit", UNIT), ("empty", EMPTY)):
            if self.accept(kw):
                return t
        if tok.kind == "name" and self.peek().text == "^":
            self.i += 2
            self.expect("{")
            region = []
            if not self.at("}"):
                region.append(self.name())
                while self.accept(","):
                    region.append(self.name())
            self.expect("}")
            return EffT(tok.text, frozenset(region))
        raise ParseError(f"expected a type, found {tok.text or 'end of input'!r}", tok.span)

    def dirt(self) -> frozenset:
        self.expect("{")
        ops = []
        if not self.at("}"):
            ops.append(self.dirt_op())
            while self.accept(","):
                ops.append(self.dirt_op())
        self.expect("}")
        return frozenset(ops)

    def dirt_op(self):
        inst = self.name()
        self.expect("#")
        return (inst, self.name())

    # -- expressions

    def expression(self) -> Expression:
        if self.at("fun"):
            return self.fun()
        return self.expr_atom()

    def fun(self) -> Expression:
        start = self.expect("fun")
        x = self.name()
        self.expect(":")
        ann = self.pure_type()
        self.expect(".")
        body = self.bound([x], self.computation)
        return Fun(x, ann, body, span=self.span_from(start))

    def expr_atom(self) -> Expression:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            e: Expression = Zero(span=tok.span)
            for _ in range(int(tok.text)):
                e = Succ(e, span=tok.span)
            return e
        if self.accept("true"):
            return TrueE(span=tok.span)
        if self.accept("false"):
            return FalseE(span=tok.span)
        if self.accept("succ"):
            return Succ(self.expr_atom(), span=self.span_from(tok))
        if self.at("handler"):
            return self.handler()
        if tok.kind == "name":
            self.i += 1
            if tok.text in self.scope:
                return Var(tok.text, span=tok.span)
            if tok.text in self.table.instances:
                return Inst(tok.text, span=tok.span)
            raise ResolveError(f"unknown name {tok.text}", tok.span)
        if self.at("(") and self.peek().text == ")":
            self.i += 2
            return UnitE(span=self.span_from(tok))
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        raise ParseError(f"expected an expression, found {tok.text or 'end of input'!r}", tok.span)

    def handler(self) -> Expression:
        start = self.expect("handler")
        out = None
        if self.accept("["):
            out = self.dirty_type()
            self.expect("]")
        self.expect("{")
        self.expect("val")
        x = self.name()
        self.expect(":")
        ann = self.pure_type()
        self.expect("->")
        body = self.bound([x], self.computation)
        cases = []
        while self.accept("|"):
            cstart = self.tok
            inst = self.expr_atom()
            self.expect("#")
            op = self.op_name()
            self.expect("(")
            px = self.name()
            self.expect(";")
            k = self.name()
            self.expect(")")
            self.expect("->")
            cbody = self.bound([px, k], self.computation)
            cases.append(OpCase(inst, op, px, k, cbody, span=self.span_from(cstart)))
        self.expect("}")
        return Handler(x, ann, body, tuple(cases), out, span=self.span_from(start))

    def op_name(self) -> str:
        tok = self.tok
        op = self.name()
        if self.table.effect_of_op(op) is None:
            raise ResolveError(f"unknown operation {op}", tok.span)
        return op

    # -- computations

    def computation(self) -> Computation:
        tok = self.tok
        if self.accept("val"):
            return Val(self.expression(), span=self.span_from(tok))
        if self.at("let"):
            return self.let()
        if self.accept("if"):
            cond = self.expression()
            self.expect("then")
            c1 = self.computation()
            self.expect("else")
            c2 = self.computation()
            return If(cond, c1, c2, span=self.span_from(tok))
        if self.accept("match"):
            scrut = self.expression()
            self.expect("with")
            self.expect("{")
            zero = self.tok
            if zero.kind != "num" or zero.text != "0":
                raise ParseError("expected '0' branch", zero.span)
            self.i += 1
            self.expect("->")
            c1 = self.computation()
            self.expect("|")
            self.expect("succ")
            x = self.name()
            self.expect("->")
            c2 = self.bound([x], self.computation)
            self.expect("}")
            return Match(scrut, c1, x, c2, span=self.span_from(tok))
        if self.accept("absurd"):
            self.expect("[")
            ann = self.dirty_type()
            self.expect("]")
            return Absurd(ann, self.expr_atom(), span=self.span_from(tok))
        if self.accept("with"):
            h = self.expression()
            self.expect("handle")
            return With(h, self.computation(), span=self.span_from(tok))
        if self.at("("):
            c = self.attempt(self.head_computation)
            if c is not None:
                return c
            self.expect("(")
            c = self.computation()
            self.expect(")")
            return c
        return self.head_computation()

    def head_computation(self) -> Computation:
        """An application or an operation call, both headed by an expression."""
        start = self.tok
        head = self.expr_atom()
        if self.accept("#"):
            op = self.op_name()
            if self.accept("("):
                if self.at(")"):
                    self.i += 1
                    arg: Expression = UnitE(span=self.span_from(start))
                    return self._generic(head, op, arg, start)
                arg = self.expression()
                if self.accept(";"):
                    y = self.name()
                    self.expect(".")
                    body = self.bound([y], self.computation)
                    self.expect(")")
                    return OpCall(head, op, arg, y, body, span=self.span_from(start))
                self.expect(")")
                return self._generic(head, op, arg, start)
            return self._generic(head, op, self.expr_atom(), start)
        return App(head, self.expression(), span=self.span_from(start))

    def _generic(self, inst, op, arg, start) -> Computation:
        return OpCall(inst, op, arg, "y", Val(Var("y")), span=self.span_from(start))

    def let(self) -> Computation:
        start = self.expect("let")
        if self.accept("rec"):
            f = self.name()
            x = self.name()
            self.expect(":")
            ann = self.pure_type()
            if not isinstance(ann, Arrow):
                raise ParseError("let rec annotation must be a function type", start.span)
            self.expect("=")
            c1 = self.bound([f, x], self.computation)
            self.expect("in")
            c2 = self.bound([f], self.computation)
            return LetRec(f, x, ann.dom, ann.cod, c1, c2, span=self.span_from(start))
        x = self.name()
        self.expect("=")
        c1 = self.computation()
        self.expect("in")
        c2 = self.bound([x], self.computation)
        return Let(x, c1, c2, span=self.span_from(start))


def check_type_wellformed(t, table: EffectTable):
    """Raise ResolveError if ``t`` mentions an undeclared effect or operation."""
    match t:
        case Dirty(p, dirt):
            check_type_wellformed(p, table)
            for inst, op in dirt:
                e = table.effect_of_instance(inst)
                if e is None:
                    raise ResolveError(f"unknown instance {inst}")
                if op not in table.effects[e]:
                    raise ResolveError(f"operation {op} does not belong to the effect of {inst}")
        case Arrow(d, c):
            check_type_wellformed(d, table)
            check_type_wellformed(c, table)
        case HandlerT(c, d):
            check_type_wellformed(c, table)
            check_type_wellformed(d, table)
        case EffT(e, region):
            if e not in table.effects:
                raise ResolveError(f"unknown effect {e}")
            for inst in region:
                if table.effect_of_instance(inst) != e:
                    raise ResolveError(f"{inst} is not an instance of {e}")


def _parser(text, table=None, env=()):
    return Parser(text, table, env)


def parse_program(text: str) -> ProgramFile:
    return _parser(text).program()


def parse_computation(text: str, table: EffectTable, env=()) -> Computation:
    p = _parser(text, table, env)
    c = p.computation()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.span)
    p._check_types_resolved()
    return c


def parse_expression(text: str, table: EffectTable, env=()) -> Expression:
    p = _parser(text, table, env)
    e = p.expression()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.span)
    return e


def parse_type(text: str, table: EffectTable | None = None):
    """Parse a pure or dirty type; a type without ``!`` is returned as pure."""
    p = _parser(text, table)
    d, explicit = p.dirty_type_flag()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.span)
    if table is not None:
        p._check_types_resolved()
    return d if explicit else d.pure


# ---------------------------------------------------------------- printer


def show_dirt(dirt) -> str:
    return "{" + ", ".join(f"{i}#{op}" for i, op in sorted(dirt)) + "}"


def show_type(t) -> str:
    match t:
        case Dirty(p, dirt):
            inner = show_type(p)
            if isinstance(p, (Arrow, HandlerT)):
                inner = f"({inner})"
            return f"{inner} ! {show_dirt(dirt)}"
        case Bool():
            return "bool"
        case Nat():
            return "nat"
        case UnitT():
            return "unit"
        case Empty():
            return "empty"
        case Arrow(d, c):
            dom = show_type(d)
            if isinstance(d, (Arrow, HandlerT)):
                dom = f"({dom})"
            return f"{dom} -> {show_type(c)}"
        case EffT(e, region):
            return f"{e}^{{{', '.join(sorted(region))}}}"
        case HandlerT(c, d):
            return f"({show_type(c)}) => ({show_type(d)})"
        case SkArrow(d, c):
            dom = show_type(d)
            if isinstance(d, (SkArrow, SkHandler)):
                dom = f"({dom})"
            return f"{dom} -> {show_type(c)}"
        case SkEffect(e):
            return e
        case SkHandler(c, d):
            return f"({show_type(c)}) => ({show_type(d)})"
    raise TypeError(f"not a type: {t!r}")


def show_expr(e: Expression, atom: bool = False) -> str:
    match e:
        case Var(x):
            return x
        case Inst(i):
            return i
        case TrueE():
            return "true"
        case FalseE():
            return "false"
        case UnitE():
            return "()"
        case Zero():
            return "0"
        case Succ(arg):
            n = nat_value(e)
            if n is not None:
                return str(n)
            s = f"succ {show_expr(arg, atom=True)}"
            return f"({s})" if atom else s
        case Fun(x, ann, body):
            s = f"fun {x} : {show_type(ann)}. {show_comp(body)}"
            return f"({s})" if atom else s
        case Handler(x, ann, body, cases, out):
            a = show_type(ann)
            if isinstance(ann, (Arrow, HandlerT)):
                a = f"({a})"
            parts = [f"val {x} : {a} -> {show_comp(body)}"]
            for case in cases:
                parts.append(
                    f"{show_expr(case.inst, atom=True)}#{case.op}({case.x}; {case.k}) -> {show_comp(case.body)}"
                )
            head = "handler" if out is None else f"handler [{show_type(out)}]"
            return f"{head} {{ {' | '.join(parts)} }}"
    raise TypeError(f"not an expression: {e!r}")


def _bracket(c: Computation) -> str:
    """Computations in a let-bound position read better parenthesised."""
    s = show_comp(c)
    if isinstance(c, (Let, LetRec, If, Match, With)):
        return f"({s})"
    return s


def show_comp(c: Computation) -> str:
    match c:
        case Val(e):
            return f"val {show_expr(e, atom=True)}"
        case OpCall(inst, op, arg, y, body):
            return f"{show_expr(inst, atom=True)}#{op}({show_expr(arg)}; {y}. {show_comp(body)})"
        case With(h, body):
            return f"with {show_expr(h, atom=True)} handle {show_comp(body)}"
        case If(e, c1, c2):
            return f"if {show_expr(e, atom=True)} then {show_comp(c1)} else {show_comp(c2)}"
        case Absurd(ann, e):
            return f"absurd [{show_type(ann)}] {show_expr(e, atom=True)}"
        case App(e1, e2):
            return f"{show_expr(e1, atom=True)} {show_expr(e2, atom=True)}"
        case Match(e, c1, x, c2):
            return f"match {show_expr(e, atom=True)} with {{ 0 -> {show_comp(c1)} | succ {x} -> {show_comp(c2)} }}"
        case Let(x, c1, c2):
            return f"let {x} = {_bracket(c1)} in {show_comp(c2)}"
        case LetRec(f, x, dom, cod, c1, c2):
            return f"let rec {f} {x} : {show_type(Arrow(dom, cod))} = {_bracket(c1)} in {show_comp(c2)}"
    raise TypeError(f"not a computation: {c!r}")


def show_table(table: EffectTable, effect_order=None, instance_order=None) -> str:
    lines = []
    for e in effect_order or sorted(table.effects):
        ops = []
        for op, sig in table.effects[e].items():
            p = show_type(sig.param)
            if isinstance(sig.param, (Arrow, HandlerT)):
                p = f"({p})"
            ops.append(f"{op} : {p} -> {show_type(sig.result)}")
        lines.append(f"effect {e} {{ {'; '.join(ops)} }}")
    for i in instance_order or sorted(table.instances):
        lines.append(f"instance {i} : {table.instances[i]}")
    return "\n".join(lines)


def show(x) -> str:
    """Print a term, type, result or program in concrete syntax."""
    if isinstance(x, ProgramFile):
        pre = show_table(x.table, x.effect_order, x.instance_order)
        return (pre + "\n" if pre else "") + "do " + show_comp(x.body)
    if isinstance(x, (ValueResult, OpCallResult)):
        return show_comp(x.to_computation())
    if isinstance(x, OpCase):
        return f"{show_expr(x.inst, atom=True)}#{x.op}({x.x}; {x.k}) -> {show_comp(x.body)}"
    if isinstance(x, (Val, OpCall, With, If, Absurd, App, Match, Let, LetRec)):
        return show_comp(x)
    if isinstance(x, (Var, Inst, TrueE, FalseE, UnitE, Zero, Succ, Fun, Handler)):
        return show_expr(x)
    return show_type(x)
