"""Recursive-descent parser for the canonical expression syntax, the theory
DSL, and ground action sequences."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    ActionTerm, And, App, Atom, Cond, Const, Exists, FALSE, Fluent, Formula,
    Lit, Not, Num, Or, Situation, TRUE, Term, Var, conj,
)
from .theory import (
    ActionDecl, ActionTheory, FiniteIntRange, FiniteSet, FluentDecl, Param,
    RealInterval, SensorDecl,
)

FUNCTIONS = {"min": 2, "max": 2, "abs": 1, "exp": 1, "pow": 2, "gauss": 3}
KEYWORDS = {
    "and", "or", "not", "exists", "true", "false", "if", "then", "else",
    "fluent", "action", "sensor", "on", "prior", "requires", "in", "int",
    "real", "set", "obj", "inf", "pi",
}


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class _Backtrack(Exception):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "name" | "op"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<op>:=|<=|>=|!=|[-+*/(){}\[\],;:=<>|])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group(0)
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind in ("num", "name", "op"):
                tokens.append(Token(kind, raw, line, col))
            col += len(raw)
        pos = m.end()
    return tokens


class Parser:
    def __init__(self, tokens: list[Token], fluents: frozenset[str] = frozenset()):
        self.tokens = tokens
        self.pos = 0
        self.fluents = fluents

    # -- token utilities ---------------------------------------------------
    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def take(self, text: str | None = None) -> Token:
        t = self.peek()
        if t is None:
            raise ParseError(f"unexpected end of input (expected {text or 'more'})")
        if text is not None and t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        self.pos += 1
        return t

    def take_name(self) -> Token:
        t = self.peek()
        if t is None or t.kind != "name" or t.text in KEYWORDS:
            got = t.text if t else "end of input"
            raise ParseError(f"expected a name, found {got!r}",
                             t.line if t else None, t.col if t else None)
        self.pos += 1
        return t

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    # -- formulas ----------------------------------------------------------
    def formula(self) -> Formula:
        items = [self._conjunction()]
        while self.at("or"):
            self.take()
            items.append(self._conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def _conjunction(self) -> Formula:
        items = [self._formula_unary()]
        while self.at("and"):
            self.take()
            items.append(self._formula_unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def _formula_unary(self) -> Formula:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input in formula")
        if t.text == "not":
            self.take()
            return Not(self._formula_unary())
        if t.text == "exists":
            self.take()
            var = self.take_name().text
            self.take("(")
            body = self.formula()
            self.take(")")
            return Exists(var, body)
        if t.text == "true":
            self.take()
            return TRUE
        if t.text == "false":
            self.take()
            return FALSE
        # ambiguous between a comparison and a parenthesized formula
        save = self.pos
        try:
            return self._comparison()
        except _Backtrack:
            self.pos = save
        except ParseError:
            self.pos = save
            if not self.at("("):
                raise
        self.take("(")
        body = self.formula()
        self.take(")")
        return body

    def _comparison(self) -> Formula:
        lhs = self.term()
        t = self.peek()
        if t is None or t.text not in ("=", "!=", "<", "<=", ">", ">="):
            raise _Backtrack()
        atoms = []
        while True:
            t = self.peek()
            if t is None or t.text not in ("=", "!=", "<", "<=", ">", ">="):
                break
            rel = self.take().text
            rhs = self.term()
            atoms.append(Atom(rel, lhs, rhs))
            lhs = rhs
        return conj(atoms)

    # -- terms -------------------------------------------------------------
    def term(self) -> Term:
        lhs = self._mult()
        while self.at("+") or self.at("-"):
            op = self.take().text
            lhs = App(op, (lhs, self._mult()))
        return lhs

    def _mult(self) -> Term:
        lhs = self._term_unary()
        while self.at("*") or self.at("/"):
            op = self.take().text
            rhs = self._term_unary()
            if (op == "/" and isinstance(lhs, Num) and isinstance(rhs, Num)
                    and isinstance(lhs.value, Fraction)
                    and isinstance(rhs.value, Fraction) and rhs.value != 0):
                lhs = Num(lhs.value / rhs.value)  # rational literal like 1/3
            else:
                lhs = App(op, (lhs, rhs))
        return lhs

    def _term_unary(self) -> Term:
        if self.at("-"):
            self.take()
            arg = self._term_unary()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return App("neg", (arg,))
        return self._primary()

    def _primary(self) -> Term:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input in term")
        if t.kind == "num":
            self.take()
            return Num(Fraction(t.text))
        if t.text == "pi":
            self.take()
            return Num(math.pi)
        if t.text == "(":
            self.take()
            inner = self.term()
            self.take(")")
            return inner
        if t.text == "|":
            self.take()
            inner = self.term()
            self.take("|")
            return App("abs", (inner,))
        if t.text == "if":
            self.take()
            guard = self.formula()
            self.take("then")
            then = self.term()
            self.take("else")
            other = self.term()
            return Cond(guard, then, other)
        if t.kind == "name" and t.text not in KEYWORDS:
            self.take()
            if self.at("("):
                if t.text not in FUNCTIONS:
                    raise ParseError(f"unknown function {t.text!r}", t.line, t.col)
                self.take("(")
                args = [self.term()]
                while self.at(","):
                    self.take()
                    args.append(self.term())
                self.take(")")
                if len(args) != FUNCTIONS[t.text]:
                    raise ParseError(
                        f"{t.text} takes {FUNCTIONS[t.text]} arguments, got {len(args)}",
                        t.line, t.col)
                return App(t.text, tuple(args))
            if t.text in self.fluents:
                return Fluent(t.text, None)
            return Var(t.text)
        raise ParseError(f"unexpected token {t.text!r} in term", t.line, t.col)

    # -- ground action terms ----------------------------------------------
    def action_term(self) -> ActionTerm:
        name = self.take_name()
        args: list[Term] = []
        if self.at("("):
            self.take()
            if not self.at(")"):
                args.append(self._ground_arg())
                while self.at(","):
                    self.take()
                    args.append(self._ground_arg())
            self.take(")")
        return ActionTerm(name.text, tuple(args))

    def _ground_arg(self) -> Term:
        neg = False
        while self.at("-"):
            self.take()
            neg = not neg
        t = self.peek()
        if t is not None and t.kind == "num":
            self.take()
            v = Fraction(t.text)
            return Num(-v if neg else v)
        if neg:
            raise ParseError("expected a numeral after '-'",
                             t.line if t else None, t.col if t else None)
        name = self.take_name()
        return Const(name.text)


def parse_formula(text: str, fluents=frozenset()) -> Formula:
    p = Parser(tokenize(text), frozenset(fluents))
    f = p.formula()
    if not p.done():
        t = p.peek()
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
    return f


def parse_term(text: str, fluents=frozenset()) -> Term:
    p = Parser(tokenize(text), frozenset(fluents))
    t = p.term()
    if not p.done():
        tok = p.peek()
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return t


def parse_action_sequence(text: str) -> Situation:
    """Semicolon-separated ground actions, listed in execution order."""
    tokens = tokenize(text)
    p = Parser(tokens)
    actions: list[ActionTerm] = []
    while not p.done():
        actions.append(p.action_term())
        if p.at(";"):
            p.take()
        elif not p.done():
            t = p.peek()
            raise ParseError(f"expected ';' between actions, found {t.text!r}",
                             t.line, t.col)
    return Situation(tuple(actions))


# ---------------------------------------------------------------------------
# theory DSL

def parse_theory_source(text: str) -> ActionTheory:
    p = Parser(tokenize(text))
    fluents: list[FluentDecl] = []
    actions: dict[str, ActionDecl] = {}
    sensors: dict[str, SensorDecl] = {}
    prior: Term | None = None
    seen: set[str] = set()

    def declare(name: str, tok: Token):
        if name in seen:
            raise ParseError(f"duplicate declaration of {name!r}", tok.line, tok.col)
        seen.add(name)

    while not p.done():
        t = p.peek()
        p.fluents = frozenset(f.name for f in fluents)
        if t.text == "fluent":
            p.take()
            name = p.take_name()
            declare(name.text, name)
            p.take(":")
            fluents.append(FluentDecl(name.text, _parse_domain(p)))
        elif t.text == "action":
            p.take()
            name = p.take_name()
            declare(name.text, name)
            params = _parse_params(p)
            pre: Formula = TRUE
            if p.at("requires"):
                p.take()
                pre = p.formula()
            effects: dict[str, Term] = {}
            p.take("{")
            while not p.at("}"):
                target = p.take_name()
                if target.text not in p.fluents:
                    raise ParseError(f"effect on undeclared fluent {target.text!r}",
                                     target.line, target.col)
                if target.text in effects:
                    raise ParseError(f"duplicate effect case for {target.text!r}",
                                     target.line, target.col)
                p.take(":=")
                effects[target.text] = p.term()
                if p.at(";"):
                    p.take()
            p.take("}")
            actions[name.text] = ActionDecl(name.text, params, effects, pre)
        elif t.text == "sensor":
            p.take()
            name = p.take_name()
            declare(name.text, name)
            params = _parse_params(p)
            if len(params) != 1 or params[0].sort == "obj":
                raise ParseError("a sensor takes exactly one numeric reading parameter",
                                 name.line, name.col)
            p.take("on")
            target = p.take_name()
            if target.text not in p.fluents:
                raise ParseError(f"sensor on undeclared fluent {target.text!r}",
                                 target.line, target.col)
            p.take("{")
            err = p.term()
            p.take("}")
            sensors[name.text] = SensorDecl(name.text, params[0], target.text, err)
        elif t.text == "prior":
            if prior is not None:
                raise ParseError("duplicate prior declaration", t.line, t.col)
            p.take()
            p.take("{")
            prior = p.term()
            p.take("}")
        else:
            raise ParseError(f"expected a declaration, found {t.text!r}", t.line, t.col)

    if prior is None:
        raise ParseError("theory declares no prior")
    if not fluents:
        raise ParseError("theory declares no fluents")
    return ActionTheory(fluents, actions, sensors, prior)


def _parse_params(p: Parser) -> tuple[Param, ...]:
    p.take("(")
    params: list[Param] = []
    if not p.at(")"):
        while True:
            name = p.take_name()
            p.take(":")
            sort = p.take()
            if sort.text not in ("real", "int", "obj"):
                raise ParseError(f"unknown parameter sort {sort.text!r}",
                                 sort.line, sort.col)
            params.append(Param(name.text, sort.text))
            if not p.at(","):
                break
            p.take(",")
    p.take(")")
    return tuple(params)


def _parse_bound(p: Parser) -> float:
    neg = False
    while p.at("-"):
        p.take()
        neg = not neg
    t = p.take()
    if t.text == "inf":
        v = math.inf
    elif t.kind == "num":
        v = float(Fraction(t.text))
    else:
        raise ParseError(f"expected a bound, found {t.text!r}", t.line, t.col)
    return -v if neg else v


def _parse_domain(p: Parser):
    t = p.take()
    if t.text == "int":
        p.take("in")
        p.take("[")
        lo = _parse_bound(p)
        p.take(",")
        hi = _parse_bound(p)
        p.take("]")
        if not (lo == int(lo) and hi == int(hi) and math.isfinite(lo) and math.isfinite(hi)):
            raise ParseError("int range bounds must be finite integers", t.line, t.col)
        return FiniteIntRange(int(lo), int(hi))
    if t.text == "real":
        p.take("in")
        p.take("[")
        lo = _parse_bound(p)
        p.take(",")
        hi = _parse_bound(p)
        p.take("]")
        return RealInterval(lo, hi)
    if t.text == "set":
        p.take("{")
        members = [_frac(p)]
        while p.at(","):
            p.take()
            members.append(_frac(p))
        p.take("}")
        return FiniteSet(tuple(members))
    raise ParseError(f"expected a domain, found {t.text!r}", t.line, t.col)


def _frac(p: Parser) -> Fraction:
    neg = False
    while p.at("-"):
        p.take()
        neg = not neg
    t = p.take()
    if t.kind != "num":
        raise ParseError(f"expected a numeral, found {t.text!r}", t.line, t.col)
    v = Fraction(t.text)
    if p.at("/"):
        p.take()
        d = p.take()
        if d.kind != "num" or Fraction(d.text) == 0:
            raise ParseError("expected a nonzero denominator", d.line, d.col)
        v = v / Fraction(d.text)
    return -v if neg else v
