"""Expression grammar: parsing and the re-parseable pretty-printer.

Grammar (whitespace-insensitive)::

    expr     := term (('+'|'-') term)*
    term     := unary (('*'|'/') unary)*
    unary    := ('-'|'+') unary | power
    power    := atom ('^' exponent)?
    exponent := '-'? INT | '(' '-'? INT ')'
    atom     := INT | x<digits> | u '[' name (';' index)? ']'
              | head '(' expr ')' | '(' expr ')'
    index    := '(' INT (',' INT)* ')'

``u[name]`` abbreviates the zero multi-index.  Rational literals are just
integer division, e.g. ``3/2``; function heads (sin, cos, exp, ln) parse
only when the context enables the transcendental extension.
"""

from __future__ import annotations

import re

from .errors import DomainError, ParseError
from .multiindex import MultiIndex
from .expr import FN_HEADS, Context, DiffExpr, apply_fn

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\];,]))"
)

_X_RE = re.compile(r"^x(\d+)$")


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind: str, value, pos: int):
        self.kind = kind
        self.value = value
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
        if match.group("int") is not None:
            tokens.append(_Token("int", int(match.group("int")), match.start("int")))
        elif match.group("ident") is not None:
            tokens.append(_Token("ident", match.group("ident"), match.start("ident")))
        else:
            tokens.append(_Token("op", match.group("op"), match.start("op")))
        pos = match.end()
    tokens.append(_Token("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.text = text
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.next()
        if tok.kind != "op" or tok.value != op:
            raise ParseError(f"expected {op!r}", tok.pos)
        return tok

    def parse(self) -> DiffExpr:
        result = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.value!r}", tok.pos)
        return result

    def expr(self) -> DiffExpr:
        value = self.term()
        while self.peek().kind == "op" and self.peek().value in ("+", "-"):
            op = self.next().value
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> DiffExpr:
        value = self.unary()
        while self.peek().kind == "op" and self.peek().value in ("*", "/"):
            op = self.next().value
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs
        return value

    def unary(self) -> DiffExpr:
        tok = self.peek()
        if tok.kind == "op" and tok.value in ("+", "-"):
            self.next()
            inner = self.unary()
            return inner if tok.value == "+" else -inner
        return self.power()

    def power(self) -> DiffExpr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.value == "^":
            self.next()
            return base ** self.exponent()
        return base

    def exponent(self) -> int:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "(":
            self.next()
            value = self._signed_int()
            self.expect_op(")")
            return value
        return self._signed_int()

    def _signed_int(self) -> int:
        sign = 1
        tok = self.peek()
        if tok.kind == "op" and tok.value in ("+", "-"):
            self.next()
            sign = -1 if tok.value == "-" else 1
            tok = self.peek()
        if tok.kind != "int":
            raise ParseError("expected an integer exponent", tok.pos)
        self.next()
        return sign * tok.value

    def atom(self) -> DiffExpr:
        tok = self.next()
        if tok.kind == "int":
            return self.ctx.const(tok.value)
        if tok.kind == "op" and tok.value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == "ident":
            return self._ident_atom(tok)
        raise ParseError(f"unexpected token {tok.value!r}", tok.pos)

    def _ident_atom(self, tok: _Token) -> DiffExpr:
        name = tok.value
        x_match = _X_RE.match(name)
        if x_match:
            return self.ctx.x(int(x_match.group(1)))
        if name == "u":
            return self._jet(tok)
        if name in FN_HEADS:
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(")")
            return apply_fn(self.ctx, name, arg)
        raise ParseError(f"unknown identifier {name!r}", tok.pos)

    def _jet(self, utok: _Token) -> DiffExpr:
        self.expect_op("[")
        tok = self.next()
        if tok.kind != "ident":
            raise ParseError("expected a dependent name", tok.pos)
        dep = tok.value
        self.ctx.require_dep(dep)
        nxt = self.next()
        if nxt.kind == "op" and nxt.value == "]":
            return self.ctx.u(dep)
        if not (nxt.kind == "op" and nxt.value == ";"):
            raise ParseError("expected ';' or ']' in jet variable", nxt.pos)
        index = self._index()
        self.expect_op("]")
        return self.ctx.u(dep, index)

    def _index(self) -> MultiIndex:
        self.expect_op("(")
        entries = []
        while True:
            tok = self.next()
            if tok.kind != "int":
                raise ParseError("expected an index entry", tok.pos)
            entries.append(tok.value)
            tok = self.next()
            if tok.kind == "op" and tok.value == ")":
                break
            if not (tok.kind == "op" and tok.value == ","):
                raise ParseError("expected ',' or ')' in multi-index", tok.pos)
        return self.ctx.index(MultiIndex(entries))


def parse(text: str, ctx: Context) -> DiffExpr:
    return _Parser(text, ctx).parse()


# --- rendering ------------------------------------------------------------


def _render_atom_power(atom, e: int) -> str:
    kind = atom[0]
    if kind == "x":
        base = f"x{atom[1]}"
    elif kind == "u":
        idx = atom[2]
        base = f"u[{atom[1]}]" if idx.norm == 0 else f"u[{atom[1]};{idx}]"
    elif kind == "fn":
        base = f"{atom[1]}({render(atom[2])})"
    elif kind == "rc":
        return f"({render(atom[1])})^{-e}"
    else:
        raise DomainError(f"unknown atom kind {atom!r}")
    return base if e == 1 else f"{base}^{e}"


def render(expr: DiffExpr) -> str:
    """Deterministic, re-parseable text for a canonical expression."""
    if expr.is_zero:
        return "0"
    pieces: list[str] = []
    for mono, coeff in expr.terms:
        sign = "-" if coeff < 0 else "+"
        c = abs(coeff)
        factors = [_render_atom_power(a, e) for a, e in mono]
        if not factors:
            body = str(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(c)] + factors)
        if not pieces:
            pieces.append(body if sign == "+" else f"-{body}")
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)
