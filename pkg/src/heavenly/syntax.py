"""Text syntax shared by scalar expressions, forms and structure equations.

Grammar (``^`` is power when both sides are scalars with an integer exponent,
wedge otherwise; it binds tighter than ``*``)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, List, Optional

__all__ = ["ParseError", "Token", "tokenize", "Parser", "parse_scalar"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, OP, END
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^(),]))")


def tokenize(text: str, line: int = 1, col0: int = 1) -> List[Token]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            j = pos
            while j < n and text[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {text[j]!r}", line, col0 + j)
        num, name, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            out.append(Token("NUM", num, line, col0 + start))
        elif name is not None:
            out.append(Token("NAME", name, line, col0 + start))
        else:
            out.append(Token("OP", "^" if op == "**" else op, line, col0 + start))
        pos = m.end()
    out.append(Token("END", "", line, col0 + n))
    return out


class Parser:
    """Recursive-descent evaluator parameterised by value callbacks.

    ``name(tok)`` resolves identifiers, ``call(tok, arg)`` handles ``f(expr)``,
    ``number(int)`` builds literals and ``caret(a, b, rhs_token)`` gives ``^``
    its meaning.  Values use Python's ``+ - * /`` operators.
    """

    def __init__(
        self,
        tokens: List[Token],
        name: Callable,
        number: Callable,
        caret: Callable,
        call: Optional[Callable] = None,
    ):
        self.toks = tokens
        self.i = 0
        self.name = name
        self.number = number
        self.caret = caret
        self.call = call

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _err(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def _next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def _accept(self, op: str) -> bool:
        t = self.tok
        if t.kind == "OP" and t.text == op:
            self.i += 1
            return True
        return False

    def parse(self):
        v = self.expr()
        if self.tok.kind != "END":
            self._err(f"unexpected {self.tok.text!r}")
        return v

    def expr(self):
        v = self.term()
        while True:
            if self._accept("+"):
                v = v + self.term()
            elif self._accept("-"):
                v = v - self.term()
            else:
                return v

    def term(self):
        v = self.unary()
        while True:
            if self._accept("*"):
                v = v * self.unary()
            elif self.tok.kind == "OP" and self.tok.text == "/":
                t = self._next()
                d = self.unary()
                try:
                    v = v / d
                except ZeroDivisionError as e:
                    self._err(str(e), t)
            else:
                return v

    def unary(self):
        if self._accept("-"):
            return -self.unary()
        if self._accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "OP" and self.tok.text == "^":
            t = self._next()
            rhs_tok = self.tok
            rhs = self.unary()
            try:
                return self.caret(base, rhs, rhs_tok)
            except (TypeError, ValueError) as e:
                self._err(str(e), t)
        return base

    def atom(self):
        t = self._next()
        if t.kind == "NUM":
            return self.number(int(t.text))
        if t.kind == "NAME":
            if self.tok.kind == "OP" and self.tok.text == "(":
                if self.call is None:
                    self._err(f"unexpected call of {t.text!r}", t)
                self._next()
                arg = self.expr()
                if not self._accept(")"):
                    self._err("expected ')'")
                return self.call(t, arg)
            return self.name(t)
        if t.kind == "OP" and t.text == "(":
            v = self.expr()
            if not self._accept(")"):
                self._err("expected ')'")
            return v
        self._err("unexpected end of input" if t.kind == "END" else f"unexpected {t.text!r}", t)


def _scalar_caret(base, rhs, tok):
    from .symexpr import Scalar

    if not isinstance(rhs, Scalar) or not rhs.is_const() or rhs.const_value().denominator != 1:
        raise ValueError("exponent must be an integer literal")
    return Scalar.coerce(base) ** int(rhs.const_value())


def parse_scalar(text: str):
    """Parse an expression such as ``u_xx*u_yy - u_xy^2`` into a Scalar."""
    from .symexpr import Scalar

    def name(tok):
        return Scalar.from_var(tok.text)

    p = Parser(tokenize(text), name, Scalar.const, _scalar_caret)
    return Scalar.coerce(p.parse())
