"""A small text syntax for polynomial differential forms.

::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/\\' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' INT)?
    primary := INT | NAME | '(' expr ')' | 'd' '(' expr ')' | 'i' '(' field ';' expr ')'
    field   := 'E' | 'xi' INT | 'ddx' INT | 'ddy' INT | 'ddth' INT | '[' expr (',' expr)* ']'

Names are the coordinates ``x1 y1 x2 y2 …`` (and angles ``th1 th2 …`` when the
ambient space has them) and the covector atoms ``dx1 dy1 dth1 …``.  ``/\\`` is
the wedge product; ``*`` multiplies when at least one side is a function;
``/`` divides by a rational constant.  ``format_form`` prints in the same
grammar, so ``parse_form(format_form(f)) == f``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .actions import LinearAction, induced_vector_field
from .forms import (
    DifferentialForm,
    PolyVectorField,
    euler_field,
    exterior_derivative,
    interior_product,
    wedge,
)
from .poly import Poly


class ParseError(ValueError):
    """Syntax or semantic error, with a 1-based line and column."""

    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.message = message
        super().__init__(f"line {self.line}, column {self.column}: {message}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<wedge>/\\)
  | (?P<op>[-+*/^();,\[\]])
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


@dataclass(frozen=True)
class Space:
    """Coordinate layout: ``angles`` angle coordinates followed by ``n`` complex planes."""

    n: int
    angles: int = 0
    action: LinearAction | None = None

    @property
    def dim(self) -> int:
        return self.angles + 2 * self.n

    def names(self) -> list[str]:
        out = [f"th{j + 1}" for j in range(self.angles)]
        for i in range(1, self.n + 1):
            out += [f"x{i}", f"y{i}"]
        return out

    def index(self, base: str, k: int) -> int | None:
        if base == "th":
            return k - 1 if 1 <= k <= self.angles else None
        if base in ("x", "y") and 1 <= k <= self.n:
            return self.angles + 2 * (k - 1) + (base == "y")
        return None


_SYMBOL = re.compile(r"^(d|dd)?(x|y|th)(\d+)$")


def _infer_space(tokens: Sequence[Token]) -> Space:
    n = angles = 0
    for t in tokens:
        if t.kind == "name":
            m = _SYMBOL.match(t.text)
            if m:
                k = int(m.group(3))
                if m.group(2) == "th":
                    angles = max(angles, k)
                else:
                    n = max(n, k)
    return Space(max(n, 1) if not angles else n, angles)


class _Parser:
    def __init__(self, text: str, space: Space):
        self.text = text
        self.tokens = tokenize(text)
        self.space = space
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        return ParseError(message, self.text, (tok or self.tok).pos)

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind != "name":
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return t

    # -- grammar
    def parse(self) -> DifferentialForm:
        form = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return form

    def expr(self) -> DifferentialForm:
        acc = self.term()
        while self.tok.text in ("+", "-"):
            op = self.tok
            self.i += 1
            rhs = self.term()
            if rhs.degree != acc.degree:
                raise self.error(f"cannot add a {acc.degree}-form and a {rhs.degree}-form", op)
            acc = acc + rhs if op.text == "+" else acc - rhs
        return acc

    def term(self) -> DifferentialForm:
        acc = self.unary()
        while True:
            op = self.tok
            if op.kind == "wedge":
                self.i += 1
                acc = self._wedge(acc, self.unary(), op)
            elif op.text == "*":
                self.i += 1
                rhs = self.unary()
                if acc.degree and rhs.degree:
                    raise self.error("'*' multiplies by functions; use '/\\' to wedge two forms", op)
                acc = self._wedge(acc, rhs, op)
            elif op.text == "/":
                self.i += 1
                rhs = self.unary()
                c = self._constant(rhs, op)
                if c == 0:
                    raise self.error("division by zero", op)
                acc = acc.scale(1 / c)
            else:
                return acc

    def _wedge(self, a: DifferentialForm, b: DifferentialForm, op: Token) -> DifferentialForm:
        if a.degree + b.degree > self.space.dim:
            # still well defined: the product vanishes
            return DifferentialForm.zero(self.space.dim, min(a.degree + b.degree, self.space.dim))
        return wedge(a, b)

    def _constant(self, f: DifferentialForm, tok: Token) -> Fraction:
        if f.degree or not f.coefficient(()).is_constant():
            raise self.error("expected a rational constant", tok)
        return f.coefficient(()).constant_term()

    def unary(self) -> DifferentialForm:
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> DifferentialForm:
        base = self.primary()
        op = self.accept("^")
        if op is None:
            return base
        t = self.tok
        if t.kind != "int":
            raise self.error("exponent must be a non-negative integer")
        self.i += 1
        if base.degree:
            raise self.error("only functions can be raised to a power", op)
        return DifferentialForm.function(base.coefficient(()) ** int(t.text))

    def primary(self) -> DifferentialForm:
        t = self.tok
        dim = self.space.dim
        if t.kind == "int":
            self.i += 1
            return DifferentialForm.constant(dim, int(t.text))
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "name":
            if t.text == "d" and self.tokens[self.i + 1].text == "(":
                self.i += 1
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                if inner.degree >= dim:
                    return DifferentialForm.zero(dim, dim)
                return exterior_derivative(inner)
            if t.text == "i" and self.tokens[self.i + 1].text == "(":
                self.i += 1
                self.expect("(")
                fld = self.field()
                self.expect(";")
                inner = self.expr()
                self.expect(")")
                if inner.degree == 0:
                    raise self.error("contraction needs a form of positive degree", t)
                return interior_product(fld, inner)
            return self.symbol(t)
        raise self.error(f"unexpected {t.text or 'end of input'!r}")

    def symbol(self, t: Token) -> DifferentialForm:
        m = _SYMBOL.match(t.text)
        if not m or m.group(1) == "dd":
            raise self.error(f"unknown symbol {t.text!r}", t)
        idx = self.space.index(m.group(2), int(m.group(3)))
        if idx is None:
            raise self.error(f"unknown coordinate {t.text!r} (coordinates: {' '.join(self.space.names())})", t)
        self.i += 1
        if m.group(1) == "d":
            return DifferentialForm.dx(self.space.dim, idx)
        return DifferentialForm.function(Poly.var(self.space.dim, idx))

    def field(self) -> PolyVectorField:
        t = self.tok
        dim = self.space.dim
        if self.accept("["):
            comps = [self._function(self.expr(), t)]
            while self.accept(","):
                comps.append(self._function(self.expr(), t))
            self.expect("]")
            if len(comps) != dim:
                raise self.error(f"vector field needs {dim} components, got {len(comps)}", t)
            return PolyVectorField(comps)
        if t.kind != "name":
            raise self.error("expected a vector field")
        self.i += 1
        if t.text == "E":
            return euler_field(dim)
        m = re.match(r"^xi(\d+)$", t.text)
        if m:
            action = self.space.action
            if action is None or not action.is_torus or self.space.angles:
                raise self.error("xi<k> needs a torus action on the coordinate space (use --example)", t)
            k = int(m.group(1))
            if not 1 <= k <= action.group.rank:
                raise self.error(f"the action has {action.group.rank} Lie algebra basis vectors", t)
            return induced_vector_field(action, [int(j == k - 1) for j in range(action.group.rank)])
        m = _SYMBOL.match(t.text)
        if m and m.group(1) == "dd":
            idx = self.space.index(m.group(2), int(m.group(3)))
            if idx is None:
                raise self.error(f"unknown coordinate in {t.text!r}", t)
            return PolyVectorField.coordinate(dim, idx)
        raise self.error(f"unknown vector field {t.text!r}", t)

    def _function(self, f: DifferentialForm, tok: Token) -> Poly:
        if f.degree:
            raise self.error("vector field components must be functions", tok)
        return f.coefficient(())


def parse_form(text: str, n: int | None = None, angles: int = 0, action: LinearAction | None = None) -> DifferentialForm:
    """Parse ``text`` into a form on ``R^angles × C^n`` (``n`` inferred when omitted)."""
    if action is not None:
        n = action.space.n if n is None else n
    if n is None:
        space = _infer_space(tokenize(text))
        space = Space(space.n, max(space.angles, angles))
    else:
        space = Space(n, angles, action)
    if space.dim == 0:
        raise ParseError("empty coordinate space", text, 0)
    return _Parser(text, space).parse()


def coordinate_names(dim: int, angles: int = 0) -> list[str]:
    if (dim - angles) % 2:
        raise ValueError("coordinates after the angles must come in (x, y) pairs")
    return Space((dim - angles) // 2, angles).names()


def format_form(form: DifferentialForm, angles: int = 0) -> str:
    """Canonical text in the parser's grammar."""
    return form.format(coordinate_names(form.dim, angles))
