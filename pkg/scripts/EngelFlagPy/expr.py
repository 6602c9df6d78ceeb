"""Expression language for scalars, vector fields and forms on a chart.

    d_x          coordinate vector field
    dx           coordinate differential
    + - * / ^    over rationals and coordinates; / only by a rational constant
    &            wedge product
    ( )          grouping

Top-down operator precedence parsing; every value is exact.
"""
import re
from dataclasses import dataclass

from .errors import ExpressionSyntaxError, FormDegreeError, UnknownIdentifierError, ChartMismatchError
from .exterior import ExtForm, PolyScalar, VectorField, wedge

_SPACE = re.compile(r"\s*")
_FLOAT = re.compile(r"\d+\.\d*|\.\d+|\d+[eE][-+]?\d+")
_INT = re.compile(r"\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPS = "+-*/^&()"

# binding powers
_LBP = {"+": 10, "-": 10, "&": 15, "*": 20, "/": 20, "^": 30, ")": 0, "end": 0}
_UNARY = 25


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _where(src, pos):
    line = src.count("\n", 0, pos) + 1
    column = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, column


def tokenize(src):
    pos = 0
    while True:
        pos = _SPACE.match(src, pos).end()
        if pos >= len(src):
            yield _Token("end", "", pos)
            return
        if m := _FLOAT.match(src, pos):
            line, col = _where(src, pos)
            raise ExpressionSyntaxError(f"non-rational literal {m.group()!r}", line, col)
        if m := _INT.match(src, pos):
            yield _Token("int", m.group(), pos)
        elif m := _NAME.match(src, pos):
            yield _Token("name", m.group(), pos)
        elif src[pos] in _OPS:
            yield _Token(src[pos], src[pos], pos)
            pos += 1
            continue
        else:
            line, col = _where(src, pos)
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", line, col)
        pos = m.end()


class _Parser:
    def __init__(self, src, chart, objects=None):
        self.src = src
        self.chart = chart
        self.objects = objects or {}
        self.tokens = tokenize(src)
        self.token = next(self.tokens)

    def fail(self, msg, token=None):
        token = token or self.token
        line, col = _where(self.src, token.pos)
        raise ExpressionSyntaxError(msg, line, col)

    def advance(self):
        t = self.token
        # the end token repeats once input runs out
        self.token = next(self.tokens, t)
        return t

    def expression(self, rbp=0):
        t = self.advance()
        left = self.nud(t)
        while rbp < _LBP.get(self.token.kind, 0):
            t = self.advance()
            left = self.led(t, left)
        return left

    def parse(self):
        if self.token.kind == "end":
            self.fail("empty expression")
        value = self.expression()
        if self.token.kind != "end":
            self.fail(f"unexpected {self.token.text!r}")
        return value

    # prefix
    def nud(self, t):
        if t.kind == "int":
            return PolyScalar.constant(self.chart, int(t.text))
        if t.kind == "name":
            return self.resolve(t)
        if t.kind == "-":
            return self.combine(t, "neg", self.expression(_UNARY))
        if t.kind == "+":
            return self.expression(_UNARY)
        if t.kind == "(":
            value = self.expression()
            if self.token.kind != ")":
                self.fail("expected ')'")
            self.advance()
            return value
        self.fail(f"unexpected {t.text or 'end of input'!r}", t)

    # infix
    def led(self, t, left):
        if t.kind == "^":
            right = self.expression(_LBP["^"] - 1)
        else:
            right = self.expression(_LBP[t.kind])
        return self.combine(t, t.kind, left, right)

    def resolve(self, t):
        name = t.text
        chart = self.chart
        if name in chart.names:
            return PolyScalar.coordinate(chart, name)
        if name.startswith("d_") and name[2:] in chart.names:
            return VectorField.coordinate(chart, name[2:])
        if name.startswith("d") and name[1:] in chart.names:
            return ExtForm.differential(chart, name[1:])
        if name in self.objects:
            return self.objects[name]
        line, col = _where(self.src, t.pos)
        raise UnknownIdentifierError(f"unknown identifier {name!r} at line {line}, column {col}")

    def combine(self, t, op, left, right=None):
        try:
            if op == "neg":
                return -left
            if op == "+":
                return _add(left, right)
            if op == "-":
                return _add(left, -right)
            if op == "*":
                return _mul(left, right)
            if op == "/":
                if not isinstance(right, PolyScalar) or not right.is_constant() or right.is_zero():
                    self.fail("division only by a nonzero rational constant", t)
                return _mul(left, PolyScalar.constant(self.chart, 1 / right.constant_value()))
            if op == "^":
                if not isinstance(left, PolyScalar):
                    self.fail("only scalars can be raised to a power", t)
                k = right.constant_value() if isinstance(right, PolyScalar) and right.is_constant() else None
                if k is None or k.denominator != 1 or k < 0:
                    self.fail("exponent must be a non-negative integer", t)
                return left ** int(k)
            if op == "&":
                return wedge(_as_form(left), _as_form(right))
        except (TypeError, FormDegreeError, ChartMismatchError) as e:
            self.fail(f"cannot apply {t.text!r}: {e}", t)
        self.fail(f"unknown operator {op!r}", t)


def _as_form(v):
    if isinstance(v, ExtForm):
        return v
    if isinstance(v, PolyScalar):
        return ExtForm.function(v)
    raise TypeError(f"{type(v).__name__} is not a form")


def _add(a, b):
    if type(a) is not type(b):
        raise TypeError(f"{type(a).__name__} + {type(b).__name__}")
    return a + b


def _mul(a, b):
    if isinstance(a, PolyScalar):
        return a * b if isinstance(b, PolyScalar) else b.__rmul__(a)
    if isinstance(b, PolyScalar):
        return a.__rmul__(b)
    raise TypeError(f"{type(a).__name__} * {type(b).__name__}")


def parse_expression(src, chart, objects=None):
    """Parse src into a PolyScalar, VectorField or ExtForm on chart."""
    return _Parser(src, chart, objects).parse()


def print_expression(obj):
    return str(obj)
