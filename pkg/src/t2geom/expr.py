"""Expression language for Lagrangians, metric entries and diffeomorphisms.

Grammar (whitespace insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?          right associative
    exponent:= '-'? power                    must fold to a constant
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
    VAR     := ('x' | 'y1' | 'y2') '_' INDEX  (1-based)
    FUNC    := exp | log | sin | cos | sqrt

``^`` binds tighter than unary minus, so ``-x_1^2`` is ``-(x_1^2)``.
Compiled expressions run on any scalar type understood by
:mod:`t2geom.jetscalar` (floats, numpy arrays, jets).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Union

from . import jetscalar as js
from .errors import ParseError, VariableIndexError

VAR_KINDS = ("x", "y1", "y2")
UNARY_FUNCS = ("exp", "log", "sin", "cos", "sqrt")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x", "y1" or "y2"
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # "+", "-", "*", "/", "^"
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]
ExprAst = Node

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>(?:y1|y2|x)_\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    pos = 0
    tokens = []
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, n: int, params: dict | None = None):
        self.src = src
        self.n = n
        self.params = params or {}
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, val, pos = self.take()
        if val != text:
            raise ParseError(f"expected {text!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Unary("neg", self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            exponent = _fold_constant(self.power())
            if exponent is None:
                raise ParseError("exponent must be a constant", pos)
            return Binary("^", base, Const(-exponent if neg else exponent))
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "var":
            name, idx = val.split("_")
            idx = int(idx)
            if idx < 1 or idx > self.n:
                raise VariableIndexError(f"variable {val} out of range 1..{self.n}", pos)
            return Var(name, idx)
        if kind == "name":
            if val in self.params:
                return Const(float(self.params[val]))
            if val in UNARY_FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(val, arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)


def _fold_constant(node: Node):
    """Value of a variable-free expression, or None."""
    try:
        f = compile_expr(node)
        return float(f((), (), ()))
    except (IndexError, TypeError):
        return None


def parse_expression(src: str, n: int, params: dict | None = None) -> Node:
    """Parse ``src`` into an AST for dimension ``n``.

    ``params`` maps extra identifiers to numeric constants.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    return _Parser(src, n, params).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(node: Node) -> str:
    """Print an AST so that ``parse_expression(to_source(a)) == a``."""

    def fmt(node, parent_prec=0, right=False):
        if isinstance(node, Const):
            s = repr(float(node.value))
            if node.value < 0:
                s = f"({s})"
            return s
        if isinstance(node, Var):
            return f"{node.kind}_{node.index}"
        if isinstance(node, Unary):
            if node.op == "neg":
                s = "-" + fmt(node.arg, _PREC["neg"])
                return f"({s})" if parent_prec >= _PREC["neg"] else s
            return f"{node.op}({fmt(node.arg)})"
        prec = _PREC[node.op]
        if node.op == "^":
            s = f"{fmt(node.left, prec + 1)}^{fmt(node.right, prec)}"
        else:
            s = f"{fmt(node.left, prec)}{node.op}{fmt(node.right, prec, right=True)}"
        need = prec < parent_prec or (prec == parent_prec and right)
        return f"({s})" if need else s

    return fmt(node)


# -- evaluation --------------------------------------------------------------


def compile_expr(node: Node) -> Callable:
    """Compile to ``f(x, y1, y2)`` over sequences of generic scalars."""
    if isinstance(node, Const):
        v = float(node.value)
        return lambda x, y1, y2: v
    if isinstance(node, Var):
        i = node.index - 1
        if node.kind == "x":
            return lambda x, y1, y2: x[i]
        if node.kind == "y1":
            return lambda x, y1, y2: y1[i]
        return lambda x, y1, y2: y2[i]
    if isinstance(node, Unary):
        f = compile_expr(node.arg)
        if node.op == "neg":
            return lambda x, y1, y2: -f(x, y1, y2)
        fn = js.FUNCTIONS[node.op]
        return lambda x, y1, y2: fn(f(x, y1, y2))
    a = compile_expr(node.left)
    if node.op == "^":
        r = node.right.value
        if float(r).is_integer():
            r = int(r)
        return lambda x, y1, y2: js.power(a(x, y1, y2), r)
    b = compile_expr(node.right)
    if node.op == "+":
        return lambda x, y1, y2: a(x, y1, y2) + b(x, y1, y2)
    if node.op == "-":
        return lambda x, y1, y2: a(x, y1, y2) - b(x, y1, y2)
    if node.op == "*":
        return lambda x, y1, y2: a(x, y1, y2) * b(x, y1, y2)
    return lambda x, y1, y2: js.divide(a(x, y1, y2), b(x, y1, y2))


def evaluate(node: Node, x, y1=(), y2=()):
    return compile_expr(node)(x, y1, y2)


def variables(node: Node) -> set:
    if isinstance(node, Var):
        return {(node.kind, node.index)}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Unary):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


# -- symbolic manipulation ------------------------------------------------------
# Used for metric entries and coordinate changes, whose derivatives have to be
# evaluable on jets themselves.

ZERO = Const(0.0)
ONE = Const(1.0)


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def div(a, b):
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Binary("/", a, b)


def neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def pow_(a, r: float):
    if r == 0:
        return ONE
    if r == 1:
        return a
    return Binary("^", a, Const(float(r)))


def differentiate(node: Node, kind: str, index: int) -> Node:
    """Symbolic partial derivative with respect to ``kind_index``."""
    d = lambda m: differentiate(m, kind, index)  # noqa: E731
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if (node.kind, node.index) == (kind, index) else ZERO
    if isinstance(node, Unary):
        u = node.arg
        du = d(u)
        if _is(du, 0):
            return ZERO
        if node.op == "neg":
            return neg(du)
        if node.op == "exp":
            return mul(node, du)
        if node.op == "log":
            return div(du, u)
        if node.op == "sin":
            return mul(Unary("cos", u), du)
        if node.op == "cos":
            return neg(mul(Unary("sin", u), du))
        if node.op == "sqrt":
            return div(du, mul(Const(2.0), node))
        raise ValueError(node.op)
    a, b = node.left, node.right
    if node.op == "^":
        r = b.value
        da = d(a)
        if _is(da, 0):
            return ZERO
        return mul(mul(Const(r), pow_(a, r - 1)), da)
    da, db = d(a), d(b)
    if node.op == "+":
        return add(da, db)
    if node.op == "-":
        return sub(da, db)
    if node.op == "*":
        return add(mul(da, b), mul(a, db))
    # quotient rule
    return sub(div(da, b), div(mul(a, db), pow_(b, 2)))


def substitute(node: Node, mapping: dict) -> Node:
    """Replace variables, keyed by ``(kind, index)``, with sub-expressions."""
    if isinstance(node, Var):
        return mapping.get((node.kind, node.index), node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Unary):
        return Unary(node.op, substitute(node.arg, mapping))
    return Binary(node.op, substitute(node.left, mapping), substitute(node.right, mapping))
