"""A small expression language for scalar functions of named coordinates.

Grammar (infix, case sensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"

"^" binds tighter than unary minus, which binds tighter than "*" and "/".
Identifiers match ``[A-Za-z_][A-Za-z0-9_]*``; the function names sin, cos,
tan, exp, log and sqrt are reserved.  Numeric literals are decimal with an
optional fraction and exponent.

Trees are immutable.  Evaluation is pure and runs over three scalar
carriers: plain floats, first-order dual numbers (gradients) and
second-order dual numbers (Hessians), so derivatives are exact to machine
rounding rather than approximated.  Integer exponents are expanded by
repeated multiplication, so negative bases are fine there; any other
exponent requires a positive base.  Central finite differences live at the
bottom of this module as an independent cross-check of the dual-number
results and share no code with them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, ParseError, UnboundVariableError

UNARY_FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")
BINARY_OPS = ("+", "-", "*", "/", "^")


# ---------------------------------------------------------------------------
# Syntax trees


class Node:
    """Base class of expression tree nodes.

    Arithmetic operators are overloaded to build new trees, which keeps
    programmatic composition readable: ``a * b - c`` produces the same tree
    as parsing the corresponding source text.
    """

    __slots__ = ()

    def __add__(self, other):
        return Binary("+", self, _as_node(other))

    def __radd__(self, other):
        return Binary("+", _as_node(other), self)

    def __sub__(self, other):
        return Binary("-", self, _as_node(other))

    def __rsub__(self, other):
        return Binary("-", _as_node(other), self)

    def __mul__(self, other):
        return Binary("*", self, _as_node(other))

    def __rmul__(self, other):
        return Binary("*", _as_node(other), self)

    def __truediv__(self, other):
        return Binary("/", self, _as_node(other))

    def __rtruediv__(self, other):
        return Binary("/", _as_node(other), self)

    def __pow__(self, other):
        return Binary("^", self, _as_node(other))

    def __neg__(self):
        return Unary("neg", self)


@dataclass(frozen=True, slots=True)
class Const(Node):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Node):
    name: str


@dataclass(frozen=True, slots=True)
class Unary(Node):
    op: str  # "neg" or a function name
    arg: Node


@dataclass(frozen=True, slots=True)
class Binary(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


def _as_node(value) -> Node:
    if isinstance(value, Node):
        return value
    return Const(float(value))


# ---------------------------------------------------------------------------
# Printing

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5

_BINARY_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def _node_prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _BINARY_PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC_NEG
    return _PREC_ATOM


def to_source(node: Node) -> str:
    """Render a tree as source text that parses back to the same tree.

    Parentheses are inserted only where precedence or associativity
    requires them.
    """
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_source(node.arg)
            if _node_prec(node.arg) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({to_source(node.arg)})"
    prec = _BINARY_PREC[node.op]
    left = to_source(node.left)
    right = to_source(node.right)
    # "^" associates right, the others left; same-precedence children on the
    # non-associating side keep their parentheses.
    if _node_prec(node.left) < prec or (_node_prec(node.left) == prec and node.op == "^"):
        left = f"({left})"
    if _node_prec(node.right) < prec or (_node_prec(node.right) == prec and node.op != "^"):
        right = f"({right})"
    return f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)
_WS_RE = re.compile(r"\s*")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    length = len(source)
    while pos < length:
        pos = _WS_RE.match(source, pos).end()
        if pos >= length:
            break
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(
                f"unexpected character {source[pos]!r}",
                pos,
                "a number, variable, function or operator",
            )
        kind = match.lastgroup
        tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", length))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def fail(self, expected: str):
        kind, text, offset = self.peek()
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", offset, expected)

    def expect_op(self, op: str, expected: str):
        kind, text, _ = self.peek()
        if kind != "op" or text != op:
            self.fail(expected)
        self.advance()

    def parse(self) -> Node:
        node = self.parse_expr()
        if self.peek()[0] != "end":
            self.fail("an operator or end of input")
        return node

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = Binary(text, node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Binary(text, node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            # The exponent may start with a unary minus; recursion through
            # parse_unary -> parse_power makes "^" right associative.
            return Binary("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Node:
        kind, text, offset = self.peek()
        if kind == "num":
            self.advance()
            return Const(float(text))
        if kind == "ident":
            self.advance()
            next_kind, next_text, _ = self.peek()
            if next_kind == "op" and next_text == "(":
                if text not in UNARY_FUNCTIONS:
                    raise ParseError(
                        f"unknown function '{text}'",
                        offset,
                        "one of " + ", ".join(UNARY_FUNCTIONS),
                    )
                self.advance()
                arg = self.parse_expr()
                self.expect_op(")", "')'")
                return Unary(text, arg)
            if text in UNARY_FUNCTIONS:
                self.fail(f"'(' after function name '{text}'")
            return Var(text)
        if kind == "op" and text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect_op(")", "')'")
            return node
        self.fail("a number, variable, function or '('")


# ---------------------------------------------------------------------------
# Expressions

def _collect_vars(node: Node, seen: dict[str, None]):
    if isinstance(node, Var):
        seen.setdefault(node.name)
    elif isinstance(node, Unary):
        _collect_vars(node.arg, seen)
    elif isinstance(node, Binary):
        _collect_vars(node.left, seen)
        _collect_vars(node.right, seen)


@dataclass(frozen=True)
class Expression:
    """An immutable expression tree plus its variables in order of first use."""

    root: Node
    free_vars: tuple[str, ...]

    def __str__(self) -> str:
        return to_source(self.root)

    def evaluate(self, bindings: Mapping[str, float]) -> float:
        """Evaluate at a point.  Extra bindings are ignored."""
        env = {name: float(value) for name, value in bindings.items()}
        return _eval(self.root, env)

    def gradient(self, variables: Sequence[str], bindings: Mapping[str, float]) -> np.ndarray:
        """Exact first derivatives with respect to ``variables`` at a point."""
        return value_gradient(self, variables, bindings)[1]

    def hessian(self, variables: Sequence[str], bindings: Mapping[str, float]) -> np.ndarray:
        """Exact second derivatives; symmetric to the bit by construction."""
        return value_gradient_hessian(self, variables, bindings)[2]


def expression(root: Node) -> Expression:
    """Wrap a tree, collecting free variables in order of first appearance."""
    seen: dict[str, None] = {}
    _collect_vars(root, seen)
    return Expression(root, tuple(seen))


def parse(source: str) -> Expression:
    """Parse source text into an :class:`Expression`.

    Raises :class:`ParseError` carrying the byte offset of the failure and a
    description of what was expected there.
    """
    return expression(_Parser(source).parse())


def substitute(expr: Expression, replacements: Mapping[str, Expression | Node]) -> Expression:
    """Replace variables by sub-expressions, returning a new expression."""
    table = {
        name: (value.root if isinstance(value, Expression) else value)
        for name, value in replacements.items()
    }

    def walk(node: Node) -> Node:
        if isinstance(node, Var):
            return table.get(node.name, node)
        if isinstance(node, Unary):
            return Unary(node.op, walk(node.arg))
        if isinstance(node, Binary):
            return Binary(node.op, walk(node.left), walk(node.right))
        return node

    return expression(walk(expr.root))


# ---------------------------------------------------------------------------
# Dual numbers (forward mode)


class Dual:
    """Value plus first derivatives, propagated through arithmetic."""

    __slots__ = ("v", "g")

    def __init__(self, v: float, g: tuple):
        self.v = v
        self.g = g

    def chain(self, value: float, slope: float) -> "Dual":
        return Dual(value, tuple(slope * a for a in self.g))

    def __add__(self, other):
        if type(other) is Dual:
            return Dual(self.v + other.v, tuple(a + b for a, b in zip(self.g, other.g)))
        return Dual(self.v + other, self.g)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is Dual:
            return Dual(self.v - other.v, tuple(a - b for a, b in zip(self.g, other.g)))
        return Dual(self.v - other, self.g)

    def __rsub__(self, other):
        return Dual(other - self.v, tuple(-a for a in self.g))

    def __mul__(self, other):
        if type(other) is Dual:
            sv, ov = self.v, other.v
            return Dual(sv * ov, tuple(a * ov + sv * b for a, b in zip(self.g, other.g)))
        return Dual(self.v * other, tuple(a * other for a in self.g))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if type(other) is Dual:
            ov = other.v
            q = self.v / ov
            return Dual(q, tuple((a - q * b) / ov for a, b in zip(self.g, other.g)))
        return Dual(self.v / other, tuple(a / other for a in self.g))

    def __rtruediv__(self, other):
        q = other / self.v
        return Dual(q, tuple(-q * b / self.v for b in self.g))

    def __neg__(self):
        return Dual(-self.v, tuple(-a for a in self.g))


class Dual2:
    """Value plus first and second derivatives (full symmetric Hessian)."""

    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: tuple, h: tuple):
        self.v = v
        self.g = g
        self.h = h  # tuple of row tuples

    def chain(self, value: float, slope: float, curve: float) -> "Dual2":
        g = self.g
        new_h = tuple(
            tuple(curve * g[i] * g[j] + slope * self.h[i][j] for j in range(len(g)))
            for i in range(len(g))
        )
        return Dual2(value, tuple(slope * a for a in g), new_h)

    def __add__(self, other):
        if type(other) is Dual2:
            h = tuple(
                tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.h, other.h)
            )
            return Dual2(self.v + other.v, tuple(a + b for a, b in zip(self.g, other.g)), h)
        return Dual2(self.v + other, self.g, self.h)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is Dual2:
            h = tuple(
                tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.h, other.h)
            )
            return Dual2(self.v - other.v, tuple(a - b for a, b in zip(self.g, other.g)), h)
        return Dual2(self.v - other, self.g, self.h)

    def __rsub__(self, other):
        h = tuple(tuple(-a for a in row) for row in self.h)
        return Dual2(other - self.v, tuple(-a for a in self.g), h)

    def __mul__(self, other):
        if type(other) is Dual2:
            sv, ov = self.v, other.v
            sg, og = self.g, other.g
            k = len(sg)
            h = tuple(
                tuple(
                    self.h[i][j] * ov + sg[i] * og[j] + sg[j] * og[i] + sv * other.h[i][j]
                    for j in range(k)
                )
                for i in range(k)
            )
            return Dual2(sv * ov, tuple(a * ov + sv * b for a, b in zip(sg, og)), h)
        h = tuple(tuple(a * other for a in row) for row in self.h)
        return Dual2(self.v * other, tuple(a * other for a in self.g), h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if type(other) is Dual2:
            ov = other.v
            q = self.v / ov
            og = other.g
            g = tuple((a - q * b) / ov for a, b in zip(self.g, og))
            k = len(g)
            h = tuple(
                tuple(
                    (self.h[i][j] - g[i] * og[j] - g[j] * og[i] - q * other.h[i][j]) / ov
                    for j in range(k)
                )
                for i in range(k)
            )
            return Dual2(q, g, h)
        h = tuple(tuple(a / other for a in row) for row in self.h)
        return Dual2(self.v / other, tuple(a / other for a in self.g), h)

    def __rtruediv__(self, other):
        ov = self.v
        q = other / ov
        og = self.g
        g = tuple(-q * b / ov for b in og)
        k = len(g)
        h = tuple(
            tuple((-g[i] * og[j] - g[j] * og[i] - q * self.h[i][j]) / ov for j in range(k))
            for i in range(k)
        )
        return Dual2(q, g, h)

    def __neg__(self):
        h = tuple(tuple(-a for a in row) for row in self.h)
        return Dual2(-self.v, tuple(-a for a in self.g), h)


def _tan_slope(v: float) -> float:
    t = math.tan(v)
    return 1.0 + t * t


# (value, slope, curvature) for each unary function.
_UNARY_TABLE: dict[str, tuple[Callable, Callable, Callable]] = {
    "sin": (math.sin, math.cos, lambda v: -math.sin(v)),
    "cos": (math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v)),
    "tan": (math.tan, _tan_slope, lambda v: 2.0 * math.tan(v) * _tan_slope(v)),
    "exp": (math.exp, math.exp, math.exp),
    "log": (math.log, lambda v: 1.0 / v, lambda v: -1.0 / (v * v)),
    "sqrt": (
        math.sqrt,
        lambda v: 0.5 / math.sqrt(v),
        lambda v: -0.25 / (v * math.sqrt(v)),
    ),
}


def _apply_unary(op: str, x, node: Node):
    value_fn, slope_fn, curve_fn = _UNARY_TABLE[op]
    try:
        t = type(x)
        if t is float:
            return value_fn(x)
        v = x.v
        if t is Dual:
            return x.chain(value_fn(v), slope_fn(v))
        return x.chain(value_fn(v), slope_fn(v), curve_fn(v))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"{op}: {exc}", to_source(node)) from None


def _int_pow(base, n: int, node: Node):
    if n == 0:
        return 1.0
    positive = abs(n)
    acc = base
    for _ in range(positive - 1):
        acc = acc * base
    if n < 0:
        try:
            return 1.0 / acc
        except ZeroDivisionError:
            raise DomainError("negative power of zero", to_source(node)) from None
    return acc


def _pow(base, exponent, node: Node):
    # A plain-float exponent carries no derivatives, so an integer value
    # selects the repeated-multiplication route (valid for any base).
    if type(exponent) is float and exponent.is_integer() and abs(exponent) <= 1024:
        return _int_pow(base, int(exponent), node)
    base_value = base if type(base) is float else base.v
    if base_value <= 0.0:
        raise DomainError(
            "non-integer or varying exponent requires a positive base", to_source(node)
        )
    log_base = _apply_unary("log", base, node)
    return _apply_unary("exp", exponent * log_base, node)


def _eval(node: Node, env: Mapping[str, object]):
    cls = node.__class__
    if cls is Var:
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(node.name) from None
    if cls is Const:
        return node.value
    if cls is Unary:
        x = _eval(node.arg, env)
        if node.op == "neg":
            return -x
        return _apply_unary(node.op, x, node)
    left = _eval(node.left, env)
    op = node.op
    if op == "^":
        return _pow(left, _eval(node.right, env), node)
    right = _eval(node.right, env)
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    try:
        return left / right
    except ZeroDivisionError:
        raise DomainError("division by zero", to_source(node)) from None


def _seeded_env(
    variables: Sequence[str],
    bindings: Mapping[str, float],
    order: int,
) -> dict:
    k = len(variables)
    env: dict[str, object] = {}
    for name, value in bindings.items():
        env[name] = float(value)
    zero_row = (0.0,) * k
    for i, name in enumerate(variables):
        try:
            value = float(bindings[name])
        except KeyError:
            raise UnboundVariableError(name) from None
        seed = tuple(1.0 if j == i else 0.0 for j in range(k))
        if order == 1:
            env[name] = Dual(value, seed)
        else:
            env[name] = Dual2(value, seed, tuple(zero_row for _ in range(k)))
    return env


def value_gradient(
    expr: Expression, variables: Sequence[str], bindings: Mapping[str, float]
) -> tuple[float, np.ndarray]:
    """Value and exact gradient in one forward pass."""
    result = _eval(expr.root, _seeded_env(variables, bindings, order=1))
    if type(result) is Dual:
        return result.v, np.array(result.g, dtype=float)
    return float(result), np.zeros(len(variables))


def value_gradient_hessian(
    expr: Expression, variables: Sequence[str], bindings: Mapping[str, float]
) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian in one forward pass.

    The Hessian's upper triangle is computed once and mirrored, so the
    returned matrix is symmetric to exact floating-point equality.
    """
    k = len(variables)
    result = _eval(expr.root, _seeded_env(variables, bindings, order=2))
    if type(result) is not Dual2:
        return float(result), np.zeros(k), np.zeros((k, k))
    raw = np.array(result.h, dtype=float)
    upper = np.triu(raw)
    hessian = upper + np.triu(raw, 1).T
    return result.v, np.array(result.g, dtype=float), hessian


# ---------------------------------------------------------------------------
# Symbolic differentiation (used to build derived coordinate maps)

_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(node: Node, value: float) -> bool:
    return isinstance(node, Const) and node.value == value


def _add(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Unary("neg", b)
    return Binary("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("/", a, b)


def _derivative(node: Node, var: str) -> Node:
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Unary):
        inner = _derivative(node.arg, var)
        arg = node.arg
        if node.op == "neg":
            return _ZERO if _is_const(inner, 0.0) else Unary("neg", inner)
        if node.op == "sin":
            return _mul(Unary("cos", arg), inner)
        if node.op == "cos":
            return _mul(Unary("neg", Unary("sin", arg)), inner)
        if node.op == "tan":
            sec2 = _add(_ONE, Binary("^", Unary("tan", arg), Const(2.0)))
            return _mul(sec2, inner)
        if node.op == "exp":
            return _mul(node, inner)
        if node.op == "log":
            return _div(inner, arg)
        if node.op == "sqrt":
            return _div(inner, _mul(Const(2.0), node))
    assert isinstance(node, Binary)
    a, b = node.left, node.right
    da, db = _derivative(a, var), _derivative(b, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), Binary("^", b, Const(2.0)))
    # Power rule; the general branch (varying exponent) uses a^b * (db*log a + b*da/a).
    if isinstance(b, Const):
        exponent = b.value
        reduced = Binary("^", a, Const(exponent - 1.0))
        return _mul(_mul(Const(exponent), reduced), da)
    log_term = _mul(db, Unary("log", a))
    ratio_term = _mul(b, _div(da, a))
    return _mul(node, _add(log_term, ratio_term))


def differentiate(expr: Expression, var: str) -> Expression:
    """Symbolic partial derivative with light constant folding."""
    return expression(_derivative(expr.root, var))


# ---------------------------------------------------------------------------
# Finite-difference oracles (independent of the dual-number machinery)


def fd_gradient(
    expr: Expression,
    variables: Sequence[str],
    bindings: Mapping[str, float],
    scale: float = 1e-6,
) -> np.ndarray:
    """Central-difference gradient with step ``scale * max(1, |x|)`` per variable."""
    base = {name: float(value) for name, value in bindings.items()}
    out = np.zeros(len(variables))
    for i, name in enumerate(variables):
        x = base[name]
        h = scale * max(1.0, abs(x))
        hi = dict(base)
        lo = dict(base)
        hi[name] = x + h
        lo[name] = x - h
        out[i] = (expr.evaluate(hi) - expr.evaluate(lo)) / (2.0 * h)
    return out


def fd_hessian(
    expr: Expression,
    variables: Sequence[str],
    bindings: Mapping[str, float],
    scale: float = 1e-4,
) -> np.ndarray:
    """Central-difference Hessian.

    Second differences lose half the working precision to cancellation, so
    the default step is larger than the gradient oracle's; 1e-4 balances
    truncation against rounding for well-scaled inputs.
    """
    base = {name: float(value) for name, value in bindings.items()}
    k = len(variables)
    steps = [scale * max(1.0, abs(base[name])) for name in variables]

    def at(offsets: dict[str, float]) -> float:
        point = dict(base)
        for name, delta in offsets.items():
            point[name] = point[name] + delta
        return expr.evaluate(point)

    center = expr.evaluate(base)
    out = np.zeros((k, k))
    for i, ni in enumerate(variables):
        hi = steps[i]
        out[i, i] = (at({ni: hi}) - 2.0 * center + at({ni: -hi})) / (hi * hi)
        for j in range(i + 1, k):
            nj = variables[j]
            hj = steps[j]
            value = (
                at({ni: hi, nj: hj})
                - at({ni: hi, nj: -hj})
                - at({ni: -hi, nj: hj})
                + at({ni: -hi, nj: -hj})
            ) / (4.0 * hi * hj)
            out[i, j] = value
            out[j, i] = value
    return out
