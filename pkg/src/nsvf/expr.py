"""Planar scalar expressions: parsing, printing, evaluation and symbolic derivatives.

Grammar (whitespace insignificant)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | power
    power  := atom ("^" integer)?
    atom   := number | "x" | "y" | func "(" expr ")" | "(" expr ")"
    func   := "sin" | "cos" | "exp" | "sqrt"

Trees are immutable and hashable; equality is structural.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Union

__all__ = [
    "Expr", "Const", "Var", "Neg", "BinOp", "Pow", "Func",
    "ExprError", "ParseError", "EvaluationError",
    "parse", "evaluate", "differentiate", "fold", "to_string", "compile_expr",
    "const", "var", "add", "sub", "mul", "div",
]

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
VARIABLES = ("x", "y")


class ExprError(Exception):
    pass


class ParseError(ExprError):
    """Syntax error; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.column = column


class EvaluationError(ExprError, ArithmeticError):
    pass


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ExprError(f"power exponent must be a non-negative integer, got {self.exponent!r}")


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ExprError(f"unknown function {self.name!r}")


Expr = Union[Const, Var, Neg, BinOp, Pow, Func]

ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        if not text.isascii():
            bad = next(i for i, c in enumerate(text) if not c.isascii())
            raise ParseError("non-ASCII character", bad + 1)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, col = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", col)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", col)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, text, col = self.take()
            if kind == "op" and text == "-":
                raise ParseError("negative exponent", col)
            if kind != "num":
                found = "end of input" if kind == "end" else repr(text)
                raise ParseError(f"expected integer exponent, found {found}", col)
            if not text.isdigit():
                raise ParseError(f"non-integer exponent {text!r}", col)
            return Pow(base, int(text))
        return base

    def atom(self) -> Expr:
        kind, text, col = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            raise ParseError(f"unknown identifier {text!r}", col)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", col)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree (no folding)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG_PREC
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _NEG_PREC
    if isinstance(e, Pow):
        return _POW_PREC
    return _ATOM_PREC


def to_string(e: Expr) -> str:
    """Render with the minimal parentheses needed to re-parse to the same tree."""
    if isinstance(e, Const):
        if e.value < 0:
            return "-" + _fmt_number(-e.value)
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        if _prec(e.arg) < _NEG_PREC:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) < _ATOM_PREC:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    p = _PREC[e.op]
    left = to_string(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_string(e.right)
    # left-associative: equal precedence on the right needs parentheses
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


# ---------------------------------------------------------------------------
# Evaluation

def _check(v: float) -> float:
    if not math.isfinite(v):
        raise EvaluationError("non-finite result")
    return v


def _eval(e: Expr, x: float, y: float) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x if e.name == "x" else y
    if isinstance(e, Neg):
        return -_eval(e.arg, x, y)
    if isinstance(e, Pow):
        b = _eval(e.base, x, y)
        try:
            return _check(b ** e.exponent)
        except OverflowError:
            raise EvaluationError("overflow in power") from None
    if isinstance(e, Func):
        a = _eval(e.arg, x, y)
        if e.name == "sqrt":
            if a < 0:
                raise EvaluationError("sqrt of a negative number")
            return math.sqrt(a)
        try:
            return _check(getattr(math, e.name)(a))
        except OverflowError:
            raise EvaluationError(f"overflow in {e.name}") from None
    a = _eval(e.left, x, y)
    b = _eval(e.right, x, y)
    if e.op == "+":
        return _check(a + b)
    if e.op == "-":
        return _check(a - b)
    if e.op == "*":
        return _check(a * b)
    if b == 0.0:
        raise EvaluationError("division by zero")
    return _check(a / b)


def evaluate(e: Expr, x: float, y: float) -> float:
    """Value of ``e`` at ``(x, y)``; raises :class:`EvaluationError` instead of returning inf/nan."""
    return _check(_eval(e, float(x), float(y)))


def _py(e: Expr) -> str:
    if isinstance(e, Const):
        # parenthesised so that -3.0**4 cannot happen
        return f"({e.value!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{_py(e.arg)})"
    if isinstance(e, Pow):
        return f"({_py(e.base)}**{e.exponent})"
    if isinstance(e, Func):
        return f"_{e.name}({_py(e.arg)})"
    return f"({_py(e.left)}{e.op}{_py(e.right)})"


def _sqrt(a: float) -> float:
    if a < 0:
        raise EvaluationError("sqrt of a negative number")
    return math.sqrt(a)


_NAMESPACE = {"_sin": math.sin, "_cos": math.cos, "_exp": math.exp, "_sqrt": _sqrt}


def compile_expr(e: Expr) -> Callable[[float, float], float]:
    """Compile to a fast callable with the same error contract as :func:`evaluate`."""
    raw = eval(f"lambda x, y: {_py(e)}", dict(_NAMESPACE))  # noqa: S307 - source is generated from a closed grammar

    def fn(x: float, y: float) -> float:
        try:
            v = raw(x, y)
        except ZeroDivisionError:
            raise EvaluationError("division by zero") from None
        except OverflowError:
            raise EvaluationError("overflow") from None
        if not math.isfinite(v):
            raise EvaluationError("non-finite result")
        return v

    fn.expr = e
    return fn


# ---------------------------------------------------------------------------
# Folding and differentiation

def _is(e: Expr, v: float) -> bool:
    return isinstance(e, Const) and e.value == v


def _try_const(e: Expr) -> Expr:
    try:
        return Const(_eval(e, 0.0, 0.0) + 0.0)
    except (EvaluationError, OverflowError, ValueError):
        return e


def fold(e: Expr) -> Expr:
    """Collapse constant subtrees and the 0/1 identities of + - * / ^."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Neg):
        a = fold(e.arg)
        if isinstance(a, Const):
            return Const(-a.value + 0.0)
        return Neg(a)
    if isinstance(e, Func):
        a = fold(e.arg)
        out = Func(e.name, a)
        return _try_const(out) if isinstance(a, Const) else out
    if isinstance(e, Pow):
        b = fold(e.base)
        if e.exponent == 0:
            return ONE
        if e.exponent == 1:
            return b
        out = Pow(b, e.exponent)
        return _try_const(out) if isinstance(b, Const) else out
    a = fold(e.left)
    b = fold(e.right)
    if isinstance(a, Const) and isinstance(b, Const):
        return _try_const(BinOp(e.op, a, b))
    op = e.op
    if op == "+":
        if _is(a, 0):
            return b
        if _is(b, 0):
            return a
    elif op == "-":
        if _is(b, 0):
            return a
        if _is(a, 0):
            return fold(Neg(b))
    elif op == "*":
        if _is(a, 0) or _is(b, 0):
            return ZERO
        if _is(a, 1):
            return b
        if _is(b, 1):
            return a
        if isinstance(b, Const):
            a, b = b, a
        if isinstance(a, Const) and isinstance(b, BinOp) and b.op == "*" and isinstance(b.left, Const):
            return fold(BinOp("*", Const(a.value * b.left.value), b.right))
    elif op == "/":
        if _is(b, 1):
            return a
        if _is(a, 0) and isinstance(b, Const):
            return ZERO
    return BinOp(op, a, b)


def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return Neg(_d(e.arg, v))
    if isinstance(e, Pow):
        n = e.exponent
        if n == 0:
            return ZERO
        return BinOp("*", BinOp("*", Const(float(n)), Pow(e.base, n - 1)), _d(e.base, v))
    if isinstance(e, Func):
        u, du = e.arg, _d(e.arg, v)
        if e.name == "sin":
            outer = Func("cos", u)
        elif e.name == "cos":
            outer = Neg(Func("sin", u))
        elif e.name == "exp":
            outer = e
        else:
            outer = BinOp("/", Const(0.5), e)
        return BinOp("*", outer, du)
    a, b = e.left, e.right
    da, db = _d(a, v), _d(b, v)
    if e.op in "+-":
        return BinOp(e.op, da, db)
    if e.op == "*":
        return BinOp("+", BinOp("*", da, b), BinOp("*", a, db))
    # quotient rule
    return BinOp("/", BinOp("-", BinOp("*", da, b), BinOp("*", a, db)), Pow(b, 2))


def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative with respect to ``var`` ("x" or "y"), constant-folded."""
    if var not in VARIABLES:
        raise ExprError(f"can only differentiate with respect to x or y, not {var!r}")
    return fold(_d(e, var))


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, (Neg, Func)):
        yield from walk(e.arg)
    elif isinstance(e, Pow):
        yield from walk(e.base)
    elif isinstance(e, BinOp):
        yield from walk(e.left)
        yield from walk(e.right)


def coefficient_scale(e: Expr) -> float:
    """Crude magnitude of an expression: 1 + sum of |constants| appearing in it."""
    return 1.0 + sum(abs(n.value) for n in walk(e) if isinstance(n, Const))


# small builders used by the Lie-derivative tables
def const(v: float) -> Const:
    return Const(float(v))


def var(name: str) -> Var:
    return Var(name)


def add(a: Expr, b: Expr) -> Expr:
    return fold(BinOp("+", a, b))


def sub(a: Expr, b: Expr) -> Expr:
    return fold(BinOp("-", a, b))


def mul(a: Expr, b: Expr) -> Expr:
    return fold(BinOp("*", a, b))


def div(a: Expr, b: Expr) -> Expr:
    return fold(BinOp("/", a, b))
