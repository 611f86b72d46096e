"""Scalar expression language for metric factors, Rho overrides and test curves.

Expressions are immutable trees over the variables ``x, y`` (plus ``z`` in
three dimensions; curve definitions use ``t``), numeric literals, the binary
operators ``+ - * / ^``, unary negation and the functions
``exp log sin cos sinh cosh sqrt``.  ``pi`` and ``e`` parse as literals.

Differentiation is exact and closed over the grammar.  The only
simplification performed is constant folding plus dropping additive zeros and
multiplicative units, which is what keeps derivatives of sparse expressions
sparse (``d/dx sin(y)`` really is ``0``).  Exponents of ``^`` must be
constants; that pins the differentiation rule to ``c * u^(c-1) * u'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "ExprSyntaxError",
    "DomainError",
    "parse",
    "evaluate",
    "differentiate",
    "substitute",
    "to_text",
    "variables",
    "depth",
    "add",
    "sub",
    "mul",
    "div",
    "pow_",
    "neg",
    "call",
    "num",
    "var",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}
DEFAULT_VARIABLES = ("x", "y", "z", "t")


class ExprSyntaxError(ValueError):
    """Parse failure; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the real domain (log of non-positive, division by zero, ...)."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Bin, Call]


def num(v: float) -> Num:
    return Num(float(v))


def var(name: str) -> Var:
    return Var(name)


def _is_num(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Num) and (v is None or e.value == v)


# ---------------------------------------------------------------------------
# smart constructors: constant folding + unit dropping, nothing deeper


def add(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return Bin("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    return Bin("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return Bin("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Bin("/", a, b)


def neg(a: Expr) -> Expr:
    if _is_num(a):
        return Num(-a.value)
    return Neg(a)


def pow_(a: Expr, b: Expr) -> Expr:
    if not isinstance(b, Num):
        raise ValueError("exponent of ^ must be a constant")
    if b.value == 0.0:
        return Num(1.0)
    if b.value == 1.0:
        return a
    if _is_num(a):
        try:
            v = math.pow(a.value, b.value)
        except (ValueError, OverflowError):
            return Bin("^", a, b)
        return Num(v)
    return Bin("^", a, b)


def call(fn: str, a: Expr) -> Expr:
    if fn not in FUNCTIONS:
        raise ValueError(f"unknown function {fn!r}")
    if _is_num(a):
        try:
            v = _FN_TABLE[fn](a.value)
        except (ValueError, OverflowError, ZeroDivisionError):
            return Call(fn, a)
        if math.isfinite(v):
            return Num(v)
    return Call(fn, a)


_FN_TABLE = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "sqrt": math.sqrt,
}


# ---------------------------------------------------------------------------
# parser


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, offset: int | None = None) -> ExprSyntaxError:
        return ExprSyntaxError(message, self.pos if offset is None else offset)

    def next_token(self):
        text, n = self.text, len(self.text)
        while self.pos < n and text[self.pos].isspace():
            self.pos += 1
        if self.pos >= n:
            return ("end", None, self.pos)
        start = self.pos
        ch = text[start]
        if ch.isdigit() or (ch == "." and start + 1 < n and text[start + 1].isdigit()):
            i = start
            while i < n and (text[i].isdigit() or text[i] == "."):
                i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            token = text[start:i]
            try:
                value = float(token)
            except ValueError:
                raise self.error(f"bad number literal {token!r}", start)
            self.pos = i
            return ("num", value, start)
        if ch.isalpha() or ch == "_":
            i = start
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            self.pos = i
            return ("ident", text[start:i], start)
        if ch in "+-*/^()":
            self.pos += 1
            return (ch, ch, start)
        raise self.error(f"unexpected character {ch!r}", start)


class _Parser:
    def __init__(self, text: str, allowed_vars: Sequence[str]):
        self.tok = _Tokenizer(text)
        self.allowed = tuple(allowed_vars)
        self.current = self.tok.next_token()

    def advance(self):
        self.current = self.tok.next_token()

    def expect(self, kind: str):
        if self.current[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}", self.current[2])
        self.advance()

    def parse(self) -> Expr:
        e = self.parse_sum()
        if self.current[0] != "end":
            raise ExprSyntaxError("trailing input", self.current[2])
        return e

    def parse_sum(self) -> Expr:
        e = self.parse_term()
        while self.current[0] in ("+", "-"):
            op = self.current[0]
            self.advance()
            rhs = self.parse_term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def parse_term(self) -> Expr:
        e = self.parse_unary()
        while self.current[0] in ("*", "/"):
            op = self.current[0]
            self.advance()
            rhs = self.parse_unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def parse_unary(self) -> Expr:
        if self.current[0] == "-":
            self.advance()
            return neg(self.parse_unary())
        if self.current[0] == "+":
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Expr:
        e = self.parse_atom()
        while self.current[0] == "^":
            offset = self.current[2]
            self.advance()
            rhs = self.parse_unary_exponent()
            try:
                e = pow_(e, rhs)
            except ValueError as exc:
                raise ExprSyntaxError(str(exc), offset)
        return e

    def parse_unary_exponent(self) -> Expr:
        # exponents: numbers, constants, parenthesised constant expressions
        if self.current[0] == "-":
            self.advance()
            return neg(self.parse_unary_exponent())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        kind, value, offset = self.current
        if kind == "num":
            self.advance()
            return Num(value)
        if kind == "(":
            self.advance()
            e = self.parse_sum()
            self.expect(")")
            return e
        if kind == "ident":
            self.advance()
            if self.current[0] == "(":
                if value not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {value!r}", offset)
                self.advance()
                arg = self.parse_sum()
                self.expect(")")
                return call(value, arg)
            if value in CONSTANTS:
                return Num(CONSTANTS[value])
            if value in self.allowed:
                return Var(value)
            raise ExprSyntaxError(f"unknown identifier {value!r}", offset)
        raise ExprSyntaxError("expected expression", offset)


def parse(text: str, allowed_vars: Sequence[str] = DEFAULT_VARIABLES) -> Expr:
    """Parse ``text`` under standard precedence (^ above unary minus above * /
    above + -, left-associative within a tier)."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, allowed_vars).parse()


# ---------------------------------------------------------------------------
# evaluation


def _point_mapping(point) -> Mapping[str, float]:
    if isinstance(point, Mapping):
        return point
    names = ("x", "y", "z")
    return {names[i]: float(v) for i, v in enumerate(point)}


def evaluate(e: Expr, point) -> float:
    """Evaluate at ``point`` (a mapping of variable names, or a coordinate
    sequence bound to x, y, z).  Raises DomainError when the value leaves the
    reals.

    Derivative trees share subtrees heavily, so evaluation memoises on node
    identity: the walk is linear in the size of the expression DAG.
    """
    env = _point_mapping(point)
    v = _eval(e, env, {})
    if not math.isfinite(v):
        raise DomainError("expression evaluated to a non-finite value")
    return v


def _eval(e: Expr, env: Mapping[str, float], memo: dict) -> float:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Num):
        v = e.value
    elif isinstance(e, Var):
        try:
            v = float(env[e.name])
        except KeyError:
            raise DomainError(f"unbound variable {e.name!r}")
    elif isinstance(e, Neg):
        v = -_eval(e.arg, env, memo)
    elif isinstance(e, Bin):
        a = _eval(e.left, env, memo)
        if e.op == "^":
            c = e.right.value if isinstance(e.right, Num) else _eval(e.right, env, memo)
            try:
                v = math.pow(a, c)
            except (ValueError, OverflowError):
                raise DomainError(f"pow({a}, {c}) is not a finite real")
        else:
            b = _eval(e.right, env, memo)
            if e.op == "+":
                v = a + b
            elif e.op == "-":
                v = a - b
            elif e.op == "*":
                v = a * b
            elif e.op == "/":
                if b == 0.0:
                    raise DomainError("division by zero")
                v = a / b
            else:
                raise AssertionError(e.op)
    elif isinstance(e, Call):
        a = _eval(e.arg, env, memo)
        if e.fn == "log" and a <= 0.0:
            raise DomainError(f"log of non-positive value {a}")
        if e.fn == "sqrt" and a < 0.0:
            raise DomainError(f"sqrt of negative value {a}")
        try:
            v = _FN_TABLE[e.fn](a)
        except (ValueError, OverflowError):
            raise DomainError(f"{e.fn}({a}) is not a finite real")
    else:
        raise TypeError(f"not an Expr: {e!r}")
    memo[key] = v
    return v


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expr, name: str) -> Expr:
    """Exact symbolic partial derivative with respect to ``name``.

    Memoised on node identity, so shared subtrees are differentiated once
    and stay shared in the result.
    """
    return _diff(e, name, {})


def _diff(e: Expr, name: str, memo: dict) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Num):
        out = Num(0.0)
    elif isinstance(e, Var):
        out = Num(1.0 if e.name == name else 0.0)
    elif isinstance(e, Neg):
        out = neg(_diff(e.arg, name, memo))
    elif isinstance(e, Bin):
        if e.op == "+":
            out = add(_diff(e.left, name, memo), _diff(e.right, name, memo))
        elif e.op == "-":
            out = sub(_diff(e.left, name, memo), _diff(e.right, name, memo))
        elif e.op == "*":
            out = add(
                mul(_diff(e.left, name, memo), e.right),
                mul(e.left, _diff(e.right, name, memo)),
            )
        elif e.op == "/":
            out = div(
                sub(
                    mul(_diff(e.left, name, memo), e.right),
                    mul(e.left, _diff(e.right, name, memo)),
                ),
                mul(e.right, e.right),
            )
        elif e.op == "^":
            if not isinstance(e.right, Num):
                raise ValueError("exponent of ^ must be a constant")
            c = e.right.value
            out = mul(
                mul(Num(c), pow_(e.left, Num(c - 1.0))),
                _diff(e.left, name, memo),
            )
        else:
            raise AssertionError(e.op)
    elif isinstance(e, Call):
        u = e.arg
        du = _diff(u, name, memo)
        if e.fn == "exp":
            out = mul(call("exp", u), du)
        elif e.fn == "log":
            out = div(du, u)
        elif e.fn == "sin":
            out = mul(call("cos", u), du)
        elif e.fn == "cos":
            out = mul(neg(call("sin", u)), du)
        elif e.fn == "sinh":
            out = mul(call("cosh", u), du)
        elif e.fn == "cosh":
            out = mul(call("sinh", u), du)
        elif e.fn == "sqrt":
            out = div(du, mul(Num(2.0), call("sqrt", u)))
        else:
            raise AssertionError(e.fn)
    else:
        raise TypeError(f"not an Expr: {e!r}")
    memo[key] = out
    return out


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions, rebuilding through the folding
    constructors."""
    return _subst(e, mapping, {})


def _subst(e: Expr, mapping: Mapping[str, Expr], memo: dict) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Num):
        out = e
    elif isinstance(e, Var):
        out = mapping.get(e.name, e)
    elif isinstance(e, Neg):
        out = neg(_subst(e.arg, mapping, memo))
    elif isinstance(e, Bin):
        left = _subst(e.left, mapping, memo)
        right = _subst(e.right, mapping, memo)
        if e.op == "+":
            out = add(left, right)
        elif e.op == "-":
            out = sub(left, right)
        elif e.op == "*":
            out = mul(left, right)
        elif e.op == "/":
            out = div(left, right)
        else:
            out = pow_(left, right)
    elif isinstance(e, Call):
        out = call(e.fn, _subst(e.arg, mapping, memo))
    else:
        raise TypeError(f"not an Expr: {e!r}")
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# printing and structural helpers

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_text(e: Expr) -> str:
    return _print(e, 0)


def _print(e: Expr, parent_prec: int, right_side: bool = False) -> str:
    if isinstance(e, Num):
        v = e.value
        if v < 0 or (v == 0 and math.copysign(1.0, v) < 0):
            s = repr(v)
            return f"({s})" if parent_prec > 0 else s
        return repr(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({_print(e.arg, 0)})"
    if isinstance(e, Neg):
        p = _PREC["neg"]
        inner = _print(e.arg, p, right_side=True)
        s = f"-{inner}"
        return f"({s})" if parent_prec >= p else s
    if isinstance(e, Bin):
        p = _PREC[e.op]
        left = _print(e.left, p)
        # ^ needs its non-trivial left operand wrapped: (a+b)^2, (-a)^2, a^2^3
        if e.op == "^" and not isinstance(e.left, (Num, Var, Call)):
            left = f"({_print(e.left, 0)})"
        right = _print(e.right, p, right_side=True)
        if right_side and not isinstance(e.right, (Num, Var, Call)):
            pass
        # left-associative: right child at equal precedence needs parens
        if isinstance(e.right, Bin) and _PREC[e.right.op] == p:
            right = f"({_print(e.right, 0)})"
        s = f"{left} {e.op} {right}" if e.op != "^" else f"{left}^{right}"
        if parent_prec >= p:
            return f"({s})"
        return s
    raise TypeError(f"not an Expr: {e!r}")


def variables(e: Expr) -> set:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, Call):
        return variables(e.arg)
    if isinstance(e, Bin):
        return variables(e.left) | variables(e.right)
    raise TypeError(f"not an Expr: {e!r}")


def depth(e: Expr) -> int:
    """Edge depth of the tree (leaves have depth 0)."""
    if isinstance(e, (Num, Var)):
        return 0
    if isinstance(e, (Neg, Call)):
        return 1 + depth(e.arg)
    return 1 + max(depth(e.left), depth(e.right))


def as_expr(value) -> Expr:
    """Coerce strings and numbers to Expr; pass Expr through."""
    if isinstance(value, (Num, Var, Neg, Bin, Call)):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float)):
        return Num(float(value))
    raise TypeError(f"cannot interpret {value!r} as an expression")
