"""A small analytic expression language.

Grammar (loosest to tightest)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' integer)?
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'
    integer := ['-'] INT | '(' ['-'] INT ')'

``FUNC`` is one of sin, cos, sinh, cosh, tanh, exp, sqrt.  The name ``pi``
is a built-in constant.  Every primitive is analytic, so the same tree can be
evaluated over reals, complex numbers and (complex) jets.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import jets
from .jets import DomainError, Jet

CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, text, pos, expected=()):
        self.text = text
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.expected = tuple(sorted(set(expected)))
        msg = f"{message} at line {self.line}, column {self.column}"
        if self.expected:
            msg += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(msg)


class UnknownIdentifierError(ExprError):
    def __init__(self, name, declared):
        self.name = name
        self.declared = tuple(declared)
        super().__init__(
            f"unknown identifier {name!r}; declared variables: {', '.join(self.declared) or '(none)'}"
        )


class UnboundVariableError(ExprError):
    pass


class ExprDomainError(DomainError):
    def __init__(self, message, subtree):
        self.subtree = subtree
        super().__init__(f"{message} in subexpression {to_string(subtree)!r}")


# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Num | Var | Neg | BinOp | Pow | Call


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),]|<=|>=|<|>)
    """,
    re.VERBOSE,
)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if value == "**":
                value = "^"
            out.append((kind, value, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = None if variables is None else tuple(variables)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message, expected=()):
        _, value, pos = self.peek()
        found = repr(value) if value else "end of input"
        raise ExprSyntaxError(f"{message}, found {found}", self.text, pos, expected)

    def expect(self, value):
        if self.peek()[1] != value:
            self.fail(f"expected {value!r}", (value,))
        return self.take()

    def parse_expr(self):
        node = self.parse_term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek()[1] == "^":
            self.take()
            return Pow(base, self.parse_integer())
        return base

    def parse_integer(self):
        paren = self.peek()[1] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, value, _ = self.peek()
        if kind != "num" or not re.fullmatch(r"\d+", value):
            self.fail("exponent must be an integer literal", ("integer",))
        self.take()
        if paren:
            self.expect(")")
        return sign * int(value)

    def parse_atom(self):
        kind, value, pos = self.peek()
        if kind == "num":
            self.take()
            return Num(float(value))
        if kind == "name":
            self.take()
            if value in jets.FUNCTIONS:
                if self.peek()[1] != "(":
                    self.fail(f"function {value!r} must be applied with parentheses", ("(",))
                self.take()
                arg = self.parse_expr()
                self.expect(")")
                return Call(value, arg)
            if value in CONSTANTS:
                return Var(value)
            if self.variables is not None and value not in self.variables:
                raise UnknownIdentifierError(value, self.variables)
            return Var(value)
        if value == "(":
            self.take()
            node = self.parse_expr()
            self.expect(")")
            return node
        self.fail("expected an operand", ("number", "identifier", "function", "(", "-"))


def parse(text: str, variables: Iterable[str] | None = None) -> Expression:
    """Parse ``text``; when ``variables`` is given, other identifiers are rejected."""
    p = _Parser(text, variables)
    node = p.parse_expr()
    if p.peek()[0] != "end":
        p.fail("unexpected token", ("operator", "end of input"))
    return node


# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_string(e: Expression) -> str:
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        if isinstance(e.arg, (BinOp, Neg)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_string(e.base)
        if not isinstance(e.base, (Var, Call)) or isinstance(e.base, Num):
            base = f"({base})"
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{base}^{exp}"
    if isinstance(e, BinOp):
        left = to_string(e.left)
        right = to_string(e.right)
        if isinstance(e.left, BinOp) and _PREC[e.left.op] < _PREC[e.op]:
            left = f"({left})"
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= _PREC[e.op]:
            right = f"({right})"
        if isinstance(e.right, Neg):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def free_variables(e: Expression) -> set[str]:
    if isinstance(e, Var):
        return set() if e.name in CONSTANTS else {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return free_variables(e.arg)
    if isinstance(e, Pow):
        return free_variables(e.base)
    return free_variables(e.left) | free_variables(e.right)


# evaluation


def _check_den(den, node):
    v = den.val if isinstance(den, Jet) else np.asarray(den)
    if np.any(v == 0):
        raise ExprDomainError("division by zero", node)


def evaluate(e: Expression, bindings: Mapping[str, object]):
    """Evaluate over whatever ring the bound values live in.

    Bound values may be floats, complex numbers, numpy arrays of either, or
    :class:`~amdkit.jets.Jet` instances; all must broadcast together.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name in bindings:
            return bindings[e.name]
        if e.name in CONSTANTS:
            return CONSTANTS[e.name]
        raise UnboundVariableError(f"unbound variable {e.name!r}")
    if isinstance(e, Neg):
        return -evaluate(e.arg, bindings)
    if isinstance(e, Pow):
        base = evaluate(e.base, bindings)
        if isinstance(base, Jet):
            try:
                return base**e.exponent
            except DomainError as exc:
                raise ExprDomainError(str(exc), e) from None
        base = np.asarray(base)
        if e.exponent < 0:
            _check_den(base, e)
            return 1.0 / base ** (-e.exponent)
        return base**e.exponent
    if isinstance(e, Call):
        arg = evaluate(e.arg, bindings)
        try:
            return jets.FUNCTIONS[e.func](arg)
        except DomainError as exc:
            raise ExprDomainError(str(exc), e) from None
    if isinstance(e, BinOp):
        a = evaluate(e.left, bindings)
        b = evaluate(e.right, bindings)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        _check_den(b, e)
        if not isinstance(a, Jet) and not isinstance(b, Jet):
            return np.asarray(a) / np.asarray(b)
        return a / b
    raise TypeError(f"not an expression: {e!r}")


RINGS = ("real", "complex", "jet2", "cjet2")


def seed(ring: str, values: Mapping[str, object]) -> dict:
    """Lift plain numbers into ``ring``; jet rings seed one variable per name."""
    if ring not in RINGS:
        raise ValueError(f"unknown ring {ring!r}; choose from {RINGS}")
    names = list(values)
    if ring == "real":
        return {k: np.asarray(v, dtype=float) for k, v in values.items()}
    if ring == "complex":
        return {k: np.asarray(v, dtype=complex) for k, v in values.items()}
    dtype = float if ring == "jet2" else complex
    pts = np.stack(np.broadcast_arrays(*[np.asarray(values[k], dtype=dtype) for k in names]), axis=-1)
    return dict(zip(names, Jet.variables(pts, order=2)))


@dataclass(frozen=True)
class Predicate:
    """An inequality ``lhs op rhs`` with op in <=, >=, <, >.

    ``residual`` is non-positive exactly where the inequality holds.
    """

    lhs: Expression
    op: str
    rhs: Expression

    def residual(self, bindings):
        a = evaluate(self.lhs, bindings)
        b = evaluate(self.rhs, bindings)
        return a - b if self.op in ("<=", "<") else b - a

    def holds(self, bindings, tol=0.0):
        return np.asarray(self.residual(bindings)) <= tol

    def __str__(self):
        return f"{to_string(self.lhs)} {self.op} {to_string(self.rhs)}"


def parse_predicate(text: str, variables: Iterable[str] | None = None) -> Predicate:
    for op in ("<=", ">=", "<", ">"):
        # first comparison operator wins; the analytic grammar has none of its own
        idx = text.find(op)
        if idx >= 0 and (op in ("<=", ">=") or text[idx : idx + 2] not in ("<=", ">=")):
            lhs = parse(text[:idx], variables)
            rhs = parse(text[idx + len(op) :], variables)
            return Predicate(lhs, op, rhs)
    raise ExprSyntaxError("predicate needs one of <=, >=, <, >", text, len(text), ("<=", ">="))
