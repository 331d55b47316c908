"""
Field expression parsing, evaluation and symbolic differentiation.

Expressions are infix text in the variables ``x`` and ``nu``:

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          (right associative)
    primary := NUMBER | 'x' | 'nu' | FUNC '(' expr ')' | '(' expr ')'

with FUNC one of exp, log, sqrt, sin, cos, tanh. Trees are immutable
dataclasses, so a parsed FieldExpr can be shared freely between workers.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Union

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownIdentifierError

VARIABLES = ("x", "nu")

SCALAR_FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
    "tanh": math.tanh,
}

ARRAY_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class FieldExpr:
    """A parsed field F(x, nu)."""

    root: Node

    def __str__(self) -> str:
        return to_string(self)


# ---------------------------------------------------------------------------
# Tokenizer

class Token(NamedTuple):
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def tokenize(text: str) -> List[Token]:
    """
    Split expression text into tokens.

    Raises:
        ExprSyntaxError: On a character that starts no token
    """
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            self.fail(f"unexpected {self._describe(self.current)}", [repr(text)])
        return self.advance()

    def fail(self, message: str, expected: List[str]):
        raise ExprSyntaxError(message, self.current.pos, expected)

    @staticmethod
    def _describe(token: Token) -> str:
        return "end of input" if token.kind == "eof" else repr(token.text)

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "eof":
            self.fail(f"unexpected {self._describe(self.current)}",
                      ["operator", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Num(float(token.text))
        if token.kind == "ident":
            self.advance()
            if self.current.text == "(":
                if token.text not in SCALAR_FUNCTIONS:
                    raise UnknownIdentifierError(token.text, token.pos)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(token.text, arg)
            if token.text not in VARIABLES:
                raise UnknownIdentifierError(token.text, token.pos)
            return Var(token.text)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {self._describe(token)}",
                  ["number", "x", "nu", "function", "'('", "'-'"])


def parse(text: str) -> FieldExpr:
    """
    Parse field expression text.

    Args:
        text: Infix expression in x and nu

    Returns:
        FieldExpr holding the unique parse tree

    Raises:
        ExprSyntaxError: Text does not match the grammar (position + expected tokens)
        UnknownIdentifierError: A name other than x, nu or a known function
    """
    return FieldExpr(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Evaluation

def _pow_scalar(base: float, exponent: float) -> float:
    if base < 0.0 and not float(exponent).is_integer():
        raise DomainError(f"non-integer power {exponent!r} of negative base {base!r}")
    if base == 0.0 and exponent < 0.0:
        raise DomainError("division by zero in negative power of 0")
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise DomainError(f"overflow in {base!r}^{exponent!r}")


def _call_scalar(func: str, value: float) -> float:
    if func == "log" and value <= 0.0:
        raise DomainError(f"log of non-positive value {value!r}")
    if func == "sqrt" and value < 0.0:
        raise DomainError(f"sqrt of negative value {value!r}")
    try:
        return SCALAR_FUNCTIONS[func](value)
    except OverflowError:
        raise DomainError(f"overflow in {func}({value!r})")


def _eval_node(node: Node, x: float, nu: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x if node.name == "x" else nu
    if isinstance(node, Neg):
        return -_eval_node(node.operand, x, nu)
    if isinstance(node, Call):
        return _call_scalar(node.func, _eval_node(node.arg, x, nu))
    left = _eval_node(node.left, x, nu)
    right = _eval_node(node.right, x, nu)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if right == 0.0:
            raise DomainError("division by zero")
        return left / right
    return _pow_scalar(left, right)


def evaluate(e: FieldExpr, x: float, nu: float) -> float:
    """
    Evaluate an expression at a point in IEEE double precision.

    Raises:
        DomainError: log/sqrt outside their domain, division by zero,
            non-integer power of a negative base, or a non-finite result
    """
    value = _eval_node(e.root, float(x), float(nu))
    if not math.isfinite(value):
        raise DomainError(f"non-finite value at x={x!r}, nu={nu!r}")
    return value


def _eval_array(node: Node, x: np.ndarray, nu: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(np.broadcast(x, nu).shape, node.value)
    if isinstance(node, Var):
        return np.broadcast_to(x if node.name == "x" else nu, np.broadcast(x, nu).shape)
    if isinstance(node, Neg):
        return -_eval_array(node.operand, x, nu)
    if isinstance(node, Call):
        arg = _eval_array(node.arg, x, nu)
        if node.func == "log" and np.any(arg <= 0.0):
            raise DomainError("log of non-positive value")
        if node.func == "sqrt" and np.any(arg < 0.0):
            raise DomainError("sqrt of negative value")
        return ARRAY_FUNCTIONS[node.func](arg)
    left = _eval_array(node.left, x, nu)
    right = _eval_array(node.right, x, nu)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(right == 0.0):
            raise DomainError("division by zero")
        return left / right
    if np.any((left < 0.0) & (right != np.round(right))):
        raise DomainError("non-integer power of negative base")
    if np.any((left == 0.0) & (right < 0.0)):
        raise DomainError("division by zero in negative power of 0")
    return np.power(left, right)


def evaluate_array(e: FieldExpr, x, nu) -> np.ndarray:
    """Vectorized counterpart of :func:`evaluate` over broadcast arrays."""
    x = np.asarray(x, dtype=float)
    nu = np.asarray(nu, dtype=float)
    with np.errstate(all="ignore"):
        values = np.array(_eval_array(e.root, x, nu), dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("non-finite value in array evaluation")
    return values


# ---------------------------------------------------------------------------
# Simplifying constructors

def _is_num(node: Node, value: float = None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def _fold(node: Node) -> Node:
    try:
        return Num(_eval_node(node, 0.0, 0.0))
    except DomainError:
        return node


def _neg(a: Node) -> Node:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    if isinstance(a, BinOp) and a.op == "*" and isinstance(a.left, Num):
        return _mul(Num(-a.left.value), a.right)
    return Neg(a)


def _add(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return _sub(a, b.operand)
    if isinstance(b, Num) and b.value < 0.0:
        return _sub(a, Num(-b.value))
    return BinOp("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is_num(a, -1.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, BinOp) and b.op == "*" and isinstance(b.left, Num):
        return _mul(Num(a.value * b.left.value), b.right)
    return BinOp("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_num(b, 1.0):
        return a
    if _is_num(a, 0.0) and not _is_num(b, 0.0):
        return Num(0.0)
    if isinstance(a, Num) and isinstance(b, Num):
        return _fold(BinOp("/", a, b))
    return BinOp("/", a, b)


def _pow(a: Node, b: Node) -> Node:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return Num(1.0)
    if isinstance(a, Num) and isinstance(b, Num):
        return _fold(BinOp("^", a, b))
    return BinOp("^", a, b)


def _call(func: str, a: Node) -> Node:
    if isinstance(a, Num):
        return _fold(Call(func, a))
    return Call(func, a)


# ---------------------------------------------------------------------------
# Differentiation

def _depends(node: Node, var: str) -> bool:
    if isinstance(node, Num):
        return False
    if isinstance(node, Var):
        return node.name == var
    if isinstance(node, Neg):
        return _depends(node.operand, var)
    if isinstance(node, Call):
        return _depends(node.arg, var)
    return _depends(node.left, var) or _depends(node.right, var)


def _d_call(func: str, u: Node, du: Node) -> Node:
    if func == "exp":
        outer = _call("exp", u)
    elif func == "log":
        return _div(du, u)
    elif func == "sqrt":
        return _div(du, _mul(Num(2.0), _call("sqrt", u)))
    elif func == "sin":
        outer = _call("cos", u)
    elif func == "cos":
        return _neg(_mul(_call("sin", u), du))
    else:
        outer = _sub(Num(1.0), _pow(_call("tanh", u), Num(2.0)))
    return _mul(outer, du)


def _d(node: Node, var: str) -> Node:
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        return _neg(_d(node.operand, var))
    if isinstance(node, Call):
        return _d_call(node.func, node.arg, _d(node.arg, var))

    u, v = node.left, node.right
    if node.op == "+":
        return _add(_d(u, var), _d(v, var))
    if node.op == "-":
        return _sub(_d(u, var), _d(v, var))
    if node.op == "*":
        return _add(_mul(_d(u, var), v), _mul(u, _d(v, var)))
    if node.op == "/":
        numerator = _sub(_mul(_d(u, var), v), _mul(u, _d(v, var)))
        return _div(numerator, _pow(v, Num(2.0)))

    if not _depends(v, var):
        if isinstance(v, Num):
            reduced = Num(v.value - 1.0)
        else:
            reduced = _sub(v, Num(1.0))
        return _mul(_mul(v, _pow(u, reduced)), _d(u, var))
    if not _depends(u, var):
        return _mul(_mul(BinOp("^", u, v), Call("log", u)), _d(v, var))
    inner = _add(_mul(_d(v, var), Call("log", u)), _div(_mul(v, _d(u, var)), u))
    return _mul(BinOp("^", u, v), inner)


def differentiate(e: FieldExpr, var: str) -> FieldExpr:
    """
    Symbolic partial derivative with respect to ``x`` or ``nu``.

    Simplification is limited to constant folding and 0/1 identities and
    never reorders terms, so printed derivatives are deterministic.
    """
    if var not in VARIABLES:
        raise UnknownIdentifierError(var, 0)
    return FieldExpr(_d(e.root, var))


# ---------------------------------------------------------------------------
# Canonical printer

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY = 3
_ATOM = 5


def _precedence(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg) or (isinstance(node, Num) and node.value < 0.0):
        return _UNARY
    return _ATOM


def _format_number(value: float) -> str:
    magnitude = abs(value)
    if magnitude.is_integer() and magnitude < 1e16:
        text = str(int(magnitude))
    else:
        text = repr(magnitude)
    return "-" + text if value < 0.0 else text


def _wrap(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def _print(node: Node) -> str:
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_print(node.arg)})"
    if isinstance(node, Neg):
        operand = node.operand
        return "-" + _wrap(_print(operand), _precedence(operand) <= _UNARY)

    prec = _PRECEDENCE[node.op]
    left_prec = _precedence(node.left)
    right_prec = _precedence(node.right)
    if node.op == "^":
        left = _wrap(_print(node.left), left_prec <= prec)
        right = _wrap(_print(node.right), right_prec < prec)
        return f"{left}^{right}"
    left = _wrap(_print(node.left), left_prec < prec)
    right = _wrap(_print(node.right), right_prec <= prec or right_prec == _UNARY)
    if node.op in ("+", "-"):
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"


def to_string(e: FieldExpr) -> str:
    """Canonical text; parse(to_string(parse(t))) == parse(t)."""
    return _print(e.root)
