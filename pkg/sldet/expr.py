"""
Arithmetic expressions in one variable x, used for custom potentials.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so -x^2 is -(x^2).
"""
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List

from sldet.errors import ExprEvalError, ExprSyntaxError


def _checked_log(v, x):
    if v <= 0.0:
        raise ExprEvalError(f"log of nonpositive value {v}", x)
    return math.log(v)


def _checked_sqrt(v, x):
    if v < 0.0:
        raise ExprEvalError(f"sqrt of negative value {v}", x)
    return math.sqrt(v)


def _checked_cot(v, x):
    s = math.sin(v)
    if s == 0.0:
        raise ExprEvalError("cot at a multiple of pi", x)
    return math.cos(v) / s


def _checked_exp(v, x):
    try:
        return math.exp(v)
    except OverflowError:
        raise ExprEvalError(f"exp overflow for argument {v}", x) from None


FUNCTIONS: Dict[str, Callable[[float, float], float]] = {
    "sin": lambda v, x: math.sin(v),
    "cos": lambda v, x: math.cos(v),
    "tan": lambda v, x: math.tan(v),
    "cot": _checked_cot,
    "sinh": lambda v, x: math.sinh(v),
    "cosh": lambda v, x: math.cosh(v),
    "exp": _checked_exp,
    "log": _checked_log,
    "sqrt": _checked_sqrt,
    "abs": lambda v, x: abs(v),
}


# ----------------------
# AST
# ----------------------
class Expr:
    def __call__(self, x):
        return self.evaluate(float(x))

    def evaluate(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def evaluate(self, x):
        return self.value


@dataclass(frozen=True)
class Var(Expr):
    def evaluate(self, x):
        return x


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def evaluate(self, x):
        return -self.operand.evaluate(x)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, x):
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if b == 0.0:
                raise ExprEvalError("division by zero", x)
            return a / b
        try:
            value = a ** b
        except (OverflowError, ZeroDivisionError) as exc:
            raise ExprEvalError(f"{a} ^ {b}: {exc}", x) from None
        if isinstance(value, complex):
            raise ExprEvalError(f"{a} ^ {b} is not real", x)
        return value


@dataclass(frozen=True)
class Call(Expr):
    name: str
    argument: Expr

    def evaluate(self, x):
        return FUNCTIONS[self.name](self.argument.evaluate(x), x)


@dataclass(frozen=True)
class Parsed:
    """A parsed expression together with its source text."""
    source: str
    tree: Expr

    def __call__(self, x):
        return self.tree(x)


# ----------------------
# Tokenizer
# ----------------------
_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(src, index):
    return len(src[:index].encode("utf-8"))


def tokenize(src) -> List[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            tokens.append(Token("eof", "", _byte_offset(src, pos)))
            return tokens
        match = _TOKEN.match(src, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos),
                                  ("number", "name", "operator", "'('"))
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), _byte_offset(src, start)))
        pos = match.end()


# ----------------------
# Parser
# ----------------------
_ATOM_START = ("number", "'x'", "'pi'", "function", "'('", "'-'")


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def current(self):
        return self.tokens[self.i]

    def advance(self):
        token = self.tokens[self.i]
        self.i += 1
        return token

    def error(self, message, expected):
        raise ExprSyntaxError(message, self.current.offset, expected)

    def expect(self, text):
        if self.current.text != text:
            found = self.current.text or "end of input"
            self.error(f"found {found!r}", (f"'{text}'",))
        return self.advance()

    def parse(self):
        tree = self.expr()
        if self.current.kind != "eof":
            self.error(f"unexpected {self.current.text!r}", ("operator", "end of input"))
        return tree

    def expr(self):
        node = self.term()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        token = self.current
        if token.kind == "num":
            self.advance()
            return Num(float(token.text))
        if token.kind == "name":
            self.advance()
            if token.text == "x":
                return Var()
            if token.text == "pi":
                return Num(math.pi)
            if token.text in FUNCTIONS:
                self.expect("(")
                argument = self.expr()
                self.expect(")")
                return Call(token.text, argument)
            raise ExprSyntaxError(f"unknown name {token.text!r}", token.offset,
                                  ("'x'", "'pi'", "function"))
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        self.error(f"found {found!r}", _ATOM_START)


def parse_expr(src) -> Parsed:
    return Parsed(src, _Parser(src).parse())
