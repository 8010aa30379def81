"""Tiny expression language for defining periodic scalar fields.

Grammar (EBNF, also published in docs/fieldlang.md):

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" integer ] ;
    atom    = number | "pi" | variable | function "(" expr ")"
            | "(" expr ")" ;
    variable = "x1" | "x2" | ... ;
    function = "sin" | "cos" | "exp" ;

Binary operators of equal precedence associate left; exponents are
integer literals (optionally signed) so evaluation stays total on
negative bases.  Whitespace is insignificant.  Evaluation on a grid is
plain vectorized arithmetic at the node coordinates, with no
approximation; periodicity of the result is the caller's responsibility
(see `periodicity_defect` for the warning heuristic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EvalError, FieldSyntaxError
from .grid import PeriodicGrid, ScalarField

__all__ = [
    "Expr",
    "Num",
    "Const",
    "Var",
    "Neg",
    "Bin",
    "Pow",
    "Call",
    "parse",
    "to_string",
    "eval_field",
    "periodicity_defect",
]

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


class Expr:
    """Base class of expression nodes."""


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str  # only "pi"


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based, x1 ... xn


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


# ---------------------------------------------------------------------------
# tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op | end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                seen_dot = seen_dot or text[j] == "."
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            tokens.append(_Token("number", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise FieldSyntaxError(i, "a number, name, operator or parenthesis", ch)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.advance()
            return
        raise FieldSyntaxError(tok.offset, f"'{op}'", tok.text or "end of input")

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise FieldSyntaxError(tok.offset, "end of input", tok.text)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            right = self.unary()
            if op == "/" and isinstance(right, Num) and right.value == 0.0:
                raise FieldSyntaxError(
                    self.tokens[self.pos - 1].offset, "a nonzero denominator", "0"
                )
            node = Bin(op, node, right)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            sign = 1
            tok = self.peek()
            if tok.kind == "op" and tok.text == "-":
                self.advance()
                sign = -1
                tok = self.peek()
            if tok.kind != "number" or "." in tok.text or "e" in tok.text.lower():
                raise FieldSyntaxError(tok.offset, "an integer exponent", tok.text)
            self.advance()
            node = Pow(node, sign * int(tok.text))
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            name = tok.text
            if name == "pi":
                return Const("pi")
            if name in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(name, arg)
            if name.startswith("x") and name[1:].isdigit():
                index = int(name[1:])
                if index < 1:
                    raise FieldSyntaxError(tok.offset, "a variable x1, x2, ...", name)
                return Var(index)
            raise FieldSyntaxError(
                tok.offset, "pi, a variable x<k> or sin/cos/exp", name
            )
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise FieldSyntaxError(
            tok.offset, "a number, variable or '('", tok.text or "end of input"
        )


def parse(text: str) -> Expr:
    """Parse an expression; raises FieldSyntaxError with offset and hint."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# canonical printer (round-trip stable: parse(to_string(e)) == e)


def to_string(e: Expr) -> str:
    return _print(e, 0)


def _print(e: Expr, parent_level: int) -> str:
    # precedence levels: add 1, mul 2, unary 3, power 4, atom 5
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.name}({_print(e.arg, 0)})"
    if isinstance(e, Neg):
        inner = _print(e.operand, 3)
        text = f"-{inner}"
        return f"({text})" if parent_level > 3 else text
    if isinstance(e, Pow):
        base = _print(e.base, 5)
        text = f"{base}^{e.exponent}"
        return f"({text})" if parent_level > 4 else text
    if isinstance(e, Bin):
        level = 1 if e.op in "+-" else 2
        left = _print(e.left, level)
        # left associativity: the right child needs one level more
        right = _print(e.right, level + 1)
        text = f"{left}{e.op}{right}"
        return f"({text})" if parent_level > level else text
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def _max_variable(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Neg):
        return _max_variable(e.operand)
    if isinstance(e, Bin):
        return max(_max_variable(e.left), _max_variable(e.right))
    if isinstance(e, Pow):
        return _max_variable(e.base)
    if isinstance(e, Call):
        return _max_variable(e.arg)
    return 0


def eval_field(e: Expr, g: PeriodicGrid) -> ScalarField:
    """Evaluate the expression at every node; exact pointwise arithmetic."""
    top = _max_variable(e)
    if top > g.dim:
        raise DimensionError(
            f"expression uses x{top} but the grid has dimension {g.dim}"
        )
    coords = g.coordinate_arrays()

    def ev(node: Expr) -> np.ndarray:
        if isinstance(node, Num):
            return np.full(g.shape, node.value)
        if isinstance(node, Const):
            return np.full(g.shape, np.pi)
        if isinstance(node, Var):
            return coords[node.index - 1]
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Bin):
            left, right = ev(node.left), ev(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            zero = right == 0.0
            if zero.any():
                where = np.unravel_index(np.argmax(zero), zero.shape)
                raise EvalError(f"division by zero at node {tuple(where)}")
            return left / right
        if isinstance(node, Pow):
            with np.errstate(divide="raise", over="raise"):
                try:
                    return ev(node.base) ** node.exponent
                except FloatingPointError as err:
                    raise EvalError(f"power overflow: {err}") from None
        if isinstance(node, Call):
            with np.errstate(over="raise"):
                try:
                    return _FUNCTIONS[node.name](ev(node.arg))
                except FloatingPointError as err:
                    raise EvalError(f"{node.name} overflow: {err}") from None
        raise TypeError(f"not an expression node: {node!r}")

    values = ev(e)
    if not np.all(np.isfinite(values)):
        where = np.unravel_index(np.argmax(~np.isfinite(values)), values.shape)
        raise EvalError(f"non-finite value at node {tuple(where)}")
    return ScalarField(g, values)


def periodicity_defect(f: ScalarField) -> float:
    """Relative spectral weight of the top-octave modes.

    Smooth periodic fields have (super)algebraically small tails;
    non-periodic samplings (such as "x1") leak O(1/k) energy into the
    highest modes.  The CLI warns above 1e-8.
    """
    coeffs = np.fft.fftn(f.values) / f.grid.node_count
    total = np.sqrt(np.sum(np.abs(coeffs) ** 2))
    if total == 0.0:
        return 0.0
    mask = np.zeros(f.grid.shape, dtype=bool)
    for axis in range(f.grid.dim):
        k = np.abs(f.grid.wavenumbers(axis))
        nyq = f.grid.resolution[axis] // 2
        axis_mask = k > (2 * nyq) // 3
        shape = [1] * f.grid.dim
        shape[axis] = len(k)
        mask |= axis_mask.reshape(shape)
    tail = np.sqrt(np.sum(np.abs(coeffs[mask]) ** 2))
    return float(tail / total)
