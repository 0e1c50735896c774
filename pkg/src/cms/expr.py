"""A small expression language over cube coordinates.

Expressions are built from dyadic constants, coordinates ``x0..x(d-1)``,
``neg``/``abs`` and ``+ - * min max``. Everything evaluates exactly over
dyadic points, soundly over dyadic boxes, and carries a syntactic Lipschitz
bound under the max metric. This is the ingestion path for objectives and
constraints.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dyadic import D0, D1, Dyadic, DyadicInterval, ceil_log2, dy, pow2
from .errors import DomainError, ParseError

__all__ = [
    "Expr",
    "Const",
    "Coord",
    "Unary",
    "Binary",
    "parse",
    "eval_point",
    "eval_interval",
    "lipschitz_bound",
    "arity",
    "to_text",
]


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: Dyadic


@dataclass(frozen=True)
class Coord(Expr):
    index: int


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "neg" | "abs"
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # "add" | "sub" | "mul" | "min" | "max"
    left: Expr
    right: Expr


_FUNCS = ("min", "max", "abs", "neg")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                node = Binary("add", node, self.parse_term())
            elif ch == "-":
                self.pos += 1
                node = Binary("sub", node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek() == "*":
            self.pos += 1
            node = Binary("mul", node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.parse_expr()
            self.take(")")
            return node
        if ch.isdigit():
            return Const(self.parse_literal())
        if ch.isalpha():
            word = self.parse_word()
            if word in _FUNCS:
                self.take("(")
                args = [self.parse_expr()]
                while self.peek() == ",":
                    self.pos += 1
                    args.append(self.parse_expr())
                self.take(")")
                return self.build_call(word, args)
            if word.startswith("x") and word[1:].isdigit():
                return Coord(int(word[1:]))
            self.error(f"unknown name {word!r}")
        self.error("expected a factor")

    def parse_word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        return self.text[start : self.pos]

    def parse_literal(self) -> Dyadic:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
            self.pos += 1
        head = self.text[start : self.pos]
        save = self.pos
        if self.peek() == "/" and "." not in head:
            self.pos += 1
            self.skip_ws()
            dstart = self.pos
            if self.pos < len(self.text) and self.text[self.pos] == "2" and self.text[self.pos + 1 : self.pos + 2] == "^":
                self.pos += 2
                estart = self.pos
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
                if estart == self.pos:
                    self.error("missing exponent")
                return Dyadic(int(head), int(self.text[estart : self.pos]))
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if dstart == self.pos:
                self.error("missing denominator")
            den = int(self.text[dstart : self.pos])
            if den == 0 or den & (den - 1):
                self.error(f"non-dyadic literal {head}/{den} (denominator must be a power of two)")
            return Dyadic(int(head), den.bit_length() - 1)
        self.pos = save
        try:
            return dy(head)
        except (DomainError, ParseError):
            self.error(f"non-dyadic literal {head!r}")

    def build_call(self, word: str, args: list[Expr]) -> Expr:
        if word in ("abs", "neg"):
            if len(args) != 1:
                self.error(f"{word} takes one argument")
            return Unary(word, args[0])
        if len(args) < 2:
            self.error(f"{word} takes at least two arguments")
        node = args[0]
        for a in args[1:]:
            node = Binary(word, node, a)
        return node


def parse(text: str) -> Expr:
    p = _Parser(text)
    node = p.parse_expr()
    p.skip_ws()
    if p.pos != len(text):
        p.error("trailing input")
    return node


def arity(e: Expr) -> int:
    """Number of coordinates the expression mentions (max index + 1)."""
    if isinstance(e, Const):
        return 0
    if isinstance(e, Coord):
        return e.index + 1
    if isinstance(e, Unary):
        return arity(e.arg)
    return max(arity(e.left), arity(e.right))


def to_text(e: Expr) -> str:
    """Canonical printing; ``parse(to_text(e))`` rebuilds the same tree."""
    if isinstance(e, Const):
        return str(e.value) if e.value.sign >= 0 else f"neg({str(abs(e.value))})"
    if isinstance(e, Coord):
        return f"x{e.index}"
    if isinstance(e, Unary):
        return f"{e.op}({to_text(e.arg)})"
    if e.op == "add":
        return f"({to_text(e.left)} + {to_text(e.right)})"
    if e.op == "sub":
        return f"({to_text(e.left)} - {to_text(e.right)})"
    if e.op == "mul":
        return f"({to_text(e.left)} * {to_text(e.right)})"
    return f"{e.op}({to_text(e.left)}, {to_text(e.right)})"


def eval_point(e: Expr, point) -> Dyadic:
    """Exact evaluation at a dyadic point (tuple of coordinates)."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Coord):
        return point[e.index]
    if isinstance(e, Unary):
        v = eval_point(e.arg, point)
        return -v if e.op == "neg" else abs(v)
    a = eval_point(e.left, point)
    b = eval_point(e.right, point)
    if e.op == "add":
        return a + b
    if e.op == "sub":
        return a - b
    if e.op == "mul":
        return a * b
    if e.op == "min":
        return min(a, b)
    return max(a, b)


def eval_interval(e: Expr, box) -> DyadicInterval:
    """Sound range enclosure over a box (tuple of DyadicInterval); exact at
    point boxes."""
    if isinstance(e, Const):
        return DyadicInterval.point(e.value)
    if isinstance(e, Coord):
        if e.index >= len(box):
            raise DomainError(f"box has no coordinate x{e.index}")
        return box[e.index]
    if isinstance(e, Unary):
        v = eval_interval(e.arg, box)
        return -v if e.op == "neg" else abs(v)
    a = eval_interval(e.left, box)
    b = eval_interval(e.right, box)
    if e.op == "add":
        return a + b
    if e.op == "sub":
        return a - b
    if e.op == "mul":
        return a * b
    if e.op == "min":
        return a.min_with(b)
    return a.max_with(b)


def _unit_box(dim: int):
    return tuple(DyadicInterval(D0, D1) for _ in range(dim))


def to_function(e: Expr, window_lo, window_hi, dim: int | None = None):
    """Wrap the expression as a function object into the presented unit
    interval through the affine window [window_lo, window_hi]."""
    from .functions import expr_function

    return expr_function(e, dy(window_lo), dy(window_hi), dim=dim)


def lipschitz_bound(e: Expr, dim: int | None = None) -> Dyadic:
    """Syntactic Lipschitz bound under the max metric on the unit cube.

    Constants 0, coordinates 1, add/sub sum, min/max/abs/neg the max of the
    children, products via ``L(a)*sup|b| + L(b)*sup|a|`` with sups from
    interval evaluation over the cube.
    """
    box = _unit_box(dim if dim is not None else max(arity(e), 1))

    def go(node: Expr) -> Dyadic:
        if isinstance(node, Const):
            return D0
        if isinstance(node, Coord):
            return D1
        if isinstance(node, Unary):
            return go(node.arg)
        la, lb = go(node.left), go(node.right)
        if node.op in ("add", "sub"):
            return la + lb
        if node.op in ("min", "max"):
            return max(la, lb)
        sup_a = abs(eval_interval(node.left, box)).hi
        sup_b = abs(eval_interval(node.right, box)).hi
        return la * sup_b + lb * sup_a

    return go(e)
