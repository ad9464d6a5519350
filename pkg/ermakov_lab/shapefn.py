"""
Parsing, evaluation and differentiation of one-variable shape functions.

Shape functions are the f, g, h (argument ``s``) and w (argument ``t``) of a
``SystemSpec``, written in a small arithmetic language:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | 's' | 't' | 'th' | fn '(' expr ')' | '(' expr ')' | '-' base

``fn`` is one of sin, cos, tan, exp, log, sqrt. ``^`` is right-associative and
a leading '-' belongs to the base, so ``-s^2`` means ``(-s)^2``.
"""
import logging
from typing import NamedTuple, Optional

from .exceptions import ShapeDomainError, ShapeSyntaxError, UnknownIdentifierError
from .expressions import (
    BINARY_OPERATIONS,
    UNARY_FUNCTIONS,
    Constant,
    Negate,
    Node,
    Variable,
)
from .parse_utils import END, NAME, NUMBER, OP, TokenStream, tokenize

logger = logging.getLogger(__name__)

VARIABLE_NAMES = ("s", "t", "th")


class Evaluation(NamedTuple):
    value: Optional[float]
    error: Optional[str]

    @property
    def ok(self) -> bool:
        return self.error is None


class ShapeExpr:
    """
    An immutable parsed shape function: the expression tree plus the text
    it was parsed from.
    """

    __slots__ = ("root", "source")

    def __init__(self, root: Node, source: str):
        self.root = root
        self.source = source

    @property
    def variable(self) -> Optional[str]:
        names = self.root.variables()
        return next(iter(names)) if names else None

    def is_constant(self) -> bool:
        return self.root.is_constant()

    def is_zero(self) -> bool:
        """
        True when the expression is constant and evaluates to exactly zero,
        e.g. "0" or "1 - 1".
        """
        if not self.is_constant():
            return False
        result = self.evaluate_flagged(0.0)
        return result.ok and result.value == 0.0

    def evaluate(self, point: float) -> float:
        return self.root.evaluate(point)

    def evaluate_flagged(self, point: float) -> Evaluation:
        try:
            return Evaluation(self.root.evaluate(point), None)
        except ShapeDomainError as e:
            return Evaluation(None, e.message)

    def __call__(self, point: float) -> float:
        return self.root.evaluate(point)

    def __str__(self) -> str:
        return str(self.root)

    def __repr__(self) -> str:
        return f"ShapeExpr({self.source!r})"


class ShapeParser:
    def __init__(self, text: str):
        self.text = text
        self.stream = TokenStream(tokenize(text), text)
        self.variable_name = None

    def parse(self) -> Node:
        root = self.parse_expr()
        self.stream.expect_end()
        return root

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.stream.peek_is(OP, ("+", "-")):
            operator = self.stream.advance().text
            node = BINARY_OPERATIONS[operator](node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.stream.peek_is(OP, ("*", "/")):
            operator = self.stream.advance().text
            node = BINARY_OPERATIONS[operator](node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        base = self.parse_base()
        if self.stream.peek_is(OP, ("^",)):
            self.stream.advance()
            # right-associative: s^2^3 == s^(2^3)
            return BINARY_OPERATIONS["^"](base, self.parse_factor())
        return base

    def parse_base(self) -> Node:
        stream = self.stream
        token = stream.current

        if token.kind == NUMBER:
            stream.advance()
            return Constant(float(token.text))

        if token.kind == OP and token.text == "-":
            stream.advance()
            return Negate(self.parse_base())

        if token.kind == OP and token.text == "(":
            stream.advance()
            node = self.parse_expr()
            stream.expect(OP, ")")
            return node

        if token.kind == NAME:
            stream.advance()
            if token.text in VARIABLE_NAMES:
                return self.make_variable(token)
            if token.text in UNARY_FUNCTIONS:
                stream.expect(OP, "(")
                argument = self.parse_expr()
                stream.expect(OP, ")")
                return UNARY_FUNCTIONS[token.text](argument)
            raise UnknownIdentifierError(token.text, token.position, self.text)

        if token.kind == END:
            stream.error("expected a number, variable, function or '('")
        stream.error(f"unexpected '{token.text}'")

    def make_variable(self, token) -> Variable:
        if self.variable_name is None:
            self.variable_name = token.text
        elif token.text != self.variable_name:
            raise ShapeSyntaxError(
                f"variable '{token.text}' mixed with '{self.variable_name}'",
                token.position,
                self.text,
            )
        return Variable(token.text)


def parse(text: str) -> ShapeExpr:
    """
    Returns a ``ShapeExpr`` for ``text``. Raises ``ShapeSyntaxError`` (with
    the offending character position), ``UnknownIdentifierError`` or
    ``EmptyExpressionError``.
    """
    root = ShapeParser(text).parse()
    logger.debug("parsed shape function %r as %s", text, root)
    return ShapeExpr(root, text)


def evaluate(expr: ShapeExpr, point: float) -> float:
    return expr.evaluate(point)


def deriv(expr: ShapeExpr) -> ShapeExpr:
    return ShapeExpr(expr.root.derivative(), f"d/d{expr.variable or 's'}({expr.source})")
