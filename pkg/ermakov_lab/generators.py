"""
A small language for point generators of the reduced oscillator system, and
the catalogue of the nine-generator family in its printed and corrected
forms.

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' integer)?
    base   := number | 'sqrt2' | 'i' | 'u1' | 'u2' | 'd_th' | 'd_u1' | 'd_u2'
            | 'exp' '(' linear-in-th ')' | unknown | '(' expr ')' | '-' base

A generator text such as ``exp(2*sqrt2*i*th)*(d_th + c*u1*d_u1)`` denotes
xi d_th + eta1 d_u1 + eta2 d_u2. Unknown scalars must be declared and may
only appear linearly.
"""
import logging
from fractions import Fraction
from typing import Dict, Iterable, NamedTuple, Optional, Sequence, Tuple

from .exact import I, ONE, SQRT2, ZERO, ExactScalar
from .exceptions import GeneratorSyntaxError, UnknownIdentifierError
from .parse_utils import END, NAME, NUMBER, OP, TokenStream, tokenize
from .symexpr import U1, U2, Ansatz, GeneratorSym, SymExpr

logger = logging.getLogger(__name__)

SCALAR = "scalar"
FIELD = "field"

CONSTANTS = {"sqrt2": SQRT2, "i": I}
SYMBOLS = {"u1": U1, "u2": U2}
BASIS_FIELDS = {"d_th": 0, "d_u1": 1, "d_u2": 2}
RESERVED = set(CONSTANTS) | set(SYMBOLS) | set(BASIS_FIELDS) | {"exp", "th"}


class Value:
    """
    An intermediate value of the generator language: a scalar function or
    a vector field, stored per unknown (``None`` keys the known part).
    Scalars carry one component, fields carry (xi, eta1, eta2).
    """

    __slots__ = ("kind", "parts")

    def __init__(self, kind: str, parts: Dict[Optional[str], Tuple[SymExpr, ...]]):
        self.kind = kind
        self.parts = parts

    @classmethod
    def scalar(cls, e: SymExpr, unknown: Optional[str] = None) -> "Value":
        return cls(SCALAR, {unknown: (e,)})

    @classmethod
    def basis(cls, index: int) -> "Value":
        components = [SymExpr(), SymExpr(), SymExpr()]
        components[index] = SymExpr.constant(ONE)
        return cls(FIELD, {None: tuple(components)})

    def unknowns(self):
        return [k for k in self.parts if k is not None]


class LinearTh(NamedTuple):
    """a * th + b"""

    a: ExactScalar
    b: ExactScalar


class GeneratorParser:
    def __init__(self, text: str, unknowns: Iterable[str] = ()):
        self.text = text
        self.unknowns = tuple(unknowns)
        for name in self.unknowns:
            if name in RESERVED or not name.isidentifier():
                raise GeneratorSyntaxError(f"'{name}' cannot name an unknown", 0, text)
        self.stream = TokenStream(
            tokenize(text, GeneratorSyntaxError), text, GeneratorSyntaxError
        )

    def error(self, message: str, token=None):
        self.stream.error(message, token)

    def parse(self) -> Value:
        value = self.parse_expr()
        self.stream.expect_end()
        return value

    # arithmetic on values

    def combine(self, left: Value, right: Value, sign: int, token) -> Value:
        if left.kind != right.kind:
            self.error("cannot add a scalar to a vector field", token)
        parts = dict(left.parts)
        for key, components in right.parts.items():
            components = tuple(c * sign for c in components)
            if key in parts:
                components = tuple(a + b for a, b in zip(parts[key], components))
            parts[key] = components
        return Value(left.kind, parts)

    def multiply(self, left: Value, right: Value, token) -> Value:
        if left.kind == FIELD and right.kind == FIELD:
            self.error("cannot multiply two vector fields", token)
        if left.unknowns() and right.unknowns():
            self.error("unknowns must appear linearly", token)
        if left.kind == FIELD:
            left, right = right, left
        parts = {}
        for key_a, (factor,) in left.parts.items():
            for key_b, components in right.parts.items():
                key = key_a if key_a is not None else key_b
                product = tuple(factor * c for c in components)
                if key in parts:
                    product = tuple(a + b for a, b in zip(parts[key], product))
                parts[key] = product
        return Value(right.kind, parts)

    def power(self, base: Value, exponent: int, token) -> Value:
        if base.kind == FIELD:
            self.error("cannot raise a vector field to a power", token)
        if exponent == 1:
            return base
        if base.unknowns():
            self.error("unknowns must appear linearly", token)
        return Value.scalar(base.parts[None][0] ** exponent)

    # grammar

    def parse_expr(self) -> Value:
        value = self.parse_term()
        while self.stream.peek_is(OP, ("+", "-")):
            token = self.stream.advance()
            sign = 1 if token.text == "+" else -1
            value = self.combine(value, self.parse_term(), sign, token)
        return value

    def parse_term(self) -> Value:
        value = self.parse_factor()
        while self.stream.peek_is(OP, ("*",)):
            token = self.stream.advance()
            value = self.multiply(value, self.parse_factor(), token)
        return value

    def parse_factor(self) -> Value:
        base = self.parse_base()
        if self.stream.peek_is(OP, ("^",)):
            token = self.stream.advance()
            exponent = self.stream.current
            if exponent.kind != NUMBER or not exponent.text.isdigit():
                self.error("expected a natural-number exponent")
            self.stream.advance()
            return self.power(base, int(exponent.text), token)
        return base

    def parse_base(self) -> Value:
        stream = self.stream
        token = stream.current

        if token.kind == NUMBER:
            stream.advance()
            return Value.scalar(SymExpr.constant(ExactScalar(Fraction(token.text))))

        if token.kind == OP and token.text == "-":
            stream.advance()
            return self.multiply(Value.scalar(SymExpr.constant(-1)), self.parse_base(), token)

        if token.kind == OP and token.text == "(":
            stream.advance()
            value = self.parse_expr()
            stream.expect(OP, ")")
            return value

        if token.kind == NAME:
            stream.advance()
            name = token.text
            if name in CONSTANTS:
                return Value.scalar(SymExpr.constant(CONSTANTS[name]))
            if name in SYMBOLS:
                return Value.scalar(SymExpr.symbol(SYMBOLS[name]))
            if name in BASIS_FIELDS:
                return Value.basis(BASIS_FIELDS[name])
            if name == "exp":
                stream.expect(OP, "(")
                argument = self.parse_linear_expr()
                stream.expect(OP, ")")
                if not argument.b.is_zero():
                    self.error("exp() argument must be a multiple of th", token)
                return Value.scalar(SymExpr.exp(argument.a))
            if name in self.unknowns:
                return Value.scalar(SymExpr.constant(ONE), unknown=name)
            if name == "th":
                self.error("th may only appear inside exp()", token)
            raise UnknownIdentifierError(name, token.position, self.text)

        if token.kind == END:
            self.error("expected a number, symbol, unknown or '('")
        self.error(f"unexpected '{token.text}'")

    # exp() arguments: affine in th with constant coefficients

    def parse_linear_expr(self) -> LinearTh:
        value = self.parse_linear_term()
        while self.stream.peek_is(OP, ("+", "-")):
            sign = 1 if self.stream.advance().text == "+" else -1
            other = self.parse_linear_term()
            value = LinearTh(value.a + other.a * sign, value.b + other.b * sign)
        return value

    def parse_linear_term(self) -> LinearTh:
        value = self.parse_linear_base()
        while self.stream.peek_is(OP, ("*",)):
            token = self.stream.advance()
            other = self.parse_linear_base()
            if not value.a.is_zero() and not other.a.is_zero():
                self.error("exp() argument must be linear in th", token)
            value = LinearTh(value.a * other.b + other.a * value.b, value.b * other.b)
        return value

    def parse_linear_base(self) -> LinearTh:
        stream = self.stream
        token = stream.current
        if token.kind == NUMBER:
            stream.advance()
            return LinearTh(ZERO, ExactScalar(Fraction(token.text)))
        if token.kind == OP and token.text == "-":
            stream.advance()
            value = self.parse_linear_base()
            return LinearTh(-value.a, -value.b)
        if token.kind == OP and token.text == "(":
            stream.advance()
            value = self.parse_linear_expr()
            stream.expect(OP, ")")
            return value
        if token.kind == NAME:
            stream.advance()
            if token.text == "th":
                return LinearTh(ONE, ZERO)
            if token.text in CONSTANTS:
                return LinearTh(ZERO, CONSTANTS[token.text])
            self.error(f"'{token.text}' cannot appear inside exp()", token)
        self.error("expected a constant or th")


def to_generator(components: Tuple[SymExpr, ...]) -> GeneratorSym:
    return GeneratorSym(*components)


def parse_ansatz(text: str, unknowns: Sequence[str] = ()) -> Ansatz:
    """
    Parses a generator text with the declared ``unknowns`` into an
    ``Ansatz``. Raises ``GeneratorSyntaxError`` or ``UnknownIdentifierError``.
    """
    parser = GeneratorParser(text, unknowns)
    value = parser.parse()
    if value.kind != FIELD:
        raise GeneratorSyntaxError("expression is not a vector field", 0, text)
    empty = (SymExpr(), SymExpr(), SymExpr())
    base = to_generator(value.parts.get(None, empty))
    parts = tuple((name, to_generator(value.parts.get(name, empty))) for name in unknowns)
    logger.debug("parsed generator %r as %s", text, base)
    return Ansatz(base, parts)


def parse_generator(text: str) -> GeneratorSym:
    return parse_ansatz(text).base


# The family of nine point generators


def gamma1() -> GeneratorSym:
    return GeneratorSym(eta1=SymExpr.symbol(U1) * 2, eta2=SymExpr.symbol(U2))


def gamma2() -> GeneratorSym:
    return GeneratorSym(xi=SymExpr.constant(ONE))


def gamma3() -> GeneratorSym:
    return GeneratorSym(eta1=SymExpr.symbol(U1))


def gamma4(sign: int, rate: ExactScalar = ONE) -> GeneratorSym:
    """exp(+-rate sqrt2 i th) d_u1"""
    return GeneratorSym(eta1=SymExpr.exp(SQRT2 * I * rate * sign))


def gamma6(sign: int, coefficient: ExactScalar) -> GeneratorSym:
    """exp(+-2 sqrt2 i th) (d_th +- coefficient u1 d_u1)"""
    e = SymExpr.exp(SQRT2 * I * 2 * sign)
    return GeneratorSym(xi=e, eta1=e * SymExpr.symbol(U1) * (coefficient * sign))


def gamma8(sign: int, coefficient: ExactScalar) -> GeneratorSym:
    """exp(+-sqrt2 i th) (u1 d_th +- coefficient u1^2 d_u1)"""
    e = SymExpr.exp(SQRT2 * I * sign) * SymExpr.symbol(U1)
    return GeneratorSym(xi=e, eta1=e * SymExpr.symbol(U1) * (coefficient * sign))


PRINTED_COEFFICIENT = I
CORRECTED_COEFFICIENT = SQRT2 * I
CORRUPTION = ExactScalar(Fraction(11, 10))

SIGNS = (("+", 1), ("-", -1))

CATALOGUE_NAMES = ("G1", "G2", "G3", "G4+", "G4-", "G6+", "G6-", "G8+", "G8-")

# The G6 and G8 shapes with the u1-coefficient left unknown
DEFAULT_ANSATZE = {
    "G6+": "exp(2*sqrt2*i*th)*(d_th + c*u1*d_u1)",
    "G6-": "exp(-2*sqrt2*i*th)*(d_th + c*u1*d_u1)",
    "G8+": "exp(sqrt2*i*th)*(u1*d_th + c*u1^2*d_u1)",
    "G8-": "exp(-sqrt2*i*th)*(u1*d_th + c*u1^2*d_u1)",
}


def catalogue(coefficient: ExactScalar = CORRECTED_COEFFICIENT) -> Dict[str, GeneratorSym]:
    """
    The nine generators keyed G1, G2, G3, G4+, G4-, G6+, G6-, G8+ and G8-,
    with ``coefficient`` in the u1 d_u1 and u1^2 d_u1 terms of G6 and G8.
    """
    generators = {"G1": gamma1(), "G2": gamma2(), "G3": gamma3()}
    for label, sign in SIGNS:
        generators[f"G4{label}"] = gamma4(sign)
    for label, sign in SIGNS:
        generators[f"G6{label}"] = gamma6(sign, coefficient)
    for label, sign in SIGNS:
        generators[f"G8{label}"] = gamma8(sign, coefficient)
    return generators


def printed_catalogue() -> Dict[str, GeneratorSym]:
    return catalogue(PRINTED_COEFFICIENT)


def corrected_catalogue() -> Dict[str, GeneratorSym]:
    return catalogue(CORRECTED_COEFFICIENT)


def corrupted_catalogue() -> Dict[str, GeneratorSym]:
    """
    Negative controls: the coefficient that makes each generator a symmetry
    scaled by 11/10. G1, G2 and G3 have no such coefficient and are absent.
    """
    generators = {}
    for label, sign in SIGNS:
        generators[f"G4{label}"] = gamma4(sign, CORRUPTION)
    for label, sign in SIGNS:
        generators[f"G6{label}"] = gamma6(sign, CORRECTED_COEFFICIENT * CORRUPTION)
    for label, sign in SIGNS:
        generators[f"G8{label}"] = gamma8(sign, CORRECTED_COEFFICIENT * CORRUPTION)
    return generators


def resolve(name_or_text: str, generators: Optional[Dict[str, str]] = None) -> GeneratorSym:
    """
    Looks ``name_or_text`` up among ``generators`` (name -> text), then the
    corrected catalogue, and finally parses it as generator text.
    """
    if generators and name_or_text in generators:
        return parse_generator(generators[name_or_text])
    known = corrected_catalogue()
    if name_or_text in known:
        return known[name_or_text]
    return parse_generator(name_or_text)
