"""
Exact arithmetic in the field Q(sqrt2, i).

Values are elements of sympy's ``QQ.algebraic_field(sqrt(2), I)``. The
wrapper only adds operator coercion from Python rationals and a fixed
rendering over the basis 1, sqrt2, i, sqrt2*i.
"""
import math
from fractions import Fraction
from numbers import Rational
from typing import Tuple, Union

from sympy import I as IMAGINARY_UNIT
from sympy import QQ, Add, S, sqrt

Scalar = Union["ExactScalar", int, Fraction]

FIELD = QQ.algebraic_field(sqrt(2), IMAGINARY_UNIT)

# q0 + q1 sqrt2 + q2 i + q3 sqrt2 i
BASIS = (S.One, sqrt(2), IMAGINARY_UNIT, sqrt(2) * IMAGINARY_UNIT)
BASIS_NAMES = ("", "sqrt2", "i", "sqrt2*i")


def rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"{value!r} is not an exact rational")


def field_rational(value):
    value = rational(value)
    return FIELD.convert_from(QQ(value.numerator, value.denominator), QQ)


ROOT2_ELEMENT = FIELD.from_sympy(sqrt(2))
I_ELEMENT = FIELD.from_sympy(IMAGINARY_UNIT)
BASIS_ELEMENTS = (FIELD.one, ROOT2_ELEMENT, I_ELEMENT, ROOT2_ELEMENT * I_ELEMENT)


class ExactScalar:
    """
    q0 + q1 sqrt2 + i (q2 + q3 sqrt2) with rational q's. Instances are
    immutable and hashable; equality is exact.
    """

    __slots__ = ("element", "_parts")

    def __init__(self, q0=0, q1=0, q2=0, q3=0):
        element = FIELD.zero
        for q, basis in zip((q0, q1, q2, q3), BASIS_ELEMENTS):
            q = rational(q)
            if q:
                element = element + field_rational(q) * basis
        object.__setattr__(self, "element", element)
        object.__setattr__(self, "_parts", None)

    @classmethod
    def from_element(cls, element) -> "ExactScalar":
        scalar = cls.__new__(cls)
        object.__setattr__(scalar, "element", element)
        object.__setattr__(scalar, "_parts", None)
        return scalar

    @classmethod
    def from_sympy(cls, expr) -> "ExactScalar":
        return cls.from_element(FIELD.from_sympy(expr))

    @classmethod
    def coerce(cls, value: Scalar) -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return value
        return cls.from_element(field_rational(value))

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    def to_sympy(self):
        return FIELD.to_sympy(self.element)

    @property
    def parts(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        if self._parts is None:
            coefficients = dict(
                term.as_coeff_Mul()[::-1] for term in Add.make_args(self.to_sympy())
            )
            unknown = set(coefficients) - set(BASIS)
            if unknown:
                raise ArithmeticError(f"{self.to_sympy()} is not expanded over 1, sqrt2, i")
            parts = tuple(
                Fraction(int(c.p), int(c.q))
                for c in (S(coefficients.get(basis, 0)) for basis in BASIS)
            )
            object.__setattr__(self, "_parts", parts)
        return self._parts

    q0 = property(lambda self: self.parts[0])
    q1 = property(lambda self: self.parts[1])
    q2 = property(lambda self: self.parts[2])
    q3 = property(lambda self: self.parts[3])

    def is_zero(self) -> bool:
        return FIELD.is_zero(self.element)

    def is_real(self) -> bool:
        return self.q2 == 0 and self.q3 == 0

    def __eq__(self, other):
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self.element == other.element

    def __hash__(self):
        return hash(tuple(self.element.to_list()))

    def __reduce__(self):
        return (ExactScalar, self.parts)

    def __add__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactScalar.from_element(self.element + other.element)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar.from_element(-self.element)

    def __sub__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactScalar.from_element(self.element - other.element)

    def __rsub__(self, other):
        return ExactScalar.coerce(other) - self

    def __mul__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return ExactScalar.from_element(self.element * other.element)

    __rmul__ = __mul__

    def conjugate(self) -> "ExactScalar":
        q0, q1, q2, q3 = self.parts
        return ExactScalar(q0, q1, -q2, -q3)

    def inverse(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("ExactScalar division by zero")
        return ExactScalar.from_element(FIELD.one / self.element)

    def __truediv__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        base = self if exponent >= 0 else self.inverse()
        result = FIELD.one
        for _ in range(abs(exponent)):
            result = result * base.element
        return ExactScalar.from_element(result)

    def __complex__(self) -> complex:
        root2 = math.sqrt(2.0)
        return complex(
            float(self.q0) + float(self.q1) * root2,
            float(self.q2) + float(self.q3) * root2,
        )

    def sort_key(self) -> Tuple[Fraction, ...]:
        return self.parts

    def __str__(self) -> str:
        terms = []
        for coefficient, basis in zip(self.parts, BASIS_NAMES):
            if coefficient == 0:
                continue
            if not basis:
                text = str(abs(coefficient))
            elif abs(coefficient) == 1:
                text = basis
            else:
                text = f"{abs(coefficient)}*{basis}"
            terms.append(("-" if coefficient < 0 else "+", text))
        if not terms:
            return "0"
        sign, text = terms[0]
        rendered = ("-" if sign == "-" else "") + text
        for sign, text in terms[1:]:
            rendered += f" {sign} {text}"
        return rendered

    def __repr__(self) -> str:
        return f"ExactScalar({str(self)!r})"


ZERO = ExactScalar()
ONE = ExactScalar(1)
SQRT2 = ExactScalar(0, 1)
I = ExactScalar(0, 0, 1)
