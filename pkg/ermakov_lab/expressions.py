import math
from typing import FrozenSet

from .constants import SINGULARITY_GUARD
from .exceptions import ShapeDomainError


class Node:
    """
    A node of a parsed shape-function tree. Trees are immutable once built:
    every node uses ``__slots__`` and nothing mutates children after
    ``__init__()``.
    """

    __slots__ = ()

    def evaluate(self, point: float) -> float:
        raise NotImplementedError

    def derivative(self) -> "Node":
        raise NotImplementedError

    def variables(self) -> FrozenSet[str]:
        raise NotImplementedError

    def is_constant(self) -> bool:
        return not self.variables()


class Constant(Node):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def evaluate(self, point: float) -> float:
        return self.value

    def derivative(self) -> Node:
        return ZERO

    def variables(self) -> FrozenSet[str]:
        return frozenset()

    def __str__(self) -> str:
        return repr(self.value)


ZERO = Constant(0.0)
ONE = Constant(1.0)


class Variable(Node):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def evaluate(self, point: float) -> float:
        return float(point)

    def derivative(self) -> Node:
        return ONE

    def variables(self) -> FrozenSet[str]:
        return frozenset((self.name,))

    def __str__(self) -> str:
        return self.name


def is_zero(node: Node) -> bool:
    return isinstance(node, Constant) and node.value == 0.0


def is_one(node: Node) -> bool:
    return isinstance(node, Constant) and node.value == 1.0


def checked(value: float, description: str, point: float) -> float:
    if not math.isfinite(value):
        raise ShapeDomainError(f"{description} is not finite", point)
    return value


class UnaryFunction(Node):
    """
    A one-argument function node. Subclasses set ``name`` and implement
    ``apply()`` (the real function) and ``outer_derivative()`` (the
    derivative of the function, as a tree, evaluated at ``self.argument``).
    """

    name = None
    callable_by_name = True

    __slots__ = ("argument",)

    def __init__(self, argument: Node):
        self.argument = argument

    def apply(self, value: float, point: float) -> float:
        raise NotImplementedError

    def outer_derivative(self) -> Node:
        raise NotImplementedError

    def evaluate(self, point: float) -> float:
        inner = self.argument.evaluate(point)
        try:
            result = self.apply(inner, point)
        except OverflowError:
            raise ShapeDomainError(f"{self.name}() overflowed", point)
        return checked(result, f"{self.name}({inner!r})", point)

    def derivative(self) -> Node:
        # chain rule
        return multiply(self.outer_derivative(), self.argument.derivative())

    def variables(self) -> FrozenSet[str]:
        return self.argument.variables()

    def __str__(self) -> str:
        return f"{self.name}({self.argument})"


class Sin(UnaryFunction):
    name = "sin"

    def apply(self, value: float, point: float) -> float:
        return math.sin(value)

    def outer_derivative(self) -> Node:
        return Cos(self.argument)


class Cos(UnaryFunction):
    name = "cos"

    def apply(self, value: float, point: float) -> float:
        return math.cos(value)

    def outer_derivative(self) -> Node:
        return Negate(Sin(self.argument))


class Tan(UnaryFunction):
    name = "tan"

    def apply(self, value: float, point: float) -> float:
        if abs(math.cos(value)) < SINGULARITY_GUARD:
            raise ShapeDomainError("tan() pole", point)
        return math.tan(value)

    def outer_derivative(self) -> Node:
        return add(ONE, Power(Tan(self.argument), Constant(2)))


class Exp(UnaryFunction):
    name = "exp"

    def apply(self, value: float, point: float) -> float:
        return math.exp(value)

    def outer_derivative(self) -> Node:
        return Exp(self.argument)


class Log(UnaryFunction):
    name = "log"

    def apply(self, value: float, point: float) -> float:
        if value <= 0.0:
            raise ShapeDomainError(f"log() of non-positive value {value!r}", point)
        return math.log(value)

    def outer_derivative(self) -> Node:
        return divide(ONE, self.argument)


class Sqrt(UnaryFunction):
    name = "sqrt"

    def apply(self, value: float, point: float) -> float:
        if value < 0.0:
            raise ShapeDomainError(f"sqrt() of negative value {value!r}", point)
        return math.sqrt(value)

    def outer_derivative(self) -> Node:
        return divide(ONE, multiply(Constant(2), Sqrt(self.argument)))


class Negate(UnaryFunction):
    name = "neg"
    callable_by_name = False

    def apply(self, value: float, point: float) -> float:
        return -value

    def derivative(self) -> Node:
        return negate(self.argument.derivative())

    def __str__(self) -> str:
        return f"(-{self.argument})"


class BinaryOperation(Node):
    """
    A two-argument operator node. Subclasses set ``operator`` (the symbol
    used by the parser) and implement ``apply()`` and ``derivative()``.
    """

    operator = None

    __slots__ = ("left", "right")

    def __init__(self, left: Node, right: Node):
        self.left = left
        self.right = right

    def apply(self, left: float, right: float, point: float) -> float:
        raise NotImplementedError

    def evaluate(self, point: float) -> float:
        left = self.left.evaluate(point)
        right = self.right.evaluate(point)
        try:
            result = self.apply(left, right, point)
        except OverflowError:
            raise ShapeDomainError(f"'{self.operator}' overflowed", point)
        return checked(result, f"{left!r} {self.operator} {right!r}", point)

    def variables(self) -> FrozenSet[str]:
        return self.left.variables() | self.right.variables()

    def __str__(self) -> str:
        return f"({self.left} {self.operator} {self.right})"


class Add(BinaryOperation):
    operator = "+"

    def apply(self, left: float, right: float, point: float) -> float:
        return left + right

    def derivative(self) -> Node:
        return add(self.left.derivative(), self.right.derivative())


class Subtract(BinaryOperation):
    operator = "-"

    def apply(self, left: float, right: float, point: float) -> float:
        return left - right

    def derivative(self) -> Node:
        return subtract(self.left.derivative(), self.right.derivative())


class Multiply(BinaryOperation):
    operator = "*"

    def apply(self, left: float, right: float, point: float) -> float:
        return left * right

    def derivative(self) -> Node:
        return add(
            multiply(self.left.derivative(), self.right),
            multiply(self.left, self.right.derivative()),
        )


class Divide(BinaryOperation):
    operator = "/"

    def apply(self, left: float, right: float, point: float) -> float:
        if right == 0.0:
            raise ShapeDomainError("division by zero", point)
        return left / right

    def derivative(self) -> Node:
        numerator = subtract(
            multiply(self.left.derivative(), self.right),
            multiply(self.left, self.right.derivative()),
        )
        return divide(numerator, Power(self.right, Constant(2)))


class Power(BinaryOperation):
    operator = "^"

    def apply(self, left: float, right: float, point: float) -> float:
        if left == 0.0 and right < 0.0:
            raise ShapeDomainError("division by zero", point)
        if left < 0.0 and not float(right).is_integer():
            raise ShapeDomainError(
                f"negative base {left!r} with non-integer exponent {right!r}", point
            )
        return math.pow(left, right)

    def derivative(self) -> Node:
        base, exponent = self.left, self.right
        if exponent.is_constant():
            # d(u^n) = n * u^(n - 1) * u'
            reduced = Power(base, subtract(exponent, ONE))
            return multiply(multiply(exponent, reduced), base.derivative())
        # d(u^v) = u^v * (v' * log(u) + v * u' / u)
        return multiply(
            self,
            add(
                multiply(exponent.derivative(), Log(base)),
                divide(multiply(exponent, base.derivative()), base),
            ),
        )


BINARY_OPERATIONS = {
    klass.operator: klass for klass in BinaryOperation.__subclasses__()
}

UNARY_FUNCTIONS = {
    klass.name: klass
    for klass in UnaryFunction.__subclasses__()
    if klass.callable_by_name
}


# The helpers below fold the trivial identities produced by differentiation
# (0 + u, 1 * u, u / 1, ...) so that derivative trees stay readable. They are
# not a simplifier.


def add(left: Node, right: Node) -> Node:
    if isinstance(left, Constant) and isinstance(right, Constant):
        return Constant(left.value + right.value)
    if is_zero(left):
        return right
    if is_zero(right):
        return left
    return Add(left, right)


def subtract(left: Node, right: Node) -> Node:
    if isinstance(left, Constant) and isinstance(right, Constant):
        return Constant(left.value - right.value)
    if is_zero(right):
        return left
    if is_zero(left):
        return negate(right)
    return Subtract(left, right)


def multiply(left: Node, right: Node) -> Node:
    if is_zero(left) or is_zero(right):
        return ZERO
    if isinstance(left, Constant) and isinstance(right, Constant):
        return Constant(left.value * right.value)
    if is_one(left):
        return right
    if is_one(right):
        return left
    return Multiply(left, right)


def divide(left: Node, right: Node) -> Node:
    if is_zero(left):
        return ZERO
    if is_one(right):
        return left
    return Divide(left, right)


def negate(node: Node) -> Node:
    if is_zero(node):
        return ZERO
    if isinstance(node, Constant):
        return Constant(-node.value)
    return Negate(node)

