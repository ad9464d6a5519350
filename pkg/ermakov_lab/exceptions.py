from typing import Any, Dict, Optional


class ErmakovError(Exception):
    """
    Base class for every error raised by ``ermakov_lab``. The ``exit_code``
    class attribute is what the command-line front end exits with when an
    error of this type escapes a command.
    """

    exit_code = 2

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_diagnostic(self) -> Dict[str, Any]:
        diagnostic = {
            "error": type(self).__name__,
            "code": self.exit_code,
            "message": self.message,
        }
        diagnostic.update(self.details)
        return diagnostic


# Usage and configuration errors (exit code 1)


class ConfigurationError(ErmakovError):
    exit_code = 1


class ShapeSyntaxError(ConfigurationError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}", position=position)
        self.position = position
        self.text = text


class EmptyExpressionError(ShapeSyntaxError):
    def __init__(self, text: str = ""):
        super().__init__("empty expression", 0, text)


class UnknownIdentifierError(ShapeSyntaxError):
    def __init__(self, name: str, position: int, text: str = ""):
        super().__init__(f"unknown identifier '{name}'", position, text)
        self.name = name


class GeneratorSyntaxError(ShapeSyntaxError):
    pass


class SpecValidationError(ConfigurationError):
    pass


class ScenarioError(ConfigurationError):
    pass


class UsageError(ConfigurationError):
    pass


# Numerical failures (exit code 2)


class NumericalError(ErmakovError):
    exit_code = 2


class ShapeDomainError(NumericalError):
    def __init__(self, message: str, point: Optional[float] = None):
        super().__init__(message, point=point)
        self.point = point


class SingularConfigurationError(NumericalError):
    pass


class SingularityError(NumericalError):
    pass


class StepSizeUnderflowError(NumericalError):
    pass


class NonFiniteStateError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class QuadraturePoleError(QuadratureError):
    pass


class TurningPointError(NumericalError):
    pass


class RootFindingError(NumericalError):
    pass


class FlowEscapeError(NumericalError):
    pass


class InvalidReductionError(NumericalError):
    pass


# Violated reduction preconditions (exit code 3)


class PreconditionError(ErmakovError):
    exit_code = 3

