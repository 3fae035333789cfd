"""Exception types shared across the package."""


class InfocorrError(Exception):
    """Base class."""


class DimensionError(InfocorrError, ValueError):
    pass


class DomainError(InfocorrError, ValueError):
    """A parameter point (or its finite-difference stencil) leaves its box."""


class NumericalError(InfocorrError, ArithmeticError):
    pass


class ScenarioError(InfocorrError, ValueError):
    """Invalid scenario file or field; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class PoleError(InfocorrError, ZeroDivisionError):
    pass


class InvariantError(InfocorrError, AssertionError):
    pass
