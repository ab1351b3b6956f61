"""Exception types shared across the library."""


class MeasureError(ValueError):
    """Invalid construction or use of a probability measure."""


class DegenerateMeasureError(MeasureError):
    """Zero or non-finite variance where a standardizable law is required."""


class MembershipError(MeasureError):
    """A measure fails the centred/reduced/moment requirements of an operation."""


class MomentUnavailableError(MeasureError):
    """The requested moment is finite but has no exact evaluation rule."""


class CharFnBoundError(ArithmeticError):
    """A characteristic function evaluation exceeded modulus 1 beyond tolerance."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""
