"""Exception hierarchy shared by all noiseflow modules."""


class NoiseflowError(Exception):
    """Base class for every error raised by noiseflow."""


class ModelError(NoiseflowError, ValueError):
    """A network model violates one of its invariants."""

    def __init__(self, message: str, invariant: str | None = None):
        super().__init__(message)
        self.invariant = invariant


class TopologyError(ModelError):
    """An operation that needs the 2x2 plaquette was given another topology."""


class ConfigError(NoiseflowError, ValueError):
    """A configuration document could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SpecError(NoiseflowError, ValueError):
    """A sweep specification or parameter selector is malformed."""


class NumericalError(NoiseflowError, ArithmeticError):
    """A numerical routine failed or a stability precondition was violated."""


class IntegrationError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate=None, panels: int | None = None):
        super().__init__(message)
        self.error_estimate = error_estimate
        self.panels = panels


class OracleMismatchError(NumericalError):
    """Two independent routes to the same quantity disagree."""
