"""Exception hierarchy shared across the package."""


class LowInertiaError(Exception):
    """Base class for every error raised by this package."""


class AlignmentError(LowInertiaError):
    """Two hourly series cannot be paired (different step or grid phase)."""


class EmptyOverlapError(AlignmentError):
    """Two hourly series share no hour."""


class AbsentValueError(LowInertiaError):
    """A series contains an explicit absent marker where a value is needed."""


class RangeError(LowInertiaError):
    """A timestamp falls outside the range covered by a series."""


class InconsistencyError(LowInertiaError):
    """Inputs contradict each other (e.g. negative post-fault kinetic energy)."""


class DomainError(LowInertiaError, ValueError):
    """An argument lies outside the mathematical domain of a formula."""


class OutOfValidatedRangeError(DomainError):
    """A sizing curve was queried outside the range it was derived for."""


class SingularFitError(LowInertiaError):
    """A regression cannot be fitted because the design is degenerate."""


class NumericalInstabilityError(LowInertiaError, ArithmeticError):
    """The time-domain integration produced a non-finite state."""


class CapacityExceededError(LowInertiaError):
    """An HVDC link would have to carry more than its capacity."""

    def __init__(self, message, hours=()):
        super().__init__(message)
        self.hours = tuple(hours)


class ParameterError(LowInertiaError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ConfigurationError(LowInertiaError):
    """Configuration is incomplete or its cross-references do not resolve."""


class IngestionError(LowInertiaError):
    """An input file is malformed. Carries the offending 1-based line number."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.path = path
        self.line = line
