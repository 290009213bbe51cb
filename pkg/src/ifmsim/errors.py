"""Exception hierarchy. Every error carries a stable ``code`` string."""


class IFMError(Exception):
    code = "IFM_ERROR"

    def __init__(self, message="", code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class AllZeroError(IFMError, ValueError):
    code = "ALL_ZERO"


class BadParamError(IFMError, ValueError):
    code = "BAD_PARAM"


class UnknownModeError(IFMError, KeyError):
    code = "UNKNOWN_MODE"

    # KeyError.__str__ would repr() the message
    __str__ = IFMError.__str__


class CertainDetectionError(IFMError):
    code = "CERTAIN_DETECTION"


class ImpossiblePostselectionError(IFMError):
    code = "IMPOSSIBLE_POSTSELECTION"


class ZeroOverlapError(IFMError, ZeroDivisionError):
    code = "ZERO_OVERLAP"


class CircuitValidationError(IFMError, ValueError):
    """Raised when a circuit fails :func:`ifmsim.engine.validate`."""

    code = "VALIDATION_ERROR"

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(lines)


class ScenarioError(IFMError, ValueError):
    """Scenario file problem, with optional field path and source line."""

    code = "PARSE_ERROR"

    def __init__(self, message, code=None, field=None, line=None, violations=()):
        self.field = field
        self.line = line
        self.violations = list(violations)
        where = []
        if field:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message, code=code)


class ScenarioIOError(IFMError, OSError):
    """A scenario file could not be read."""

    code = "IO_ERROR"

    __str__ = IFMError.__str__
