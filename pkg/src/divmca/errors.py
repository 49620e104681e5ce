"""Exception types raised by divmca."""


class DivMcaError(ValueError):
    """Base class for all library errors."""


class InvalidRetention(DivMcaError):
    pass


class OutOfSupport(DivMcaError):
    pass


class BadRegime(DivMcaError):
    pass


class BadState(DivMcaError):
    pass


class DegenerateKernel(DivMcaError):
    pass


class CannotPayAtRuin(DivMcaError):
    pass


class NotAtReflectingBoundary(DivMcaError):
    pass


class MissingPolicy(DivMcaError):
    pass


class OracleUndefined(DivMcaError):
    pass


class ConfigError(DivMcaError):
    """Configuration could not be turned into a run.

    ``kind`` is one of ``"syntax"``, ``"schema"`` or ``"semantic"``; ``issues``
    holds every problem found as ``(json_path, message)`` pairs.
    """

    def __init__(self, kind, issues):
        self.kind = kind
        self.issues = list(issues)
        lines = [f"{path}: {msg}" for path, msg in self.issues]
        super().__init__(f"{kind} error:\n  " + "\n  ".join(lines))
