"""Exception hierarchy shared by all modules."""


class HFCurrentError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(HFCurrentError, ValueError):
    pass


class DegenerateInput(HFCurrentError, ValueError):
    """Input carries no usable power (all-zero series, zero-variance noise)."""


class NumericallyDegenerate(HFCurrentError, ArithmeticError):
    def __init__(self, message: str, stage: int | None = None):
        super().__init__(message)
        self.stage = stage


class InsufficientFloorSupport(HFCurrentError, ValueError):
    pass


class InsufficientData(HFCurrentError, ValueError):
    pass


class FormatError(HFCurrentError, ValueError):
    """Malformed input file; ``position`` is a line number or byte offset."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class ConfigError(HFCurrentError, ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line
