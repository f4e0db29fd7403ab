"""Exception and warning types shared across the package."""


class InvalidArgument(ValueError):
    pass


class OutOfRange(ValueError):
    """A query beyond the enumerated spectral range."""

    def __init__(self, message, lambda_max=None):
        super().__init__(message)
        self.lambda_max = lambda_max


class ResourceLimitError(MemoryError):
    def __init__(self, message, estimate_bytes):
        super().__init__(message)
        self.estimate_bytes = estimate_bytes


class UnsupportedConfiguration(NotImplementedError):
    pass


class InsufficientResolution(ValueError):
    def __init__(self, message, minimal_resolution):
        super().__init__(message)
        self.minimal_resolution = minimal_resolution


class ConjugatePointError(ValueError):
    pass


class NumericalInstability(ArithmeticError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class PrecisionWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass


class GridRejected(InvalidArgument):
    """A sample grid violates a validity precondition; ``minimal`` is the admissible bound."""

    def __init__(self, message, minimal):
        super().__init__(message)
        self.minimal = minimal


class TableFormatError(ValueError):
    pass


class TableVersionMismatch(TableFormatError):
    pass
