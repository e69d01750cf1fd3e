class SDWaveError(Exception):
    """Base class for package errors."""


class ConfigError(SDWaveError, ValueError):
    """Invalid configuration or parameters (CLI exit code 1)."""


class NumericError(SDWaveError, ArithmeticError):
    """Non-finite input or a numerically singular operation (CLI exit code 2)."""


class SingularSystemError(NumericError):
    pass


class UsageError(SDWaveError, ValueError):
    """An operation was called on data that does not meet its preconditions."""


class DomainTooSmallError(UsageError):
    """The truncated grid does not contain the support a computation needs."""
