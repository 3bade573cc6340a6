"""Exception types raised across the package."""


class QMAEError(Exception):
    """Base class for package errors."""


class ConfigError(QMAEError, ValueError):
    """Inconsistent model or run configuration."""


class GeometryError(ConfigError):
    """Patch dimensions do not tile the image."""


class ParamError(QMAEError, ValueError):
    """Parameter vector has the wrong length or the circuit window does not fit."""


class DegenerateInputError(QMAEError, ValueError):
    """Input vector cannot be normalized (all zeros)."""


class StateError(QMAEError, ValueError):
    """Register is not in the state an operation requires."""


class NumericalError(QMAEError, ArithmeticError):
    """A numerical invariant was violated beyond tolerance."""


class ResourceError(QMAEError, RuntimeError):
    """Requested object would exceed the configured size guard."""


class FormatError(QMAEError, ValueError):
    """Malformed file payload."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
