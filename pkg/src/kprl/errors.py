"""Exception types shared across the package."""


class KprlError(Exception):
    """Base class for package errors."""


class ParameterError(KprlError, ValueError):
    """A caller-supplied argument is outside its documented domain."""


class DatasetFormatError(KprlError, ValueError):
    """A dataset file is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CheckpointFormatError(KprlError, ValueError):
    """A checkpoint or model file is malformed or version-incompatible."""


class DimensionError(KprlError, ValueError):
    """Array or network dimensions do not match."""


class ResourceLimitError(KprlError, RuntimeError):
    """An operation would exceed its configured resource budget."""


class EpisodeDoneError(KprlError, RuntimeError):
    """step() was called on a finished episode."""


class IntegrityError(KprlError, RuntimeError):
    """Data violates an internal consistency guarantee (likely a solver bug)."""


class NumericsError(KprlError, RuntimeError):
    """A non-finite value appeared in a numeric computation."""
