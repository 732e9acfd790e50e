"""Typed exceptions shared across the package."""


class VolumeLabError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(VolumeLabError):
    """A graph, lattice, or model specification is malformed."""


class EnumerationCapError(VolumeLabError):
    """Exact enumeration was requested beyond the configured edge cap."""


class DomainError(VolumeLabError):
    """An operation was called outside its mathematical domain."""


class InsufficientDataError(VolumeLabError):
    """Not enough samples to produce the requested estimate."""


class BudgetError(VolumeLabError):
    """An iterative procedure exhausted its budget without converging."""

    def __init__(self, message: str, horizon: int | None = None):
        super().__init__(message)
        self.horizon = horizon


class SchemaError(VolumeLabError):
    """Configuration file violates the schema.

    `path` is the dotted field path of the offending entry, so the message
    always tells the user which key to fix.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class IntegrityError(VolumeLabError):
    """A run directory's contents do not match its manifest digests."""
