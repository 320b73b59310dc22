"""Exception types shared across the package.

ValidationError signals a malformed input (CLI exit code 2).
ResourceLimitError signals that a configured cap would be exceeded
(CLI exit code 3); it is raised before any large allocation happens.
"""


class SpecgridError(Exception):
    """Base class for all specgrid errors."""


class ValidationError(SpecgridError):
    """An input violates a documented precondition."""


class ResourceLimitError(SpecgridError):
    """A computation would exceed a configured size cap."""
