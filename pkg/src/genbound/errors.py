"""Exception taxonomy shared across the package.

Two failure families matter to callers: bad inputs (rejected up front,
never repaired) and blown resource envelopes (the type-enumeration cap).
The CLI maps both to exit code 2, so they share a common base.
"""


class GenboundError(Exception):
    """Base class for every error raised by this package."""


class InputError(GenboundError, ValueError):
    """An argument violates an operation's contract."""


class ResourceLimitError(GenboundError, RuntimeError):
    """A computation would exceed a configured resource cap."""
