"""Shared exception base.

Every stage defines its own error types next to the code that raises them;
all of them derive from :class:`OatsError` so the CLI (and embedding
applications) can catch pipeline failures with a single except clause.
"""


class OatsError(Exception):
    """Base class for all errors raised by this package."""
