"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class RRGraphError(Exception):
    """Base class for all errors raised by rrgraph."""


class InvalidParameterError(RRGraphError, ValueError):
    """Malformed input: mismatched n, out-of-range index or probability, bad text."""


class InfeasibleParameterError(RRGraphError, ValueError):
    """Well-formed input the configured limits refuse to run."""


class ResourceLimitError(RRGraphError):
    """A memory guard tripped during a run."""


class ManifestError(RRGraphError):
    """A run manifest is missing fields or does not match the schema."""
