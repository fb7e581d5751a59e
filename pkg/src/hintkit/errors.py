"""Exception hierarchy shared across the toolkit.

Errors that point at a location in a document carry a JSON-pointer-style
``path``; loader errors carry the 1-based ``lineno``.
"""

from __future__ import annotations


class HintkitError(Exception):
    """Base class for all toolkit errors."""


# --- dataset model / serialization ---------------------------------------

class UnknownSubset(HintkitError, KeyError):
    pass


class UnknownInstance(HintkitError, KeyError):
    pass


class MetricRangeError(HintkitError, ValueError):
    """A metric value violates the declared range for its metric family."""


class MalformedJson(HintkitError):
    pass


class LocatedError(HintkitError):
    """Error anchored at a path inside a dataset document."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class SchemaViolation(LocatedError):
    pass


class ValidationFailed(LocatedError):
    pass


class BadMagic(HintkitError):
    pass


class CorruptArchive(HintkitError):
    pass


# --- registry / network ---------------------------------------------------

class NetworkError(HintkitError):
    pass


class ManifestSchemaError(HintkitError):
    pass


class UnknownDataset(HintkitError, KeyError):
    pass


class ChecksumMismatch(HintkitError):
    pass


# --- remote clients -------------------------------------------------------

class TransportError(HintkitError):
    pass


class OfflineError(TransportError):
    """Raised when a network call is attempted while offline mode is on."""


class AuthError(TransportError):
    pass


class RateLimited(TransportError):
    pass


class EmptyCompletion(HintkitError):
    pass


class DimensionMismatch(HintkitError):
    pass


class ProviderError(HintkitError):
    """A remote provider returned a malformed or invalid response."""


# --- table / scorer file loaders ------------------------------------------

class LineError(HintkitError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class MalformedLine(LineError):
    pass


class InconsistentDimension(LineError):
    pass


class UnknownFeature(HintkitError):
    pass


# --- generation -----------------------------------------------------------

class MissingAnswer(HintkitError):
    def __init__(self, instance_id: str):
        super().__init__(f"instance {instance_id!r} has no answers")
        self.instance_id = instance_id


class GenerationFailed(HintkitError):
    def __init__(self, instance_id: str, message: str = ""):
        detail = f": {message}" if message else ""
        super().__init__(f"generation failed for instance {instance_id!r}{detail}")
        self.instance_id = instance_id


class UnparseableCompletion(HintkitError):
    pass


# --- metrics --------------------------------------------------------------

class EmptyText(HintkitError):
    pass


class BackendUnavailable(HintkitError):
    def __init__(self, method: str, reason: str):
        super().__init__(f"{method}: {reason}")
        self.method = method
        self.reason = reason


class NoMetricsFound(HintkitError):
    pass
