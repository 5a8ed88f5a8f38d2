"""Exception hierarchy shared across the engine.

Validation problems discovered inside data (e.g. a malformed exchange) are
reported as plain values, not exceptions; the classes here cover genuine
failures: bad inputs, broken corpora, provider/transport trouble.
"""

from __future__ import annotations


class FusionRagError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FusionRagError):
    """An argument or payload violates a documented precondition."""


class ConfigError(FusionRagError):
    """Service configuration is unusable (missing path, bad value)."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path


class EmptyCorpusError(FusionRagError):
    """Document loading matched zero files."""


class EmptyDocumentError(FusionRagError):
    """A document (or text to embed) is empty after trimming."""


class IndexBuildError(FusionRagError):
    """Vector index construction failed (e.g. duplicate chunk id)."""


class IndexMetaMismatchError(FusionRagError):
    """A persisted index was built with a different embedder config."""


class DimensionMismatchError(FusionRagError):
    """A vector's dimension does not match the index dimension."""


class InputIntegrityError(FusionRagError):
    """An input ranked list violates its own invariants; failing fast
    instead of silently repairing it."""


class ProviderError(FusionRagError):
    """A remote provider (LLM or embedding service) returned a
    non-retryable failure."""

    def __init__(self, message: str, status: int | None = None,
                 body_excerpt: str = "", call_site: str | None = None):
        super().__init__(message)
        self.status = status
        self.body_excerpt = body_excerpt
        self.call_site = call_site


class RetryExhaustedError(ProviderError):
    """All retry attempts against a provider failed."""


class GatewayTimeoutError(ProviderError):
    """A provider call exceeded the configured timeout."""


class QueryParseError(FusionRagError):
    """The query-generation output could not be parsed into the expected
    number of queries."""

    def __init__(self, message: str, raw_output: str = ""):
        super().__init__(message)
        self.raw_output = raw_output


class PipelineError(FusionRagError):
    """A pipeline run failed part-way; carries the partial exchange for
    diagnostics plus the underlying cause."""

    def __init__(self, message: str, partial_exchange=None,
                 call_site: str | None = None):
        super().__init__(message)
        self.partial_exchange = partial_exchange
        self.call_site = call_site


class NotFoundError(FusionRagError):
    """A referenced record (exchange id, chunk id) does not exist."""
