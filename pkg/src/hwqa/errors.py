"""Exception types shared across the package.

Every error raised on a user-facing path derives from :class:`HwqaError`
and carries a stable ``category`` slug so the CLI and service can report
failures in a machine-readable way.
"""

from __future__ import annotations


class HwqaError(Exception):
    """Base class for all package errors."""

    category = "error"


class ParseError(HwqaError):
    """Input bytes are not valid JSON; ``offset`` is the byte position."""

    category = "parse"

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class SchemaError(HwqaError):
    """JSON parsed but a required field is missing or malformed; ``path`` names it."""

    category = "schema"

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


class EmptyCorpusError(HwqaError):
    category = "empty-corpus"


class DegenerateDocumentError(HwqaError):
    """A document (or query construction) has no tokens where tokens are required."""

    category = "degenerate-document"


class IndexingError(HwqaError):
    """Corpus cannot be indexed; ``doc_id`` names the offending document."""

    category = "indexing"

    def __init__(self, message: str, doc_id: int | None = None):
        super().__init__(message)
        self.doc_id = doc_id


class FormatError(HwqaError):
    """A persisted artifact does not match its declared file format."""

    category = "format"


class CoverageError(HwqaError):
    """An embedding file does not cover the corpus; ``missing_ids`` lists the gaps."""

    category = "coverage"

    def __init__(self, message: str, missing_ids: list[int] | None = None):
        super().__init__(message)
        self.missing_ids = missing_ids or []


class ProviderContractError(HwqaError):
    """A provider or reader service violated its wire contract."""

    category = "provider-contract"


class TransportError(HwqaError):
    """A remote call failed after retries; carries retry metadata."""

    category = "transport"

    def __init__(self, message: str, attempts: int = 1, last_status: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.last_status = last_status


class ConfigurationError(HwqaError):
    """Inconsistent run configuration (mismatched artifacts, bad weights, ...)."""

    category = "config"


class MisalignmentError(HwqaError):
    """Parallel sequences that must be aligned have different lengths."""

    category = "misalignment"
