"""Exception hierarchy.

Every error carries a stable ``code`` string so callers (and the CLI) can
branch on the kind of failure without matching on messages.
"""

from __future__ import annotations


class EaselanError(Exception):
    code = "error"


# document model

class ModelError(EaselanError):
    code = "model-error"


class UnknownTierError(ModelError, KeyError):
    code = "unknown-tier"

    def __str__(self) -> str:
        return Exception.__str__(self)


class DuplicateIdError(ModelError):
    code = "duplicate-id"


class OverlapError(ModelError):
    code = "overlap-violation"


class InvertedIntervalError(ModelError):
    code = "inverted-interval"


class NotTimeAlignableError(ModelError):
    code = "not-time-alignable"


# reading and writing

class ParseError(EaselanError):
    """Input could not be turned into a model; always carries a position."""

    code = "parse-error"

    def __init__(self, reason: str, line: int | None = None, column: int | None = None):
        self.reason = reason
        self.line = line
        self.column = column
        where = f"line {line}, column {column}" if line is not None else "unknown position"
        super().__init__(f"{where}: {reason}")


class MalformedXMLError(ParseError):
    code = "malformed-xml"


class SchemaViolationError(ParseError):
    code = "schema-violation"


class DanglingReferenceError(ParseError):
    code = "dangling-reference"


class TemplateContainsAnnotationsError(ParseError):
    code = "template-contains-annotations"


class DuplicateEntryValueError(EaselanError):
    code = "duplicate-entry-value"


class InvalidRangeError(EaselanError):
    code = "invalid-range"


# ingestion

class IngestError(EaselanError):
    code = "ingest-error"


class DuplicateTierError(IngestError):
    code = "duplicate-tier"


class TranscriptionSchemaError(IngestError):
    code = "schema-mismatch"


class UnknownColumnError(IngestError):
    code = "unknown-column"


class NonMonotonicTimeError(IngestError):
    code = "non-monotonic-time"

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"time column not strictly increasing at row {row}")


class MissingFileError(IngestError):
    code = "missing-file"


class ColumnMismatchError(IngestError):
    code = "column-mismatch"


# semantic export

class SemExportError(EaselanError):
    code = "semexport-error"


class InvalidIRIError(SemExportError):
    code = "invalid-iri"


class ConceptSchemeError(SemExportError):
    code = "invalid-scheme"


class DuplicateLabelError(SemExportError):
    code = "duplicate-label"


class UnmappedConceptError(SemExportError):
    code = "unmapped-concept"

    def __init__(self, annotation_id: str, value: str):
        self.annotation_id = annotation_id
        self.value = value
        super().__init__(f"annotation {annotation_id}: value {value!r} is not a concept label in the scheme")


class MappingError(SemExportError):
    code = "invalid-mapping"


# reporting / pipeline

class EmptyInputError(EaselanError):
    code = "empty-input"


class ConfigError(EaselanError):
    code = "config-error"
