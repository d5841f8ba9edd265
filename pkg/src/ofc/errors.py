"""Exception hierarchy shared across the package."""

from __future__ import annotations


class OfcError(Exception):
    """Base class for all package errors."""


# --- configuration / pipeline wiring ---------------------------------------


class ConfigSyntaxError(OfcError):
    """Pipeline configuration text is not well-formed."""


class SchemaError(OfcError):
    """Configuration parses but violates the pipeline schema."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class ChainError(OfcError):
    """A configured solver chain cannot be wired together."""


class ChainMismatch(ChainError):
    def __init__(self, position: int, expected: str, found: str):
        super().__init__(
            f"chain mismatch at position {position}: expected {expected!r}, found {found!r}"
        )
        self.position = position
        self.expected = expected
        self.found = found


class UnknownSolver(ChainError):
    def __init__(self, key: str):
        super().__init__(f"unknown solver implementation: {key!r}")
        self.key = key


class DuplicateKey(OfcError):
    def __init__(self, key: str):
        super().__init__(f"solver key already registered: {key!r}")
        self.key = key


class MissingInputSlot(OfcError):
    def __init__(self, slot: str, position: int):
        super().__init__(f"input slot {slot!r} for solver at position {position} is absent")
        self.slot = slot
        self.position = position


# --- gateway / external services --------------------------------------------


class GatewayError(OfcError):
    """Chat backend failure after retries were exhausted."""


class GatewayTimeout(GatewayError):
    pass


class AuthError(GatewayError):
    pass


class RateLimited(GatewayError):
    def __init__(self, retry_after: float | None = None):
        super().__init__(f"rate limited (retry after {retry_after}s)")
        self.retry_after = retry_after


class ProviderError(GatewayError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"provider returned status {status}: {detail}")
        self.status = status


class NetworkError(OfcError):
    """Transport-level failure talking to a search or NLI endpoint."""


class ParseError(OfcError):
    """A model reply did not follow the required output grammar."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class NLIError(OfcError):
    """Stance classification backend failure."""


# --- retrieval ---------------------------------------------------------------


class EmptyCorpus(OfcError):
    pass


class IndexFormatError(OfcError):
    """Persisted index file is missing the magic header or is corrupt."""


# --- verification ------------------------------------------------------------


class EmptyEvidence(OfcError):
    pass


class EmptyVerdicts(OfcError):
    pass


# --- datasets ----------------------------------------------------------------


class RecordError(OfcError):
    """One malformed or invariant-violating record in a line-delimited file."""

    def __init__(self, line: int, message: str, field: str | None = None):
        where = f"line {line}" if field is None else f"line {line}, field {field!r}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.field = field


class MalformedRecord(RecordError):
    pass


class InvariantViolation(RecordError):
    pass


class DatasetValidationError(OfcError):
    """Aggregate of per-record errors collected while loading a file."""

    def __init__(self, errors: list[RecordError]):
        summary = "; ".join(str(e) for e in errors[:5])
        more = "" if len(errors) <= 5 else f" (+{len(errors) - 5} more)"
        super().__init__(f"{len(errors)} invalid record(s): {summary}{more}")
        self.errors = errors


# --- checker evaluation -------------------------------------------------------


class UnresolvedId(OfcError):
    def __init__(self, unknown: list[str] | None = None, missing: list[str] | None = None):
        parts = []
        if unknown:
            parts.append(f"unknown ids: {', '.join(sorted(unknown)[:10])}")
        if missing:
            parts.append(f"missing ids: {', '.join(sorted(missing)[:10])}")
        super().__init__("; ".join(parts) or "unresolved ids")
        self.unknown = unknown or []
        self.missing = missing or []


class DuplicateId(OfcError):
    def __init__(self, ids: list[str]):
        super().__init__(f"duplicate ids: {', '.join(sorted(ids)[:10])}")
        self.ids = ids


class NoResults(OfcError):
    pass
