"""Exception hierarchy shared by the store, reporting, bench and service layers.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures without string matching.
"""

from __future__ import annotations


class DmsError(Exception):
    """Base class for all domain errors."""

    code = "DMS_ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class LockHeldError(DmsError):
    """Another writer already holds the store lock."""

    code = "LOCK_HELD"


class CorruptJournalError(DmsError):
    """A journal line failed its checksum or could not be parsed."""

    code = "CORRUPT_JOURNAL"

    def __init__(self, kind: str, line_number: int, last_good_offset: int):
        self.kind = kind
        self.line_number = line_number
        self.last_good_offset = last_good_offset
        super().__init__(
            f"{kind} journal corrupt at line {line_number} "
            f"(last good byte offset {last_good_offset})"
        )


class DuplicateKeyError(DmsError):
    """Key already present and not archived."""

    code = "E_DUPLICATE"

    def __init__(self, kind: str, key: str):
        self.kind = kind
        self.key = key
        super().__init__(f"{kind} key {key!r} already exists")


class UnknownReferenceError(DmsError):
    """A record references a key that does not exist in the target table."""

    code = "E_REF"

    def __init__(self, field: str, value: str):
        self.field = field
        self.value = value
        super().__init__(f"{field} references unknown key {value!r}")


class NotFoundError(DmsError):
    code = "NOT_FOUND"

    def __init__(self, kind: str, key: str):
        self.kind = kind
        self.key = key
        super().__init__(f"no {kind} record with key {key!r}")


class KeyMismatchError(DmsError):
    """Update body carries a key different from the addressed key."""

    code = "KEY_MISMATCH"

    def __init__(self, path_key: str, body_key: str):
        self.path_key = path_key
        self.body_key = body_key
        super().__init__(f"body key {body_key!r} does not match {path_key!r}")


class UnknownFieldError(DmsError):
    code = "UNKNOWN_FIELD"

    def __init__(self, kind: str, field: str):
        self.kind = kind
        self.field = field
        super().__init__(f"{kind} has no field {field!r}")


class BadRangeError(DmsError):
    """Malformed range predicate (low > high or unparseable bound)."""

    code = "BAD_RANGE"


class BadHeaderError(DmsError):
    """CSV header does not match the documented header for the kind."""

    code = "BAD_HEADER"

    def __init__(self, kind: str, expected: str, got: str):
        self.kind = kind
        self.expected = expected
        self.got = got
        super().__init__(f"bad {kind} header: expected {expected!r}, got {got!r}")


class UnknownReportError(DmsError):
    code = "UNKNOWN_REPORT"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no canned report named {name!r}")


class SumOnTextError(DmsError):
    """SUM requested over a non-integer field."""

    code = "SUM_ON_TEXT"

    def __init__(self, field: str):
        self.field = field
        super().__init__(f"cannot SUM over non-integer field {field!r}")


class BadProfileError(DmsError):
    """Error-injection profile is inconsistent."""

    code = "BAD_PROFILE"


class DetectableMissedError(DmsError):
    """A labeled detectable error was accepted into the store."""

    code = "DETECTABLE_MISSED"

    def __init__(self, line_number: int, field: str, code_name: str):
        self.line_number = line_number
        self.field = field
        self.code_name = code_name
        super().__init__(
            f"injected {code_name} on field {field!r} (line {line_number}) "
            "was accepted by the pipeline"
        )
