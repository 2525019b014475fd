"""Journal-backed record store: CRUD, search, CSV import/export, compaction.

On-disk layout under the store root:

    <root>/students.journal
    <root>/staff.journal
    <root>/inventory.journal
    <root>/.lock

Each journal is append-only, one operation per line::

    <crc32 hex, 8 chars> TAB <PUT|UPDATE|ARCHIVE> TAB <JSON payload>

The checksum covers everything after it.  JSON string escapes guarantee the
payload itself never contains a raw tab or newline, so the format is strictly
line-oriented.  Replay rebuilds the in-memory index; a line that fails its
checksum aborts the open with :class:`CorruptJournalError` reporting the bad
line and the byte offset of the last good record.

Writes append and flush before returning, so any put that returned survives a
process crash.  ``close()`` performs no finalization writes: the on-disk state
after a clean close is byte-identical to the state after a crash at the same
point.  Compaction rewrites each journal with only the latest version of every
key (archived records included) via a temp file and atomic rename.

Concurrency: one writer per store root, enforced cross-process with an
advisory file lock.  Within a process the handle may be shared; a mutex
serializes mutations, and readers work on snapshots so they never observe a
partial write.

Soft delete: archiving flips the record's lifecycle field (``status`` for
students and staff, ``condition`` -> ``written_off`` for inventory, which has
no status column).  Archived records are excluded from search unless asked
for, and putting a fresh record over an archived key is allowed.
"""

from __future__ import annotations

import csv
import fcntl
import io
import json
import os
import threading
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    BadHeaderError,
    BadRangeError,
    CorruptJournalError,
    DuplicateKeyError,
    KeyMismatchError,
    LockHeldError,
    NotFoundError,
    UnknownFieldError,
    UnknownReferenceError,
)
from .model import KINDS, ErrorCode, Schema, coerce_int, normalize, schema_for, validate

OPS = ("eq", "prefix", "contains", "range")

_JOURNAL_TAGS = ("PUT", "UPDATE", "ARCHIVE")


@dataclass(frozen=True)
class Predicate:
    """One conjunctive filter clause.

    ``value`` is the comparison value for eq/prefix/contains and a
    ``(low, high)`` pair for range.
    """

    field: str
    op: str
    value: object


@dataclass(frozen=True)
class Query:
    kind: str
    predicates: tuple[Predicate, ...] = ()
    offset: int = 0
    limit: int = 100
    include_archived: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entity kind {self.kind!r}")
        if self.offset < 0:
            raise ValueError("offset must be >= 0")
        if not 1 <= self.limit <= 1000:
            raise ValueError("limit must be in [1, 1000]")


@dataclass(frozen=True)
class StoredRecord:
    record: dict
    version: int


@dataclass(frozen=True)
class ResultPage:
    total_matches: int
    records: tuple[StoredRecord, ...]
    offset: int
    limit: int


@dataclass(frozen=True)
class RejectedRow:
    line_number: int
    field: str
    code: ErrorCode


@dataclass(frozen=True)
class ImportReport:
    total_rows: int
    accepted: int
    rejected: tuple[RejectedRow, ...]
    duration_s: float

    def to_doc(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "accepted": self.accepted,
            "rejected": [
                {"line_number": r.line_number, "field": r.field, "code": r.code.value}
                for r in self.rejected
            ],
            "duration_s": self.duration_s,
        }


@dataclass(frozen=True)
class CompactStats:
    records_kept: int
    bytes_before: int
    bytes_after: int


def parse_predicate(field_op: str, raw_value: str) -> Predicate:
    """Build a predicate from the textual ``field.op=value`` form used by the
    HTTP search endpoint and the CLI.  Range values are written ``low..high``.
    """
    field, dot, op = field_op.rpartition(".")
    if not dot or not field or op not in OPS:
        raise ValueError(f"predicate must look like field.op, got {field_op!r}")
    if op == "range":
        low, sep, high = raw_value.partition("..")
        if not sep:
            raise BadRangeError(f"range value must look like low..high, got {raw_value!r}")
        return Predicate(field, "range", (low, high))
    return Predicate(field, op, raw_value)


def _checked_predicates(schema: Schema, predicates) -> list[Predicate]:
    """Validate predicate fields and range bounds against the schema.

    Integer-field range bounds are coerced to ints here so matching is purely
    numeric; a bound that does not parse, or low > high, is BAD_RANGE.
    """
    checked = []
    for pred in predicates:
        if not schema.has_field(pred.field):
            raise UnknownFieldError(schema.kind, pred.field)
        if pred.op not in OPS:
            raise ValueError(f"unknown predicate op {pred.op!r}")
        if pred.op == "range":
            low, high = pred.value
            if schema.field_spec(pred.field).ftype == "int":
                low, high = coerce_int(low), coerce_int(high)
                if not isinstance(low, int) or not isinstance(high, int):
                    raise BadRangeError(f"range bounds for {pred.field} must be integers")
            else:
                low, high = str(low), str(high)
            if low > high:
                raise BadRangeError(f"range low > high for {pred.field}")
            pred = Predicate(pred.field, "range", (low, high))
        checked.append(pred)
    return checked


def _matches(schema: Schema, record: dict, predicates) -> bool:
    """Conjunctive predicate match against one record.

    eq is exact (numeric on integer fields); prefix/contains are
    case-insensitive on the text rendering; range is inclusive on both ends,
    numeric for integer fields and lexicographic otherwise.
    """
    for pred in predicates:
        value = record.get(pred.field, "")
        spec = schema.field_spec(pred.field)
        if pred.op == "eq":
            if spec.ftype == "int":
                want = coerce_int(pred.value)
                if not (isinstance(want, int) and value == want):
                    return False
            elif str(value) != str(pred.value):
                return False
        elif pred.op == "prefix":
            if not str(value).casefold().startswith(str(pred.value).casefold()):
                return False
        elif pred.op == "contains":
            if str(pred.value).casefold() not in str(value).casefold():
                return False
        elif pred.op == "range":
            low, high = pred.value
            if spec.ftype == "int":
                if not isinstance(value, int) or not low <= value <= high:
                    return False
            elif not str(low) <= str(value) <= str(high):
                return False
    return True


@dataclass
class _Entry:
    record: dict
    version: int


def _encode_line(op: str, key: str, version: int, record: dict) -> bytes:
    payload = json.dumps(
        {"key": key, "version": version, "record": record},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    body = f"{op}\t{payload}"
    crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    return f"{crc:08x}\t{body}\n".encode("utf-8")


class Store:
    """Writable handle on a store root.  Use :func:`open_store`."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._mu = threading.RLock()
        self._lock_file = None
        self._files: dict[str, io.BufferedWriter] = {}
        self._index: dict[str, dict[str, _Entry]] = {k: {} for k in KINDS}
        self._acquire_lock()
        try:
            for kind in KINDS:
                self._replay(kind)
            for kind in KINDS:
                self._files[kind] = open(self._journal_path(kind), "ab")
        except BaseException:
            self.close()
            raise

    # -- lifecycle ------------------------------------------------------

    def _journal_path(self, kind: str) -> Path:
        return self.root / f"{kind}.journal"

    def _acquire_lock(self):
        lock_path = self.root / ".lock"
        f = open(lock_path, "a+")
        try:
            fcntl.flock(f.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            f.close()
            raise LockHeldError(f"another writer holds {lock_path}") from None
        self._lock_file = f

    def _replay(self, kind: str):
        path = self._journal_path(kind)
        if not path.exists():
            return
        index = self._index[kind]
        last_good_offset = 0
        line_no = 0
        with open(path, "rb") as f:
            for raw in f:
                line_no += 1
                try:
                    if not raw.endswith(b"\n"):
                        raise ValueError("truncated line")
                    crc_hex, op, payload = raw[:-1].decode("utf-8").split("\t", 2)
                    body = f"{op}\t{payload}"
                    if int(crc_hex, 16) != zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF:
                        raise ValueError("checksum mismatch")
                    if op not in _JOURNAL_TAGS:
                        raise ValueError(f"unknown op {op!r}")
                    doc = json.loads(payload)
                    index[doc["key"]] = _Entry(doc["record"], doc["version"])
                except (ValueError, KeyError, TypeError):
                    raise CorruptJournalError(kind, line_no, last_good_offset) from None
                last_good_offset += len(raw)

    def close(self):
        """Release OS resources.  Writes nothing: on-disk state is already
        durable after every mutation, so close+reopen equals crash+reopen."""
        for f in self._files.values():
            try:
                os.fsync(f.fileno())
            except OSError:
                pass
            f.close()
        self._files = {}
        if self._lock_file is not None:
            self._lock_file.close()
            self._lock_file = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- mutations ------------------------------------------------------

    def _append(self, kind: str, op: str, key: str, version: int, record: dict):
        f = self._files[kind]
        f.write(_encode_line(op, key, version, record))
        f.flush()

    def _check_ref(self, kind: str, record: dict):
        if kind != "inventory":
            return
        target = record.get("issued_to", "")
        if target and target not in self._index["staff"]:
            raise UnknownReferenceError("issued_to", target)

    def put(self, kind: str, record: dict) -> int:
        """Insert a validated record.  Returns the stored version (1 for new
        keys, previous + 1 when re-creating an archived key)."""
        schema = schema_for(kind)
        key = record.get(schema.key_field, "")
        if not key:
            raise ValueError(f"{schema.key_field} must be non-empty")
        with self._mu:
            entry = self._index[kind].get(key)
            if entry is not None and not schema.is_archived(entry.record):
                raise DuplicateKeyError(kind, key)
            self._check_ref(kind, record)
            version = entry.version + 1 if entry else 1
            stored = dict(record)
            self._append(kind, "PUT", key, version, stored)
            self._index[kind][key] = _Entry(stored, version)
            return version

    def get(self, kind: str, key: str) -> StoredRecord | None:
        with self._mu:
            entry = self._index[kind].get(key)
            if entry is None:
                return None
            return StoredRecord(dict(entry.record), entry.version)

    def update(self, kind: str, key: str, record: dict) -> int:
        schema = schema_for(kind)
        body_key = record.get(schema.key_field, "")
        if body_key != key:
            raise KeyMismatchError(key, body_key)
        with self._mu:
            entry = self._index[kind].get(key)
            if entry is None:
                raise NotFoundError(kind, key)
            self._check_ref(kind, record)
            version = entry.version + 1
            stored = dict(record)
            self._append(kind, "UPDATE", key, version, stored)
            self._index[kind][key] = _Entry(stored, version)
            return version

    def archive(self, kind: str, key: str) -> None:
        """Soft-delete: flip the lifecycle field, keep the record."""
        schema = schema_for(kind)
        with self._mu:
            entry = self._index[kind].get(key)
            if entry is None:
                raise NotFoundError(kind, key)
            stored = dict(entry.record)
            stored[schema.archive_field] = schema.archive_value
            if kind == "inventory":
                stored["issued_to"] = ""
            version = entry.version + 1
            self._append(kind, "ARCHIVE", key, version, stored)
            self._index[kind][key] = _Entry(stored, version)

    # -- reads ----------------------------------------------------------

    def _snapshot(self, kind: str) -> list[_Entry]:
        with self._mu:
            return list(self._index[kind].values())

    def search(self, query: Query) -> ResultPage:
        """Full-scan search: filter, sort by primary key, paginate.

        total_matches counts every match regardless of the page window.
        """
        schema = schema_for(query.kind)
        predicates = _checked_predicates(schema, query.predicates)
        matched = []
        for entry in self._snapshot(query.kind):
            if not query.include_archived and schema.is_archived(entry.record):
                continue
            if _matches(schema, entry.record, predicates):
                matched.append(entry)
        matched.sort(key=lambda e: e.record[schema.key_field])
        page = matched[query.offset : query.offset + query.limit]
        return ResultPage(
            total_matches=len(matched),
            records=tuple(StoredRecord(dict(e.record), e.version) for e in page),
            offset=query.offset,
            limit=query.limit,
        )

    def counts(self) -> dict[str, int]:
        """Live (non-archived) record count per kind."""
        out = {}
        for kind in KINDS:
            schema = schema_for(kind)
            out[kind] = sum(
                1 for e in self._snapshot(kind) if not schema.is_archived(e.record)
            )
        return out

    # -- bulk CSV -------------------------------------------------------

    def import_csv(self, kind: str, data) -> ImportReport:
        """Ingest a CSV stream: per row normalize -> validate -> put.

        A wrong header aborts with nothing written; row failures never block
        other rows.  Rejections carry the physical line number and the first
        failing field in schema order.
        """
        schema = schema_for(kind)
        if isinstance(data, bytes):
            text = io.StringIO(data.decode("utf-8"), newline="")
        else:
            text = io.TextIOWrapper(data, encoding="utf-8", newline="")
        start = time.perf_counter()
        reader = csv.reader(text)
        header = next(reader, None)
        if header != list(schema.field_names):
            raise BadHeaderError(
                kind, schema.csv_header, ",".join(header) if header else ""
            )
        total = 0
        accepted = 0
        rejected: list[RejectedRow] = []
        for row in reader:
            if not row:
                continue  # blank line, not a record
            total += 1
            line = reader.line_num
            if len(row) != len(header):
                rejected.append(RejectedRow(line, "", ErrorCode.E_FORMAT))
                continue
            draft = normalize(kind, dict(zip(header, row)))
            result = validate(kind, draft)
            if not result.accepted:
                first = result.violations[0]
                rejected.append(RejectedRow(line, first.field, first.code))
                continue
            try:
                self.put(kind, draft)
            except DuplicateKeyError:
                rejected.append(RejectedRow(line, schema.key_field, ErrorCode.E_DUPLICATE))
                continue
            except UnknownReferenceError as exc:
                rejected.append(RejectedRow(line, exc.field, ErrorCode.E_REF))
                continue
            accepted += 1
        f = self._files[kind]
        f.flush()
        os.fsync(f.fileno())
        return ImportReport(
            total_rows=total,
            accepted=accepted,
            rejected=tuple(rejected),
            duration_s=time.perf_counter() - start,
        )

    def export_csv(self, kind: str, query: Query | None = None) -> bytes:
        """Documented header plus every matching record in key order.

        Pagination is ignored: export is a bulk surface.  With no query,
        everything is exported, archived records included, so that importing
        the output into an empty store reproduces this one.
        """
        schema = schema_for(kind)
        if query is None:
            query = Query(kind=kind, include_archived=True)
        predicates = _checked_predicates(schema, query.predicates)
        rows = []
        for entry in self._snapshot(kind):
            if not query.include_archived and schema.is_archived(entry.record):
                continue
            if _matches(schema, entry.record, predicates):
                rows.append(entry.record)
        rows.sort(key=lambda r: r[schema.key_field])
        return records_to_csv(kind, rows)

    # -- maintenance ----------------------------------------------------

    def compact(self) -> dict[str, CompactStats]:
        """Rewrite each journal with only the latest version of every key.

        Observable state is unchanged.  The rewrite goes to a temp file that
        is fsynced and atomically renamed over the journal, so a failure
        leaves the original intact.
        """
        stats = {}
        with self._mu:
            for kind in KINDS:
                path = self._journal_path(kind)
                before = path.stat().st_size if path.exists() else 0
                entries = sorted(
                    self._index[kind].items(), key=lambda item: item[0]
                )
                tmp = path.with_suffix(".journal.tmp")
                with open(tmp, "wb") as f:
                    for key, entry in entries:
                        f.write(_encode_line("PUT", key, entry.version, entry.record))
                    f.flush()
                    os.fsync(f.fileno())
                self._files[kind].close()
                os.replace(tmp, path)
                self._files[kind] = open(path, "ab")
                stats[kind] = CompactStats(
                    records_kept=len(entries),
                    bytes_before=before,
                    bytes_after=path.stat().st_size,
                )
        return stats


def _csv_cell(value) -> str:
    return value if isinstance(value, str) else str(value)


def records_to_csv(kind: str, records) -> bytes:
    """Documented header plus one row per record, in the given order.

    UTF-8, comma-separated, double-quote quoting, LF line endings; absent
    optional fields render as the empty string.
    """
    schema = schema_for(kind)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(schema.field_names)
    for record in records:
        writer.writerow([_csv_cell(record.get(name, "")) for name in schema.field_names])
    return out.getvalue().encode("utf-8")


def open_store(root) -> Store:
    """Open (or create) the store at ``root`` and acquire the writer lock.

    Raises LOCK_HELD if another live handle owns the root, CORRUPT_JOURNAL if
    replay hits a bad line.
    """
    return Store(Path(root))
