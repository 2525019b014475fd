"""Entity schemas, normalization and the validation taxonomy.

Three entity kinds are managed: ``students``, ``staff`` and ``inventory``.
Records travel through the system as plain dicts keyed by field name; text
fields hold strings, integer fields hold ints once normalized.  All functions
here are pure: no I/O, no shared state.

The validation pipeline is always ``normalize`` then ``validate_<kind>``.
Normalization never rejects; validation returns a :class:`ValidationResult`
listing every failed field.  Duplicate keys and dangling references to other
tables are store-level concerns and are not checked here (except the shape
rule that ``issued_to`` may only be set on issued inventory).
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from enum import Enum

KINDS = ("students", "staff", "inventory")

REG_NO_PATTERN = re.compile(r"^[0-9]{4}/[A-Z]{2,6}/[0-9]{3,4}$")
_INT_PATTERN = re.compile(r"^[+-]?[0-9]+$")

INTAKE_YEAR_MIN = 1950


class ErrorCode(str, Enum):
    """Classes of entry mistakes the system distinguishes.

    Every class except E_SEMANTIC is machine-detectable and must be caught
    by validation or by the store (duplicates, dangling references).
    E_SEMANTIC covers plausible-but-wrong values (a misspelled name) that
    no rule can catch; it is the honest residual of any error experiment.
    """

    E_REQUIRED = "E_REQUIRED"
    E_FORMAT = "E_FORMAT"
    E_RANGE = "E_RANGE"
    E_DUPLICATE = "E_DUPLICATE"
    E_REF = "E_REF"
    E_SEMANTIC = "E_SEMANTIC"


DETECTABLE_CODES = frozenset(c for c in ErrorCode if c is not ErrorCode.E_SEMANTIC)


@dataclass(frozen=True)
class Violation:
    field: str
    code: ErrorCode
    message: str


@dataclass(frozen=True)
class ValidationResult:
    accepted: bool
    violations: tuple[Violation, ...] = ()

    def __post_init__(self):
        if self.accepted != (len(self.violations) == 0):
            raise ValueError("accepted must hold exactly when violations is empty")

    @classmethod
    def from_violations(cls, violations) -> "ValidationResult":
        violations = tuple(violations)
        return cls(accepted=not violations, violations=violations)

    def to_doc(self) -> dict:
        return {
            "accepted": self.accepted,
            "violations": [
                {"field": v.field, "code": v.code.value, "message": v.message}
                for v in self.violations
            ],
        }


@dataclass(frozen=True)
class FieldSpec:
    """One column of an entity schema.

    ``ftype`` is one of:
      key    - record identifier, trimmed and upper-cased
      text   - free text, trimmed only
      email  - trimmed and lower-cased, simple shape check when present
      enum   - must be one of ``choices`` exactly
      int    - must parse as a decimal integer, optional [lo, hi] bounds
      ref    - foreign key into another table, trimmed and upper-cased
    """

    name: str
    ftype: str
    required: bool = False
    choices: tuple[str, ...] = ()
    bounds: tuple[int | None, int | None] = (None, None)


@dataclass(frozen=True)
class Schema:
    kind: str
    fields: tuple[FieldSpec, ...]
    key_field: str
    # field/value pair that marks a record as archived (soft-deleted)
    archive_field: str
    archive_value: str

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    @property
    def csv_header(self) -> str:
        return ",".join(self.field_names)

    def field_spec(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def has_field(self, name: str) -> bool:
        return any(f.name == name for f in self.fields)

    def is_archived(self, record: dict) -> bool:
        return record.get(self.archive_field) == self.archive_value


STUDENT_STATUSES = ("active", "graduated", "suspended", "archived")
STAFF_STATUSES = ("active", "on_leave", "left", "archived")
STAFF_CATEGORIES = ("academic", "non_academic")
INVENTORY_KINDS = ("book", "equipment", "consumable")
INVENTORY_CONDITIONS = ("available", "issued", "damaged", "written_off")

SCHEMAS: dict[str, Schema] = {
    "students": Schema(
        kind="students",
        fields=(
            FieldSpec("reg_no", "key", required=True),
            FieldSpec("full_name", "text", required=True),
            FieldSpec("program", "text"),
            FieldSpec(
                "intake_year",
                "int",
                required=True,
                bounds=(INTAKE_YEAR_MIN, None),  # upper bound is current year + 1
            ),
            FieldSpec("email", "email"),
            FieldSpec("phone", "text"),
            FieldSpec("status", "enum", required=True, choices=STUDENT_STATUSES),
        ),
        key_field="reg_no",
        archive_field="status",
        archive_value="archived",
    ),
    "staff": Schema(
        kind="staff",
        fields=(
            FieldSpec("employee_id", "key", required=True),
            FieldSpec("full_name", "text", required=True),
            FieldSpec("designation", "text"),
            FieldSpec("category", "enum", required=True, choices=STAFF_CATEGORIES),
            FieldSpec("email", "email"),
            FieldSpec("phone", "text"),
            FieldSpec("status", "enum", required=True, choices=STAFF_STATUSES),
        ),
        key_field="employee_id",
        archive_field="status",
        archive_value="archived",
    ),
    "inventory": Schema(
        kind="inventory",
        fields=(
            FieldSpec("asset_id", "key", required=True),
            FieldSpec("kind", "enum", required=True, choices=INVENTORY_KINDS),
            FieldSpec("title", "text"),
            FieldSpec("quantity", "int", required=True, bounds=(0, None)),
            FieldSpec("location", "text"),
            FieldSpec("condition", "enum", required=True, choices=INVENTORY_CONDITIONS),
            FieldSpec("issued_to", "ref"),
        ),
        key_field="asset_id",
        archive_field="condition",
        archive_value="written_off",
    ),
}


def schema_for(kind: str) -> Schema:
    try:
        return SCHEMAS[kind]
    except KeyError:
        raise KeyError(f"unknown entity kind {kind!r}") from None


def current_max_intake_year(today: datetime.date | None = None) -> int:
    """Upper bound for intake_year: next year's intake may be pre-registered."""
    year = (today or datetime.date.today()).year
    return year + 1


def coerce_int(value):
    """Return an int when the value is integer-shaped, else the value unchanged.

    Strings must be plain decimal (no underscores, no floats); integral floats
    from JSON bodies are accepted. Booleans are left alone so validation can
    flag them.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return int(value) if value.is_integer() else value
    if isinstance(value, str):
        s = value.strip()
        if _INT_PATTERN.match(s):
            return int(s)
        return s
    return value


def _as_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value.strip()
    return str(value).strip()


def normalize(kind: str, draft: dict) -> dict:
    """Canonicalize a draft record: trim text, upper-case keys, lower-case
    email, parse integer fields.  Idempotent and total: never rejects, fills
    missing fields with "" and drops fields not in the schema.
    """
    schema = schema_for(kind)
    out: dict = {}
    for spec in schema.fields:
        value = draft.get(spec.name, "")
        if spec.ftype == "int":
            out[spec.name] = coerce_int(value)
        elif spec.ftype in ("key", "ref"):
            out[spec.name] = _as_text(value).upper()
        elif spec.ftype == "email":
            out[spec.name] = _as_text(value).lower()
        else:  # text, enum
            out[spec.name] = _as_text(value)
    return out


def _email_ok(value: str) -> bool:
    # Deliberately simple: one "@", non-empty local part, domain with a dot.
    if value.count("@") != 1:
        return False
    local, domain = value.split("@")
    if not local or not domain:
        return False
    head, dot, tail = domain.partition(".")
    return bool(head and dot and tail)


def _validate(kind: str, draft: dict, max_intake_year: int | None = None) -> ValidationResult:
    schema = schema_for(kind)
    violations: list[Violation] = []

    def fail(name: str, code: ErrorCode, message: str):
        violations.append(Violation(name, code, message))

    for spec in schema.fields:
        value = draft.get(spec.name, "")
        empty = value == "" or value is None
        if empty:
            if spec.required:
                fail(spec.name, ErrorCode.E_REQUIRED, f"{spec.name} is required")
            continue

        if spec.ftype == "key":
            if kind == "students" and not REG_NO_PATTERN.match(str(value)):
                fail(
                    spec.name,
                    ErrorCode.E_FORMAT,
                    f"{spec.name} must match YYYY/DEPT/NNN",
                )
        elif spec.ftype == "enum":
            if value not in spec.choices:
                fail(
                    spec.name,
                    ErrorCode.E_FORMAT,
                    f"{spec.name} must be one of {', '.join(spec.choices)}",
                )
        elif spec.ftype == "int":
            if not isinstance(value, int) or isinstance(value, bool):
                fail(spec.name, ErrorCode.E_FORMAT, f"{spec.name} must be an integer")
            else:
                lo, hi = spec.bounds
                if spec.name == "intake_year":
                    hi = max_intake_year or current_max_intake_year()
                if lo is not None and value < lo:
                    fail(spec.name, ErrorCode.E_RANGE, f"{spec.name} must be >= {lo}")
                elif hi is not None and value > hi:
                    fail(spec.name, ErrorCode.E_RANGE, f"{spec.name} must be <= {hi}")
        elif spec.ftype == "email":
            if not _email_ok(str(value)):
                fail(spec.name, ErrorCode.E_FORMAT, "not a valid email address")

    # Shape rule: an issue target only makes sense on an issued item.  The
    # existence of the referenced employee is checked by the store at write
    # time.
    if kind == "inventory":
        if draft.get("issued_to") and draft.get("condition") != "issued":
            violations.append(
                Violation(
                    "issued_to",
                    ErrorCode.E_REF,
                    "issued_to is only allowed when condition is 'issued'",
                )
            )

    # Deterministic order: schema field order, shape rule last.
    order = {name: i for i, name in enumerate(schema.field_names)}
    violations.sort(key=lambda v: order.get(v.field, len(order)))
    return ValidationResult.from_violations(violations)


def validate_student(draft: dict, max_intake_year: int | None = None) -> ValidationResult:
    """Check a normalized student draft against the student invariants.

    ``max_intake_year`` pins the upper intake bound for reproducible tests;
    it defaults to the wall-clock year + 1.
    """
    return _validate("students", draft, max_intake_year)


def validate_staff(draft: dict) -> ValidationResult:
    return _validate("staff", draft)


def validate_inventory(draft: dict) -> ValidationResult:
    return _validate("inventory", draft)


_VALIDATORS = {
    "students": validate_student,
    "staff": validate_staff,
    "inventory": validate_inventory,
}


def validate(kind: str, draft: dict) -> ValidationResult:
    """Dispatch to the kind's validator."""
    return _VALIDATORS[kind](draft)
