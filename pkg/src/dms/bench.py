"""Benchmark harness: speedup-vs-amount curves and error-rate experiments.

Two experiments, both seed-deterministic:

* ``run_speedup`` imports synthetic clean datasets of increasing size into
  fresh throwaway stores and compares the measured wall time against a
  modeled manual process of ``tau_manual`` seconds per record.  Speedup is
  defined as ``100 * (t_manual - t_system) / t_manual``.  The published
  reference figures (84.3 / 73.1 system, 47.8 / 3.4 manual, 70 overall floor)
  ride along as labeled overlays on the emitted curve; they are reference
  points, never measurements.

* ``run_error_experiment`` generates a dataset with labeled injected errors,
  pushes it through the full normalize/validate/store pipeline and reconciles
  rejections against the labels.  Every detectable-class injection must be
  rejected; the only errors that may survive into the store are E_SEMANTIC
  ones (plausible wrong values no rule can catch), which form the residual
  rate.  The 0.01 percent reference residual is embedded as a labeled
  constant.

Timing is the single nondeterministic quantity and hides behind an injectable
clock so emission formats can be tested byte-exactly.
"""

from __future__ import annotations

import bisect
import csv
import io
import random
import shutil
import statistics
import tempfile
import time
from dataclasses import dataclass, field

from .errors import BadProfileError, DetectableMissedError
from .model import DETECTABLE_CODES, ErrorCode, schema_for
from .store import open_store

# Reference values quoted by the source evaluation; labeled overlays only.
OVERLAY_REFS = {
    "system_max": 84.3,
    "system_min": 73.1,
    "manual_max": 47.8,
    "manual_min": 3.4,
    "overall_floor": 70,
}

PAPER_SYSTEM_ERROR_PCT = 0.01
PAPER_MANUAL_ERROR_PCT = 12

DEFAULT_CLASS_MIX = {
    ErrorCode.E_FORMAT: 0.40,
    ErrorCode.E_REQUIRED: 0.25,
    ErrorCode.E_RANGE: 0.15,
    ErrorCode.E_DUPLICATE: 0.10,
    ErrorCode.E_REF: 0.09,
    ErrorCode.E_SEMANTIC: 0.01,
}

# Which error classes can be physically injected into each kind.  staff has
# no integer field (no E_RANGE) and only inventory has a reference field.
INJECTABLE = {
    "students": frozenset(
        {
            ErrorCode.E_REQUIRED,
            ErrorCode.E_FORMAT,
            ErrorCode.E_RANGE,
            ErrorCode.E_DUPLICATE,
            ErrorCode.E_SEMANTIC,
        }
    ),
    "staff": frozenset(
        {
            ErrorCode.E_REQUIRED,
            ErrorCode.E_FORMAT,
            ErrorCode.E_DUPLICATE,
            ErrorCode.E_SEMANTIC,
        }
    ),
    "inventory": frozenset(ErrorCode),
}


@dataclass(frozen=True)
class ErrorProfile:
    """Injection profile: how many rows carry an error and of which class.

    ``error_rate`` is a fraction of rows; the manual-process reference rate
    is 0.12.  ``class_mix`` must sum to 1 unless the rate is 0, in which case
    it may be empty.
    """

    error_rate: float
    class_mix: dict

    def check(self, kind: str) -> None:
        if not 0.0 <= self.error_rate <= 1.0:
            raise BadProfileError(f"error_rate {self.error_rate} not in [0, 1]")
        if self.error_rate == 0 and not self.class_mix:
            return
        for code, frac in self.class_mix.items():
            if not 0.0 <= frac <= 1.0:
                raise BadProfileError(f"fraction {frac} for {code} not in [0, 1]")
        if abs(sum(self.class_mix.values()) - 1.0) > 1e-9:
            raise BadProfileError("class_mix must sum to 1")
        allowed = INJECTABLE[kind]
        for code, frac in self.class_mix.items():
            if frac > 0 and code not in allowed:
                raise BadProfileError(f"{code.value} is not injectable for {kind}")


DEFAULT_PROFILE = ErrorProfile(0.12, DEFAULT_CLASS_MIX)
CLEAN_PROFILE = ErrorProfile(0.0, {})


@dataclass(frozen=True)
class RowLabel:
    """Ground truth for one generated row."""

    clean: bool
    field: str | None = None
    code: ErrorCode | None = None


@dataclass(frozen=True)
class LabeledDataset:
    kind: str
    rows: tuple[dict, ...]  # CSV-shaped: every value a string
    labels: tuple[RowLabel, ...]
    seed: int

    def to_csv_bytes(self) -> bytes:
        schema = schema_for(self.kind)
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(schema.field_names)
        for row in self.rows:
            writer.writerow([row[name] for name in schema.field_names])
        return out.getvalue().encode("utf-8")


_FIRST_NAMES = (
    "Amara", "Nimal", "Kamal", "Sunil", "Chamari", "Ishara", "Tharindu",
    "Sanduni", "Kasun", "Dilani", "Ruwan", "Nadeesha", "Prasad", "Iresha",
)
_LAST_NAMES = (
    "Silva", "Perera", "Fernando", "Bandara", "Kumara", "Jayasinghe",
    "Wickramasinghe", "Dissanayake", "Herath", "Gunawardena", "Rathnayake",
)
_PROGRAMS = ("PS", "CS", "IT", "AMC", "ENVSC")
_DESIGNATIONS = (
    ("Professor", "academic"),
    ("Senior Lecturer", "academic"),
    ("Lecturer", "academic"),
    ("Demonstrator", "academic"),
    ("Technical Officer", "non_academic"),
    ("Management Assistant", "non_academic"),
    ("Lab Attendant", "non_academic"),
)
_SUBJECTS = (
    "Physics", "Statistics", "Algorithms", "Chemistry", "Calculus",
    "Thermodynamics", "Databases", "Optics", "Mechanics", "Electronics",
)
_LOCATIONS = ("Main store", "Library", "Lab 1", "Lab 2", "Office", "Lecture hall")


def _clean_student(i: int, rng: random.Random) -> dict:
    block = i // 10000
    year = 2010 + block % 15
    program = _PROGRAMS[block % len(_PROGRAMS)]
    first = rng.choice(_FIRST_NAMES)
    last = rng.choice(_LAST_NAMES)
    return {
        "reg_no": f"{year}/{program}/{i % 10000:03d}",
        "full_name": f"{first} {last}",
        "program": program,
        "intake_year": str(year),
        "email": f"{first.lower()}.{i}@uni.lk",
        "phone": f"07{rng.randint(10000000, 99999999)}",
        "status": rng.choice(("active", "active", "active", "graduated", "suspended")),
    }


def _clean_staff(i: int, rng: random.Random) -> dict:
    first = rng.choice(_FIRST_NAMES)
    last = rng.choice(_LAST_NAMES)
    designation, category = rng.choice(_DESIGNATIONS)
    return {
        "employee_id": f"EMP{i:05d}",
        "full_name": f"{first} {last}",
        "designation": designation,
        "category": category,
        "email": f"{first.lower()}.{last.lower()}.{i}@uni.lk",
        "phone": f"07{rng.randint(10000000, 99999999)}",
        "status": rng.choice(("active", "active", "active", "on_leave")),
    }


def _clean_inventory(i: int, rng: random.Random) -> dict:
    # Clean items are never issued, so a dataset imports without a staff table.
    return {
        "asset_id": f"AST{i:05d}",
        "kind": rng.choice(("book", "book", "equipment", "consumable")),
        "title": f"{rng.choice(_SUBJECTS)} {rng.choice(('handbook', 'manual', 'set', 'kit'))} {i}",
        "quantity": str(rng.randint(0, 50)),
        "location": rng.choice(_LOCATIONS),
        "condition": rng.choice(("available", "available", "available", "damaged")),
        "issued_to": "",
    }


_CLEAN_ROW = {
    "students": _clean_student,
    "staff": _clean_staff,
    "inventory": _clean_inventory,
}

# Required fields a blanking injection may target (key field included).
_BLANKABLE = {
    "students": ("reg_no", "full_name", "intake_year", "status"),
    "staff": ("employee_id", "full_name", "category", "status"),
    "inventory": ("asset_id", "kind", "quantity", "condition"),
}

# Rule-free text fields a semantic (undetectable) error may corrupt.
_SEMANTIC_FIELDS = {
    "students": ("full_name", "phone"),
    "staff": ("full_name", "designation"),
    "inventory": ("title", "location"),
}


def _misspell(value: str, rng: random.Random) -> str:
    """Swap two adjacent characters; plausible and rule-proof."""
    if len(value) < 2:
        return value + value
    i = rng.randrange(len(value) - 1)
    chars = list(value)
    chars[i], chars[i + 1] = chars[i + 1], chars[i]
    return "".join(chars)


def _inject_format(kind: str, row: dict, rng: random.Random) -> str:
    """Corrupt one field so it still fails validation after normalization."""
    if kind == "students":
        field_name = rng.choice(("reg_no", "intake_year", "email", "status"))
        if field_name == "reg_no":
            row["reg_no"] = row["reg_no"].replace("/", "-")
        elif field_name == "intake_year":
            row["intake_year"] = "year " + row["intake_year"]
        elif field_name == "email":
            row["email"] = row["email"].replace("@", " at ")
        else:
            row["status"] = "enrolled"
    elif kind == "staff":
        field_name = rng.choice(("category", "email", "status"))
        if field_name == "category":
            row["category"] = "visitor"
        elif field_name == "email":
            row["email"] = row["email"].replace("@", "")
        else:
            row["status"] = "retired"
    else:
        field_name = rng.choice(("kind", "quantity", "condition"))
        if field_name == "kind":
            row["kind"] = "vehicle"
        elif field_name == "quantity":
            row["quantity"] = "several"
        else:
            row["condition"] = "broken"
    return field_name


def _inject_range(kind: str, row: dict, rng: random.Random) -> str:
    if kind == "students":
        row["intake_year"] = str(rng.choice((1800, 1900, 1949, 3000)))
        return "intake_year"
    row["quantity"] = str(-rng.randint(1, 50))
    return "quantity"


def generate_dataset(kind: str, n: int, profile: ErrorProfile, seed: int) -> LabeledDataset:
    """Deterministically generate ``n`` CSV-shaped rows with ground truth.

    Exactly ``round(n * error_rate)`` rows carry one injected error each;
    the class of each is drawn from ``class_mix``.  Clean rows pass
    validation (and insertion into an empty store) by construction.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    profile.check(kind)
    rng = random.Random(seed)
    make_row = _CLEAN_ROW[kind]
    schema = schema_for(kind)
    rows = [make_row(i, rng) for i in range(n)]

    error_count = round(n * profile.error_rate)
    error_indices = sorted(rng.sample(range(n), error_count))
    error_set = set(error_indices)
    clean_indices = [i for i in range(n) if i not in error_set]

    codes = list(profile.class_mix.keys())
    weights = list(profile.class_mix.values())
    labels: list[RowLabel] = [RowLabel(clean=True)] * n

    for idx in error_indices:
        code = rng.choices(codes, weights=weights)[0]
        if code is ErrorCode.E_DUPLICATE:
            eligible = bisect.bisect_left(clean_indices, idx)
            if eligible == 0:
                # No clean predecessor to duplicate; fall back to a class
                # that needs no partner row.
                code = ErrorCode.E_FORMAT
        row = rows[idx]
        if code is ErrorCode.E_REQUIRED:
            field_name = rng.choice(_BLANKABLE[kind])
            row[field_name] = ""
        elif code is ErrorCode.E_FORMAT:
            field_name = _inject_format(kind, row, rng)
        elif code is ErrorCode.E_RANGE:
            field_name = _inject_range(kind, row, rng)
        elif code is ErrorCode.E_DUPLICATE:
            target = clean_indices[rng.randrange(eligible)]
            field_name = schema.key_field
            row[field_name] = rows[target][field_name]
        elif code is ErrorCode.E_REF:
            # Shape violation: issue target on a non-issued item.
            row["issued_to"] = f"EMP9{rng.randint(1000, 9999)}"
            field_name = "issued_to"
        else:  # E_SEMANTIC
            field_name = rng.choice(_SEMANTIC_FIELDS[kind])
            row[field_name] = _misspell(row[field_name], rng)
        labels[idx] = RowLabel(clean=False, field=field_name, code=code)

    return LabeledDataset(
        kind=kind, rows=tuple(rows), labels=tuple(labels), seed=seed
    )


@dataclass(frozen=True)
class BenchmarkConfig:
    sizes: tuple[int, ...]
    tau_manual: float = 30.0
    repetitions: int = 3
    seed: int = 42

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if any(n <= 0 for n in self.sizes):
            raise ValueError("sizes must be positive")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("sizes must be strictly increasing")
        if self.tau_manual <= 0:
            raise ValueError("tau_manual must be > 0")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class SpeedupPoint:
    n: int
    t_system_s: float
    t_manual_s: float
    speedup_pct: float


@dataclass(frozen=True)
class SpeedupCurve:
    points: tuple[SpeedupPoint, ...]
    overlay_refs: dict = field(default_factory=lambda: dict(OVERLAY_REFS))
    warnings: tuple[str, ...] = ()


def speedup_percent(t_manual: float, t_system: float) -> float:
    """100 * (t_manual - t_system) / t_manual; 0 when equal, never reaches 100."""
    return 100.0 * (t_manual - t_system) / t_manual


def run_speedup(config: BenchmarkConfig, clock=None, work_dir=None) -> SpeedupCurve:
    """Measure import wall time per size against the modeled manual baseline.

    Each size gets a fresh throwaway store per repetition; the median
    repetition is the measured time.  A repetition spread above 50% of the
    median is reported as a MEASUREMENT_UNSTABLE warning, not an error.
    ``clock`` replaces ``time.perf_counter`` for deterministic format tests.
    """
    clock = clock or time.perf_counter
    points = []
    warnings: list[str] = []
    for n in config.sizes:
        dataset = generate_dataset("students", n, CLEAN_PROFILE, config.seed)
        payload = dataset.to_csv_bytes()
        times = []
        for _ in range(config.repetitions):
            root = tempfile.mkdtemp(prefix="dms-bench-", dir=work_dir)
            try:
                store = open_store(root)
                try:
                    t0 = clock()
                    store.import_csv("students", payload)
                    times.append(clock() - t0)
                finally:
                    store.close()
            finally:
                shutil.rmtree(root, ignore_errors=True)
        t_system = statistics.median(times)
        if t_system > 0 and max(times) - min(times) > 0.5 * t_system:
            warnings.append(
                f"MEASUREMENT_UNSTABLE at n={n}: spread "
                f"{max(times) - min(times):.6f}s exceeds 50% of median {t_system:.6f}s"
            )
        t_manual = n * config.tau_manual
        points.append(
            SpeedupPoint(
                n=n,
                t_system_s=t_system,
                t_manual_s=t_manual,
                speedup_pct=speedup_percent(t_manual, t_system),
            )
        )
    return SpeedupCurve(points=tuple(points), warnings=tuple(warnings))


@dataclass(frozen=True)
class ErrorExperimentReport:
    n: int
    injected_count: int
    injected_rate: float
    rejected_count: int
    residual_count: int
    residual_rate: float
    paper_reference_residual_pct: float = PAPER_SYSTEM_ERROR_PCT

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "injected_count": self.injected_count,
            "injected_rate": self.injected_rate,
            "rejected_count": self.rejected_count,
            "residual_count": self.residual_count,
            "residual_rate": self.residual_rate,
            "paper_reference_residual_pct": self.paper_reference_residual_pct,
        }


def run_error_experiment(
    n: int, profile: ErrorProfile, seed: int, kind: str = "inventory"
) -> ErrorExperimentReport:
    """Generate, import, reconcile against labels.

    Defaults to inventory, the one kind every error class can be injected
    into.  Raises DETECTABLE_MISSED if any detectable-class injection is
    accepted by the pipeline; the residual is exactly the accepted E_SEMANTIC
    rows.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    dataset = generate_dataset(kind, n, profile, seed)
    root = tempfile.mkdtemp(prefix="dms-errexp-")
    try:
        store = open_store(root)
        try:
            report = store.import_csv(kind, dataset.to_csv_bytes())
        finally:
            store.close()
    finally:
        shutil.rmtree(root, ignore_errors=True)

    # Generated rows contain no embedded newlines, so row i lives on
    # physical line i + 2 (line 1 is the header).
    rejected_lines = {r.line_number for r in report.rejected}
    residual = 0
    injected = 0
    for i, label in enumerate(dataset.labels):
        line = i + 2
        if label.clean:
            if line in rejected_lines:
                raise RuntimeError(f"clean row on line {line} was rejected; generator bug")
            continue
        injected += 1
        if label.code not in DETECTABLE_CODES:  # E_SEMANTIC: must slip through
            if line in rejected_lines:
                raise RuntimeError(f"semantic row on line {line} was rejected; generator bug")
            residual += 1
        elif line not in rejected_lines:
            raise DetectableMissedError(line, label.field, label.code.value)

    return ErrorExperimentReport(
        n=n,
        injected_count=injected,
        injected_rate=injected / n,
        rejected_count=len(report.rejected),
        residual_count=residual,
        residual_rate=residual / n,
    )


def emit_curve_csv(result) -> bytes:
    """Serialize a SpeedupCurve or ErrorExperimentReport to plottable CSV.

    Reference overlays ride along as ``# ref,<name>,<value>`` comment lines
    ahead of the header.
    """
    lines = []
    if isinstance(result, SpeedupCurve):
        for name, value in result.overlay_refs.items():
            lines.append(f"# ref,{name},{value}")
        lines.append("n,t_system_s,t_manual_s,speedup_pct")
        for p in result.points:
            lines.append(
                f"{p.n},{p.t_system_s:.6f},{p.t_manual_s:.6f},{p.speedup_pct:.4f}"
            )
    elif isinstance(result, ErrorExperimentReport):
        lines.append(f"# ref,paper_system_error_pct,{result.paper_reference_residual_pct}")
        lines.append(f"# ref,paper_manual_error_pct,{PAPER_MANUAL_ERROR_PCT}")
        lines.append("n,injected_count,injected_rate,rejected_count,residual_count,residual_rate")
        lines.append(
            f"{result.n},{result.injected_count},{result.injected_rate:.6f},"
            f"{result.rejected_count},{result.residual_count},{result.residual_rate:.6f}"
        )
    else:
        raise TypeError(f"cannot emit {type(result).__name__}")
    return ("\n".join(lines) + "\n").encode("utf-8")
