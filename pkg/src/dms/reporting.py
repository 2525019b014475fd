"""Analytical reports over the store: filter, group, fold, render.

Aggregations are restricted to COUNT and SUM over integer fields, so every
report is exact integer arithmetic and obeys the conservation law
sum-of-groups == total row.  Rendering targets CSV (same quoting rules as the
record CSV formats) and a dependency-free standalone HTML page.
"""

from __future__ import annotations

import csv
import html
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import SumOnTextError, UnknownFieldError, UnknownReportError
from .store import Predicate, Store, _checked_predicates, _matches
from .model import schema_for


@dataclass(frozen=True)
class Aggregation:
    """COUNT, or SUM over one integer field."""

    op: str  # "count" | "sum"
    field: str | None = None

    @property
    def column(self) -> str:
        return "count" if self.op == "count" else f"sum_{self.field}"


COUNT = Aggregation("count")


def sum_of(field_name: str) -> Aggregation:
    return Aggregation("sum", field_name)


@dataclass(frozen=True)
class ReportSpec:
    kind: str
    group_by: tuple[str, ...]
    aggregations: tuple[Aggregation, ...]
    filter: tuple[Predicate, ...] = ()
    title: str = ""
    include_archived: bool = False


@dataclass(frozen=True)
class ReportTable:
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    total_row: tuple
    generated_at: str

    def to_doc(self) -> dict:
        return {
            "title": self.title,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "total_row": list(self.total_row),
            "generated_at": self.generated_at,
        }


CANNED_REPORTS = ("enrollment_summary", "staff_roster", "inventory_status")


def canned_report(name: str) -> ReportSpec:
    """The three stock reports, one per maintained area.

    inventory_status includes written-off (archived) items so the condition
    breakdown is complete; the people reports cover live records only.
    """
    if name == "enrollment_summary":
        return ReportSpec(
            kind="students",
            group_by=("program", "intake_year"),
            aggregations=(COUNT,),
            title="Enrollment summary",
        )
    if name == "staff_roster":
        return ReportSpec(
            kind="staff",
            group_by=("category", "designation"),
            aggregations=(COUNT,),
            title="Staff roster",
        )
    if name == "inventory_status":
        return ReportSpec(
            kind="inventory",
            group_by=("kind", "condition"),
            aggregations=(COUNT, sum_of("quantity")),
            title="Inventory status",
            include_archived=True,
        )
    raise UnknownReportError(name)


def run_report(store: Store, spec: ReportSpec, now: datetime | None = None) -> ReportTable:
    """Filter, group and fold; equivalent to a brute-force pass over the kind.

    Row order is ascending group key.  ``now`` pins the timestamp for
    deterministic output.
    """
    schema = schema_for(spec.kind)
    for name in spec.group_by:
        if not schema.has_field(name):
            raise UnknownFieldError(spec.kind, name)
    for agg in spec.aggregations:
        if agg.op == "sum":
            if not schema.has_field(agg.field):
                raise UnknownFieldError(spec.kind, agg.field)
            if schema.field_spec(agg.field).ftype != "int":
                raise SumOnTextError(agg.field)
    predicates = _checked_predicates(schema, spec.filter)

    matched = []
    for entry in store._snapshot(spec.kind):
        if not spec.include_archived and schema.is_archived(entry.record):
            continue
        if _matches(schema, entry.record, predicates):
            matched.append(entry.record)

    groups: dict[tuple, list[int]] = {}
    for record in matched:
        key = tuple(record.get(name, "") for name in spec.group_by)
        folds = groups.get(key)
        if folds is None:
            folds = [0] * len(spec.aggregations)
            groups[key] = folds
        for i, agg in enumerate(spec.aggregations):
            if agg.op == "count":
                folds[i] += 1
            else:
                value = record.get(agg.field, 0)
                folds[i] += value if isinstance(value, int) else 0

    totals = [0] * len(spec.aggregations)
    for record in matched:
        for i, agg in enumerate(spec.aggregations):
            if agg.op == "count":
                totals[i] += 1
            else:
                value = record.get(agg.field, 0)
                totals[i] += value if isinstance(value, int) else 0

    rows = tuple(
        key + tuple(folds) for key, folds in sorted(groups.items(), key=lambda kv: kv[0])
    )
    columns = spec.group_by + tuple(agg.column for agg in spec.aggregations)
    stamp = (now or datetime.now(timezone.utc)).isoformat(timespec="seconds")
    return ReportTable(
        title=spec.title,
        columns=columns,
        rows=rows,
        total_row=tuple(totals),
        generated_at=stamp,
    )


def render(table: ReportTable, format: str) -> bytes:
    """Serialize a table to csv or html bytes.

    CSV is pure data: header, group rows, then a TOTAL row; the timestamp and
    title live in the HTML variant only, which entity-escapes every cell.
    """
    if format == "csv":
        return _render_csv(table)
    if format == "html":
        return _render_html(table)
    raise ValueError(f"unknown render format {format!r}")


def _total_cells(table: ReportTable) -> list:
    group_width = len(table.columns) - len(table.total_row)
    label = ["TOTAL"] + [""] * (group_width - 1) if group_width else []
    return label + list(table.total_row)


def _render_csv(table: ReportTable) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow(row)
    writer.writerow(_total_cells(table))
    return out.getvalue().encode("utf-8")


def _render_html(table: ReportTable) -> bytes:
    esc = html.escape
    parts = [
        "<!DOCTYPE html>",
        "<html>",
        "<head>",
        f"<meta charset=\"utf-8\"><title>{esc(table.title)}</title>",
        "</head>",
        "<body>",
        f"<h1>{esc(table.title)}</h1>",
        f"<p>Generated at {esc(table.generated_at)}</p>",
        "<table border=\"1\">",
        "<thead><tr>"
        + "".join(f"<th>{esc(str(c))}</th>" for c in table.columns)
        + "</tr></thead>",
        "<tbody>",
    ]
    for row in table.rows:
        parts.append("<tr>" + "".join(f"<td>{esc(str(v))}</td>" for v in row) + "</tr>")
    parts.append(
        "<tr>" + "".join(f"<td>{esc(str(v))}</td>" for v in _total_cells(table)) + "</tr>"
    )
    parts.extend(["</tbody>", "</table>", "</body>", "</html>", ""])
    return "\n".join(parts).encode("utf-8")
