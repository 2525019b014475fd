"""Report engine: canned specs, oracle equivalence, conservation, rendering."""

import csv
import io
import random
from datetime import datetime, timezone
from pathlib import Path

import pytest

from dms.bench import CLEAN_PROFILE, generate_dataset
from dms.errors import SumOnTextError, UnknownFieldError, UnknownReportError
from dms.model import normalize
from dms.reporting import (
    COUNT,
    Aggregation,
    ReportSpec,
    ReportTable,
    canned_report,
    render,
    run_report,
    sum_of,
)
from dms.store import Predicate

import oracles
from conftest import make_item, make_student

GOLDEN = Path(__file__).parent / "golden"

FIXED_NOW = datetime(2025, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def seed_programs(store):
    programs = ["CS", "CS", "CS", "IT", "IT"]
    for i, program in enumerate(programs, start=1):
        store.put("students", make_student(i, program=program))


class TestRunReport:
    def test_group_count_matches_fixture(self, store):
        seed_programs(store)
        table = run_report(
            store,
            ReportSpec(kind="students", group_by=("program",), aggregations=(COUNT,)),
        )
        assert table.rows == (("CS", 3), ("IT", 2))
        assert table.total_row == (5,)

    def test_empty_store_zero_rows(self, store):
        table = run_report(
            store,
            ReportSpec(kind="students", group_by=("program",), aggregations=(COUNT,)),
        )
        assert table.rows == ()
        assert table.total_row == (0,)

    def test_sum_quantity_by_kind(self, store):
        store.put("inventory", make_item(1, kind="book", quantity=2))
        store.put("inventory", make_item(2, kind="book", quantity=3))
        store.put("inventory", make_item(3, kind="equipment", quantity=1))
        table = run_report(
            store,
            ReportSpec(kind="inventory", group_by=("kind",), aggregations=(sum_of("quantity"),)),
        )
        assert table.rows == (("book", 5), ("equipment", 1))
        assert table.total_row == (6,)

    def test_unknown_group_field(self, store):
        with pytest.raises(UnknownFieldError):
            run_report(store, ReportSpec(kind="students", group_by=("gpa",), aggregations=(COUNT,)))

    def test_sum_on_text_field(self, store):
        with pytest.raises(SumOnTextError):
            run_report(
                store,
                ReportSpec(kind="students", group_by=("program",), aggregations=(sum_of("full_name"),)),
            )

    def test_filter_applies_before_grouping(self, store):
        seed_programs(store)
        table = run_report(
            store,
            ReportSpec(
                kind="students",
                group_by=("program",),
                aggregations=(COUNT,),
                filter=(Predicate("program", "eq", "CS"),),
            ),
        )
        assert table.rows == (("CS", 3),)
        assert table.total_row == (3,)

    def test_archived_excluded_by_default(self, store):
        seed_programs(store)
        store.archive("students", "2014/PS/001")
        table = run_report(
            store, ReportSpec(kind="students", group_by=("program",), aggregations=(COUNT,))
        )
        assert table.total_row == (4,)

    def test_empty_group_by_single_total_group(self, store):
        seed_programs(store)
        table = run_report(store, ReportSpec(kind="students", group_by=(), aggregations=(COUNT,)))
        assert table.rows == ((5,),)
        assert table.total_row == (5,)


class TestCannedReports:
    def test_enrollment_summary_definition(self):
        spec = canned_report("enrollment_summary")
        assert spec.kind == "students"
        assert spec.group_by == ("program", "intake_year")
        assert spec.aggregations == (COUNT,)

    def test_inventory_status_sums_quantity(self):
        spec = canned_report("inventory_status")
        assert Aggregation("sum", "quantity") in spec.aggregations
        assert spec.include_archived

    def test_staff_roster_definition(self):
        spec = canned_report("staff_roster")
        assert spec.kind == "staff"
        assert spec.group_by == ("category", "designation")

    def test_unknown_report(self):
        with pytest.raises(UnknownReportError):
            canned_report("payroll")


class TestOracleEquivalence:
    @pytest.mark.parametrize("kind", ["students", "staff", "inventory"])
    def test_random_specs_match_brute_force(self, store, kind):
        dataset = generate_dataset(kind, 300, CLEAN_PROFILE, seed=21)
        mirror = []
        for row in dataset.rows:
            record = normalize(kind, row)
            store.put(kind, record)
            mirror.append(record)

        rng = random.Random(77)
        int_fields = sorted(oracles.INT_FIELDS[kind])
        for _ in range(60):
            group_by = tuple(
                rng.sample(oracles.ALL_FIELDS[kind], rng.randint(1, 2))
            )
            aggs = [COUNT]
            oracle_aggs = [("count", None)]
            if int_fields and rng.random() < 0.5:
                field = rng.choice(int_fields)
                aggs.append(sum_of(field))
                oracle_aggs.append(("sum", field))
            predicates = oracles.random_predicates(rng, kind, mirror)

            table = run_report(
                store,
                ReportSpec(
                    kind=kind,
                    group_by=group_by,
                    aggregations=tuple(aggs),
                    filter=tuple(Predicate(*p) for p in predicates),
                    include_archived=True,
                ),
            )
            filtered = [
                r for r in mirror if all(oracles.matches_one(kind, r, p) for p in predicates)
            ]
            want_rows, want_total = oracles.group_fold(filtered, group_by, oracle_aggs)
            assert table.rows == want_rows, (group_by, predicates)
            assert table.total_row == want_total

    def test_conservation_on_every_run(self, store):
        dataset = generate_dataset("inventory", 200, CLEAN_PROFILE, seed=3)
        for row in dataset.rows:
            store.put("inventory", normalize("inventory", row))
        rng = random.Random(13)
        for _ in range(30):
            group_by = tuple(rng.sample(oracles.ALL_FIELDS["inventory"], rng.randint(1, 2)))
            table = run_report(
                store,
                ReportSpec(
                    kind="inventory",
                    group_by=group_by,
                    aggregations=(COUNT, sum_of("quantity")),
                    include_archived=True,
                ),
            )
            count_col = len(group_by)
            assert sum(r[count_col] for r in table.rows) == table.total_row[0]
            assert sum(r[count_col + 1] for r in table.rows) == table.total_row[1]


class TestRender:
    def table(self, store):
        seed_programs(store)
        spec = ReportSpec(
            kind="students", group_by=("program",), aggregations=(COUNT,), title="By program"
        )
        return run_report(store, spec, now=FIXED_NOW)

    def test_csv_matches_golden(self, store):
        table = self.table(store)
        golden = (GOLDEN / "enrollment_by_program.csv").read_bytes()
        assert render(table, "csv") == golden

    def test_empty_table_csv(self):
        table = ReportTable(
            title="t", columns=("program", "count"), rows=(), total_row=(0,), generated_at="x"
        )
        assert render(table, "csv") == b"program,count\nTOTAL,0\n"

    def test_csv_reparses_to_same_rows(self, store):
        table = self.table(store)
        text = render(table, "csv").decode("utf-8")
        parsed = list(csv.reader(io.StringIO(text)))
        assert parsed[0] == list(table.columns)
        assert [tuple(r) for r in parsed[1:-1]] == [
            tuple(str(v) for v in row) for row in table.rows
        ]
        assert parsed[-1] == ["TOTAL", "5"]

    def test_html_escapes_cells(self, store):
        store.put("students", make_student(1, program="<b>"))
        table = run_report(
            store,
            ReportSpec(kind="students", group_by=("program",), aggregations=(COUNT,), title="x<y"),
        )
        page = render(table, "html").decode("utf-8")
        assert "&lt;b&gt;" in page
        assert "<b>" not in page.replace("<body>", "").replace("</body>", "")
        assert "x&lt;y" in page

    def test_html_contains_single_table(self, store):
        page = render(self.table(store), "html").decode("utf-8")
        assert page.count("<table") == 1
        assert page.startswith("<!DOCTYPE html>")
