"""Operator command line: serve, import/export, report, search, bench, compact.

Exit codes: 0 success, 1 domain error (validation, duplicates, missing keys),
2 usage error, 3 I/O error (lock held, corrupt journal, OS failures).

The store root comes from --data-dir, else $DMS_DATA_DIR, else ./dms-data.
Machine payloads (CSV) go to --out when given, otherwise to standard output
with the human summary moved to standard error so pipelines stay clean.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bench import (
    BenchmarkConfig,
    DEFAULT_CLASS_MIX,
    ErrorProfile,
    emit_curve_csv,
    run_error_experiment,
    run_speedup,
)
from .errors import CorruptJournalError, DmsError, LockHeldError
from .model import KINDS
from .reporting import CANNED_REPORTS, canned_report, render, run_report
from .store import Query, open_store, parse_predicate, records_to_csv


def _data_dir(args) -> str:
    return args.data_dir or os.environ.get("DMS_DATA_DIR") or "./dms-data"


def _emit(payload: bytes, out_path: str | None, summary: str):
    """Payload to file or stdout; summary to stdout unless stdout has the payload."""
    if out_path:
        with open(out_path, "wb") as f:
            f.write(payload)
        print(summary)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
        print(summary, file=sys.stderr)


def cmd_serve(args) -> int:
    import uvicorn

    from .api import ServiceConfig, create_app_from_config

    config_path = os.environ.get("DMS_CONFIG") or args.config
    if not config_path:
        print("serve requires --config or $DMS_CONFIG", file=sys.stderr)
        return 2
    config = ServiceConfig.from_file(config_path)
    app = create_app_from_config(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
    return 0


def cmd_import(args) -> int:
    with open(args.file, "rb") as f:
        payload = f.read()
    with open_store(_data_dir(args)) as store:
        report = store.import_csv(args.kind, payload)
    print(f"accepted {report.accepted} rejected {len(report.rejected)}")
    for row in report.rejected:
        print(f"  line {row.line_number}: {row.field or '<row>'} {row.code.value}", file=sys.stderr)
    return 1 if report.rejected else 0


def cmd_export(args) -> int:
    with open_store(_data_dir(args)) as store:
        payload = store.export_csv(args.kind)
    rows = payload.count(b"\n") - 1
    _emit(payload, args.out, f"exported {rows} {args.kind} rows")
    return 0


def cmd_report(args) -> int:
    with open_store(_data_dir(args)) as store:
        table = run_report(store, canned_report(args.name))
    payload = render(table, args.format)
    _emit(payload, args.out, f"report {args.name}: {len(table.rows)} groups")
    return 0


def cmd_search(args) -> int:
    try:
        predicates = tuple(parse_predicate(*w.split("=", 1)) for w in args.where)
    except (ValueError, TypeError):
        print("each --where must look like field.op=value", file=sys.stderr)
        return 2
    query = Query(
        kind=args.kind,
        predicates=predicates,
        offset=args.offset,
        limit=args.limit,
        include_archived=args.include_archived,
    )
    with open_store(_data_dir(args)) as store:
        page = store.search(query)
    payload = records_to_csv(args.kind, [r.record for r in page.records])
    _emit(
        payload,
        args.out,
        f"{page.total_matches} matches, showing {len(page.records)} from offset {page.offset}",
    )
    return 0


def cmd_bench_speedup(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    config = BenchmarkConfig(
        sizes=sizes,
        tau_manual=args.tau_manual,
        repetitions=args.repetitions,
        seed=args.seed,
    )
    curve = run_speedup(config)
    for warning in curve.warnings:
        print(warning, file=sys.stderr)
    summary = "; ".join(
        f"n={p.n} t_system={p.t_system_s:.3f}s speedup={p.speedup_pct:.1f}%"
        for p in curve.points
    )
    _emit(emit_curve_csv(curve), args.out, summary)
    return 0


def cmd_bench_errors(args) -> int:
    profile = ErrorProfile(args.error_rate, dict(DEFAULT_CLASS_MIX))
    report = run_error_experiment(args.n, profile, args.seed, kind=args.kind)
    summary = (
        f"n={report.n} injected={report.injected_count} "
        f"rejected={report.rejected_count} residual={report.residual_count} "
        f"residual_rate={report.residual_rate:.6f}"
    )
    _emit(emit_curve_csv(report), args.out, summary)
    return 0


def cmd_compact(args) -> int:
    with open_store(_data_dir(args)) as store:
        stats = store.compact()
    for kind, s in stats.items():
        print(f"{kind}: kept {s.records_kept}, {s.bytes_before} -> {s.bytes_after} bytes")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dms", description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", help="store root (default $DMS_DATA_DIR or ./dms-data)")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="service config file (JSON)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("import", help="bulk-load a CSV file")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("file")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("export", help="dump a kind as CSV (archived included)")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("report", help="run a canned report")
    p.add_argument("name", choices=CANNED_REPORTS)
    p.add_argument("--format", choices=("csv", "html"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("search", help="predicate search, CSV output")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--where", action="append", default=[], metavar="FIELD.OP=VALUE")
    p.add_argument("--limit", type=int, default=100)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--include-archived", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    bench = sub.add_parser("bench", help="run the evaluation experiments")
    bench_sub = bench.add_subparsers(dest="experiment", required=True)

    p = bench_sub.add_parser("speedup", help="import throughput vs modeled manual work")
    p.add_argument("--sizes", default="100,1000,10000", help="comma-separated record counts")
    p.add_argument("--tau-manual", type=float, default=30.0, help="modeled seconds per manual record")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_speedup)

    p = bench_sub.add_parser("errors", help="labeled error-injection experiment")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--error-rate", type=float, default=0.12)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--kind", choices=KINDS, default="inventory")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_errors)

    p = sub.add_parser("compact", help="rewrite journals with latest versions only")
    p.set_defaults(func=cmd_compact)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LockHeldError, CorruptJournalError) as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DmsError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
