"""HTTP tier: role-aware JSON API over the store, reports and import.

Authentication is a static token table (header ``X-DMS-Token``); roles nest
strictly: admin can do everything, staff can read and run reports, viewers
can only run reports.  Every route checks authorization before touching the
store, every mutation runs normalize -> validate -> store, and any response
of 400 or above leaves the store untouched.

Routes (all under /api/v1):

    GET    /health                     unauthenticated status + live counts
    GET    /{kind}                     list (paginated)            [read]
    POST   /{kind}                     create                      [write]
    GET    /{kind}/search              predicate search            [read]
    GET    /{kind}/{key}               fetch one                   [read]
    PUT    /{kind}/{key}               update                      [write]
    DELETE /{kind}/{key}               archive (soft delete)       [write]
    GET    /reports/{name}?format=     canned report, csv or html  [report]
    POST   /import/{kind}              CSV bulk import             [import]

A built web UI directory can be mounted at /ui/.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool
from starlette.staticfiles import StaticFiles

from .errors import (
    BadHeaderError,
    BadRangeError,
    DmsError,
    DuplicateKeyError,
    KeyMismatchError,
    NotFoundError,
    UnknownFieldError,
    UnknownReferenceError,
    UnknownReportError,
)
from .model import KINDS, normalize, schema_for, validate
from .reporting import canned_report, render, run_report
from .store import Query, Store, parse_predicate

ACTIONS = ("read", "report", "write", "import", "bench")

ROLES = ("viewer", "staff", "admin")

# Strictly nested permission sets.
ROLE_ACTIONS = {
    "viewer": frozenset({"report"}),
    "staff": frozenset({"report", "read"}),
    "admin": frozenset(ACTIONS),
}

TOKEN_HEADER = "X-DMS-Token"


@dataclass(frozen=True)
class Principal:
    name: str
    role: str


@dataclass(frozen=True)
class Decision:
    allowed: bool
    principal: Principal | None = None
    reason: str | None = None  # "unauthenticated" | "forbidden"


class TokenTable:
    """Opaque token -> principal mapping loaded once at startup."""

    def __init__(self, entries: dict[str, Principal]):
        if not any(p.role == "admin" for p in entries.values()):
            raise ValueError("token table must contain at least one admin token")
        self._entries = dict(entries)

    @classmethod
    def from_file(cls, path) -> "TokenTable":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = {}
        for token, info in raw.items():
            role = info.get("role")
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r} for token {token[:8]}...")
            entries[token] = Principal(name=info.get("principal", ""), role=role)
        return cls(entries)

    def lookup(self, token: str | None) -> Principal | None:
        if token is None:
            return None
        return self._entries.get(token)


def authorize(table: TokenTable, token: str | None, action: str) -> Decision:
    """Map a token and an action to allow/deny.  Deny is a normal outcome:
    unauthenticated for unknown tokens, forbidden for insufficient role."""
    principal = table.lookup(token)
    if principal is None:
        return Decision(allowed=False, reason="unauthenticated")
    if action not in ROLE_ACTIONS[principal.role]:
        return Decision(allowed=False, principal=principal, reason="forbidden")
    return Decision(allowed=True, principal=principal)


@dataclass(frozen=True)
class ServiceConfig:
    listen_host: str
    listen_port: int
    store_root: str
    token_table_path: str
    ui_dir: str | None = None

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        host, _, port = doc["listen"].partition(":")
        return cls(
            listen_host=host or "127.0.0.1",
            listen_port=int(port or 8080),
            store_root=doc["store_root"],
            token_table_path=doc["token_table"],
            ui_dir=doc.get("ui_dir"),
        )


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"error": {"code": code, "message": message}}, status_code=status)


_STATUS_BY_CODE = {
    NotFoundError.code: 404,
    DuplicateKeyError.code: 409,
    UnknownReferenceError.code: 409,
    KeyMismatchError.code: 400,
    UnknownFieldError.code: 400,
    BadRangeError.code: 400,
    BadHeaderError.code: 400,
    UnknownReportError.code: 404,
}


def _domain_error(exc: DmsError) -> JSONResponse:
    return _error_response(_STATUS_BY_CODE.get(exc.code, 500), exc.code, str(exc))


def _record_doc(stored) -> dict:
    return {"record": stored.record, "version": stored.version}


def _page_doc(page) -> dict:
    return {
        "total_matches": page.total_matches,
        "offset": page.offset,
        "limit": page.limit,
        "records": [_record_doc(r) for r in page.records],
    }


def create_app(store: Store, tokens: TokenTable, ui_dir=None) -> FastAPI:
    app = FastAPI(title="dms", docs_url=None, redoc_url=None, openapi_url=None)

    def gate(request: Request, action: str) -> JSONResponse | None:
        decision = authorize(tokens, request.headers.get(TOKEN_HEADER), action)
        if decision.allowed:
            return None
        if decision.reason == "unauthenticated":
            return _error_response(401, "UNAUTHENTICATED", "unknown or missing token")
        return _error_response(403, "FORBIDDEN", f"role lacks the {action!r} action")

    def check_kind(kind: str) -> JSONResponse | None:
        if kind not in KINDS:
            return _error_response(404, "NOT_FOUND", f"unknown entity kind {kind!r}")
        return None

    @app.exception_handler(DmsError)
    async def on_domain_error(request: Request, exc: DmsError):
        return _domain_error(exc)

    @app.exception_handler(RequestValidationError)
    async def on_malformed_request(request: Request, exc: RequestValidationError):
        return _error_response(400, "MALFORMED", "malformed request")

    @app.exception_handler(OSError)
    async def on_io_error(request: Request, exc: OSError):
        return _error_response(500, "IO_ERROR", str(exc))

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "counts": store.counts()}

    def _query_from_params(kind: str, params) -> Query:
        predicates = []
        offset, limit, include_archived = 0, 100, False
        for key, value in params:
            if key == "offset":
                offset = int(value)
            elif key == "limit":
                limit = int(value)
            elif key == "include_archived":
                include_archived = value.lower() in ("1", "true", "yes")
            else:
                predicates.append(parse_predicate(key, value))
        return Query(
            kind=kind,
            predicates=tuple(predicates),
            offset=offset,
            limit=limit,
            include_archived=include_archived,
        )

    @app.get("/api/v1/{kind}/search")
    def search(kind: str, request: Request):
        return (
            check_kind(kind)
            or gate(request, "read")
            or _do_search(kind, request)
        )

    def _do_search(kind: str, request: Request):
        try:
            query = _query_from_params(kind, request.query_params.multi_items())
        except (ValueError, BadRangeError) as exc:
            if isinstance(exc, BadRangeError):
                return _domain_error(exc)
            return _error_response(400, "BAD_QUERY", str(exc))
        return JSONResponse(_page_doc(store.search(query)))

    @app.get("/api/v1/reports/{name}")
    def report(name: str, request: Request, format: str = "csv"):
        denied = gate(request, "report")
        if denied:
            return denied
        if format not in ("csv", "html"):
            return _error_response(400, "BAD_QUERY", "format must be csv or html")
        spec = canned_report(name)  # UNKNOWN_REPORT -> 404 via handler
        table = run_report(store, spec)
        payload = render(table, format)
        media = "text/csv" if format == "csv" else "text/html"
        return Response(content=payload, media_type=media)

    @app.get("/api/v1/{kind}")
    def list_kind(kind: str, request: Request, offset: int = 0, limit: int = 100):
        denied = check_kind(kind) or gate(request, "read")
        if denied:
            return denied
        try:
            query = Query(kind=kind, offset=offset, limit=limit)
        except ValueError as exc:
            return _error_response(400, "BAD_QUERY", str(exc))
        return JSONResponse(_page_doc(store.search(query)))

    @app.get("/api/v1/{kind}/{key:path}")
    def get_one(kind: str, key: str, request: Request):
        denied = check_kind(kind) or gate(request, "read")
        if denied:
            return denied
        stored = store.get(kind, key)
        if stored is None:
            return _error_response(404, "NOT_FOUND", f"no {kind} record {key!r}")
        return JSONResponse(_record_doc(stored))

    async def _json_body(request: Request) -> dict | JSONResponse:
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error_response(400, "MALFORMED", "body must be a JSON object")
        if not isinstance(body, dict):
            return _error_response(400, "MALFORMED", "body must be a JSON object")
        schema = schema_for(request.path_params["kind"])
        unknown = set(body) - set(schema.field_names)
        if unknown:
            return _error_response(
                400, "MALFORMED", f"unknown fields: {', '.join(sorted(unknown))}"
            )
        return body

    @app.post("/api/v1/{kind}")
    async def create(kind: str, request: Request):
        denied = check_kind(kind) or gate(request, "write")
        if denied:
            return denied
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        draft = normalize(kind, body)
        result = validate(kind, draft)
        if not result.accepted:
            return JSONResponse(result.to_doc(), status_code=422)
        version = await run_in_threadpool(store.put, kind, draft)
        return JSONResponse({"record": draft, "version": version}, status_code=201)

    @app.put("/api/v1/{kind}/{key:path}")
    async def update(kind: str, key: str, request: Request):
        denied = check_kind(kind) or gate(request, "write")
        if denied:
            return denied
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        draft = normalize(kind, body)
        result = validate(kind, draft)
        if not result.accepted:
            return JSONResponse(result.to_doc(), status_code=422)
        version = await run_in_threadpool(store.update, kind, key, draft)
        return JSONResponse({"record": draft, "version": version})

    @app.delete("/api/v1/{kind}/{key:path}")
    async def archive(kind: str, key: str, request: Request):
        denied = check_kind(kind) or gate(request, "write")
        if denied:
            return denied
        await run_in_threadpool(store.archive, kind, key)
        stored = store.get(kind, key)
        return JSONResponse(_record_doc(stored))

    @app.post("/api/v1/import/{kind}")
    async def import_kind(kind: str, request: Request):
        denied = check_kind(kind) or gate(request, "import")
        if denied:
            return denied
        payload = await request.body()
        report = await run_in_threadpool(store.import_csv, kind, payload)
        return JSONResponse(report.to_doc())

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def create_app_from_config(config: ServiceConfig) -> FastAPI:
    from .store import open_store

    store = open_store(config.store_root)
    tokens = TokenTable.from_file(config.token_table_path)
    return create_app(store, tokens, ui_dir=config.ui_dir)
