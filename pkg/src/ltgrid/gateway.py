"""HTTP gateway exposing the grid over an authenticated JSON API.

Routing is table-driven: every endpoint is a Route row naming its method,
path template, required roles and handler. The same table feeds the
OpenAPI document, so the published description cannot drift from the
dispatcher. All error responses share one shape: an object with "code"
and "message", plus "field_path" when the problem is tied to a field.
"""

import json
import re
import threading
import traceback
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .auth import ANONYMOUS, Principal, authenticate, issue_token, require_role
from .canonical import doc_to_record, record_to_doc
from .catalogue import FACET_NAMES, SearchQuery
from .envelopes import serialize_response
from .errors import (
    AuthenticationError,
    AuthorizationError,
    Conflict,
    GridError,
    InputError,
    NotFound,
    TransportError,
)
from .grid import Grid
from .harvest import HarvestSource
from .orchestrator import ServiceManifest
from .runners import BuiltinRunner
from .samples import BUILTIN_SERVICES

MAX_BODY_BYTES = 16 * 1024 * 1024

# Roles that may touch each endpoint group; None means anonymous access.
ANY_ROLE = ("consumer", "provider", "admin")
WRITERS = ("provider", "admin")
ADMIN_ONLY = ("admin",)


class UnknownRoute(NotFound):
    code = "gw.unknown_route"


@dataclass(frozen=True)
class Route:
    method: str
    template: str  # path with {name} placeholders
    roles: tuple | None  # None = anonymous allowed
    handler: str  # Gateway method name
    summary: str
    requires_samples: bool = False
    pattern: re.Pattern = field(init=False, compare=False)

    def __post_init__(self):
        regex = re.sub(r"\{(\w+)\}", r"(?P<\1>[^/]+)", self.template)
        object.__setattr__(self, "pattern", re.compile(f"^{regex}$"))


ROUTES = (
    Route("GET", "/health", None, "handle_health", "Gateway liveness check"),
    Route("POST", "/api/auth/token", None, "handle_issue_token",
          "Issue a development bearer token (disabled in hardened deployments)"),
    Route("GET", "/api/openapi.json", None, "handle_openapi", "API description"),
    Route("GET", "/api/catalogue/search", None, "handle_search",
          "Faceted catalogue search"),
    Route("GET", "/api/catalogue/records", None, "handle_list_records",
          "List catalogue records"),
    Route("POST", "/api/catalogue/records", WRITERS, "handle_create_record",
          "Create a catalogue record"),
    Route("GET", "/api/catalogue/records/{record_id}", None, "handle_get_record",
          "Fetch one catalogue record"),
    Route("POST", "/api/catalogue/records/{record_id}", WRITERS, "handle_update_record",
          "Update a record under optimistic versioning"),
    Route("POST", "/api/catalogue/records/{record_id}/publish", WRITERS, "handle_publish",
          "Advance a record one lifecycle step"),
    Route("POST", "/api/catalogue/records/{record_id}/claim", WRITERS, "handle_claim",
          "Claim an unowned record"),
    Route("GET", "/api/services", ANY_ROLE, "handle_list_services",
          "List registered services"),
    Route("POST", "/api/services", WRITERS, "handle_register_service",
          "Register a service manifest with its catalogue record"),
    Route("GET", "/api/services/{service_id}", ANY_ROLE, "handle_describe_service",
          "Manifest, conformance state and lifecycle status of one service"),
    Route("POST", "/api/services/{service_id}/conformance", WRITERS, "handle_conformance",
          "Run the conformance battery against a registered service"),
    Route("POST", "/api/process/{service_id}", ANY_ROLE, "handle_process",
          "Send one request envelope to a published service"),
    Route("GET", "/api/usage", ANY_ROLE, "handle_usage",
          "Metered usage events, filtered"),
    Route("GET", "/api/harvest/sources", ADMIN_ONLY, "handle_list_sources",
          "List harvest sources"),
    Route("POST", "/api/harvest/sources", ADMIN_ONLY, "handle_add_source",
          "Register a harvest source"),
    Route("POST", "/api/harvest/sources/{source_id}/run", ADMIN_ONLY, "handle_run_harvest",
          "Run one harvest pass against a source"),
    Route("GET", "/runner/{name}/health", None, "handle_runner_health",
          "Liveness probe of a bundled sample runner", requires_samples=True),
    Route("POST", "/runner/{name}/process", None, "handle_runner_process",
          "Invoke a bundled sample runner directly", requires_samples=True),
)


def status_for(err: GridError) -> int:
    if isinstance(err, AuthenticationError):
        return 401
    if isinstance(err, AuthorizationError):
        return 403
    if isinstance(err, NotFound):
        return 404
    if isinstance(err, Conflict):
        return 409
    if isinstance(err, TransportError):
        return 502
    if isinstance(err, InputError):
        return 422
    return 500


@dataclass
class GatewayRequest:
    principal: Principal
    params: dict  # path captures
    query: dict  # name -> list of values
    body: bytes

    def json_body(self) -> dict:
        if not self.body:
            return {}
        try:
            doc = json.loads(self.body.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as e:
            raise InputError(f"request body is not valid JSON: {e}") from e
        if not isinstance(doc, dict):
            raise InputError("request body must be a JSON object")
        return doc

    def single(self, name: str) -> str | None:
        values = self.query.get(name)
        if not values:
            return None
        if len(values) > 1:
            raise InputError(f"query parameter {name!r} given more than once")
        return values[0]

    def int_param(self, name: str) -> int | None:
        raw = self.single(name)
        if raw is None:
            return None
        try:
            return int(raw)
        except ValueError:
            raise InputError(f"query parameter {name!r} must be an integer") from None

    def float_param(self, name: str) -> float | None:
        raw = self.single(name)
        if raw is None:
            return None
        try:
            return float(raw)
        except ValueError:
            raise InputError(f"query parameter {name!r} must be a number") from None


@dataclass
class GatewayResponse:
    status: int
    body: bytes
    content_type: str = "application/json"

    @staticmethod
    def of(status: int, doc) -> "GatewayResponse":
        payload = json.dumps(doc, ensure_ascii=False, sort_keys=True).encode("utf-8")
        return GatewayResponse(status, payload)

    def json(self):
        return json.loads(self.body.decode("utf-8"))


class Gateway:
    """Socket-free request dispatcher; GatewayServer binds it to a port."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.config = grid.config
        self._builtin_runners: dict[str, BuiltinRunner] = {}
        self._openapi: dict | None = None

    # ---------------------------------------------------------- dispatch

    def dispatch(self, method: str, target: str, headers: dict | None = None,
                 body: bytes = b"") -> GatewayResponse:
        headers = headers or {}
        split = urlsplit(target)
        path = split.path
        try:
            principal = self._principal(headers)
            route, params = self._match(method, path)
            if route.roles is not None:
                require_role(principal, *route.roles)
            request = GatewayRequest(
                principal=principal,
                params=params,
                query=parse_qs(split.query, keep_blank_values=True),
                body=body,
            )
            return getattr(self, route.handler)(request)
        except GridError as e:
            return GatewayResponse.of(status_for(e), e.to_doc())
        except Exception:  # noqa: BLE001  surface unexpected faults as 500s
            traceback.print_exc()
            return GatewayResponse.of(
                500, {"code": "gw.internal", "message": "internal gateway error"}
            )

    def _match(self, method: str, path: str):
        saw_path = False
        for route in ROUTES:
            if route.requires_samples and not self.config.with_samples:
                continue
            m = route.pattern.match(path)
            if m is None:
                continue
            saw_path = True
            if route.method == method:
                return route, m.groupdict()
        if saw_path:
            raise UnknownRoute(f"no route for {method} {path}")
        raise UnknownRoute(f"no route for {path}")

    def _principal(self, headers: dict) -> Principal:
        raw = None
        for name, value in headers.items():
            if name.lower() == "authorization":
                raw = value
                break
        if raw is None:
            return ANONYMOUS
        if not raw.startswith("Bearer "):
            raise AuthenticationError("authorization header must be 'Bearer <token>'")
        return authenticate(raw[len("Bearer "):].strip(), self.config.token_secret)

    # ------------------------------------------------------------ basics

    def handle_health(self, req: GatewayRequest) -> GatewayResponse:
        return GatewayResponse.of(200, {
            "status": "ok",
            "records": len(self.grid.catalogue),
            "services": len(self.grid.orchestrator.list_services()),
        })

    def handle_issue_token(self, req: GatewayRequest) -> GatewayResponse:
        if not self.config.dev_token_issuer:
            raise UnknownRoute("no route for /api/auth/token")
        doc = req.json_body()
        unknown = set(doc) - {"subject", "roles", "ttl"}
        if unknown:
            raise InputError(f"unknown field(s): {', '.join(sorted(unknown))}")
        subject = doc.get("subject")
        if not isinstance(subject, str):
            raise InputError("subject must be a string", field_path="subject")
        roles = doc.get("roles", [])
        if not isinstance(roles, list) or not all(isinstance(r, str) for r in roles):
            raise InputError("roles must be a list of strings", field_path="roles")
        ttl = doc.get("ttl", 3600.0)
        if isinstance(ttl, bool) or not isinstance(ttl, (int, float)):
            raise InputError("ttl must be a number of seconds", field_path="ttl")
        token = issue_token(self.config.token_secret, subject, roles, ttl=float(ttl))
        return GatewayResponse.of(201, {
            "token": token,
            "subject": subject,
            "roles": sorted(roles),
        })

    def handle_openapi(self, req: GatewayRequest) -> GatewayResponse:
        if self._openapi is None:
            from .openapi import openapi_document

            self._openapi = openapi_document(self)
        return GatewayResponse.of(200, self._openapi)

    # --------------------------------------------------------- catalogue

    def handle_search(self, req: GatewayRequest) -> GatewayResponse:
        allowed = {"q", "offset", "limit"} | set(FACET_NAMES)
        unknown = set(req.query) - allowed
        if unknown:
            raise InputError(f"unknown query parameter(s): {', '.join(sorted(unknown))}")
        doc: dict = {}
        text = req.single("q")
        if text is not None:
            doc["text"] = text
        facets = {name: req.query[name] for name in FACET_NAMES if req.query.get(name)}
        if facets:
            doc["facets"] = facets
        offset = req.int_param("offset")
        if offset is not None:
            doc["offset"] = offset
        limit = req.int_param("limit")
        if limit is not None:
            doc["limit"] = limit
        result = self.grid.catalogue.search(SearchQuery.parse(doc))
        return GatewayResponse.of(200, result.to_doc())

    def handle_list_records(self, req: GatewayRequest) -> GatewayResponse:
        offset = req.int_param("offset") or 0
        limit = req.int_param("limit")
        limit = 20 if limit is None else limit
        if offset < 0:
            raise InputError("offset must be a non-negative integer")
        if not 1 <= limit <= 100:
            raise InputError("limit must be in 1..100")
        records = self.grid.catalogue.list_records()
        page = records[offset:offset + limit]
        return GatewayResponse.of(200, {
            "total": len(records),
            "offset": offset,
            "limit": limit,
            "records": [record_to_doc(r) for r in page],
        })

    def handle_get_record(self, req: GatewayRequest) -> GatewayResponse:
        record = self.grid.catalogue.get_record(req.params["record_id"])
        return GatewayResponse.of(200, record_to_doc(record))

    def handle_create_record(self, req: GatewayRequest) -> GatewayResponse:
        record = doc_to_record(req.json_body())
        if record.owner is None and not req.principal.is_admin:
            record = record.with_fields(owner=req.principal.subject)
        rid = self.grid.catalogue.create_record(record, actor=req.principal.subject)
        return GatewayResponse.of(201, record_to_doc(self.grid.catalogue.get_record(rid)))

    def handle_update_record(self, req: GatewayRequest) -> GatewayResponse:
        doc = req.json_body()
        unknown = set(doc) - {"record", "expected_version"}
        if unknown:
            raise InputError(f"unknown field(s): {', '.join(sorted(unknown))}")
        if "record" not in doc:
            raise InputError("missing field 'record'", field_path="record")
        expected = doc.get("expected_version")
        if not isinstance(expected, int) or isinstance(expected, bool):
            raise InputError(
                "expected_version must be an integer", field_path="expected_version"
            )
        record = doc_to_record(doc["record"])
        self.grid.catalogue.update_record(
            req.params["record_id"],
            record,
            expected_version=expected,
            actor=req.principal.subject,
            admin=req.principal.is_admin,
        )
        stored = self.grid.catalogue.get_record(req.params["record_id"])
        return GatewayResponse.of(200, record_to_doc(stored))

    def handle_publish(self, req: GatewayRequest) -> GatewayResponse:
        doc = req.json_body()
        unknown = set(doc) - {"to"}
        if unknown:
            raise InputError(f"unknown field(s): {', '.join(sorted(unknown))}")
        to = doc.get("to")
        if to is not None and not isinstance(to, str):
            raise InputError("to must be a lifecycle status string", field_path="to")
        self.grid.catalogue.transition_status(
            req.params["record_id"],
            to=to,
            actor=req.principal.subject,
            admin=req.principal.is_admin,
        )
        stored = self.grid.catalogue.get_record(req.params["record_id"])
        return GatewayResponse.of(200, {
            "id": stored.id,
            "status": stored.status.value,
            "version": stored.version,
        })

    def handle_claim(self, req: GatewayRequest) -> GatewayResponse:
        self.grid.catalogue.claim_record(
            req.principal.subject,
            req.params["record_id"],
            admin=req.principal.is_admin,
        )
        record = self.grid.catalogue.get_record(req.params["record_id"])
        return GatewayResponse.of(200, record_to_doc(record))

    # ---------------------------------------------------------- services

    def handle_list_services(self, req: GatewayRequest) -> GatewayResponse:
        services = []
        for manifest in self.grid.orchestrator.list_services():
            services.append({
                "service_id": manifest.service_id,
                "service_class": manifest.service_class.value,
                "record_id": manifest.catalogue_record_id,
                "conformance": self.grid.orchestrator.conformance_status(manifest.service_id),
                "restricted": manifest.restricted,
            })
        return GatewayResponse.of(200, {"services": services})

    def handle_describe_service(self, req: GatewayRequest) -> GatewayResponse:
        doc = self.grid.orchestrator.describe_service(req.params["service_id"])
        return GatewayResponse.of(200, doc)

    def handle_register_service(self, req: GatewayRequest) -> GatewayResponse:
        doc = req.json_body()
        unknown = set(doc) - {"manifest", "record"}
        if unknown:
            raise InputError(f"unknown field(s): {', '.join(sorted(unknown))}")
        if "manifest" not in doc or "record" not in doc:
            raise InputError("body must carry 'manifest' and 'record'")
        manifest = ServiceManifest.from_doc(doc["manifest"])
        record = doc_to_record(doc["record"])
        if record.owner is None and not req.principal.is_admin:
            record = record.with_fields(owner=req.principal.subject)
        service_id = self.grid.orchestrator.register_service(
            manifest, record, actor=req.principal.subject
        )
        registered = self.grid.orchestrator.get_manifest(service_id)
        return GatewayResponse.of(201, {
            "service_id": service_id,
            "record_id": registered.catalogue_record_id,
            "conformance": "unknown",
        })

    def handle_conformance(self, req: GatewayRequest) -> GatewayResponse:
        deadline = req.float_param("deadline")
        report = self.grid.orchestrator.run_service_conformance(
            req.params["service_id"], deadline=deadline
        )
        doc = report.to_doc()
        doc["service_id"] = req.params["service_id"]
        return GatewayResponse.of(200, doc)

    def handle_process(self, req: GatewayRequest) -> GatewayResponse:
        service_id = req.params["service_id"]
        manifest = self.grid.orchestrator.get_manifest(service_id)
        if manifest.restricted and not req.principal.is_admin:
            record = self.grid.catalogue.get_record(manifest.catalogue_record_id)
            if record.owner != req.principal.subject:
                raise AuthorizationError(
                    f"service {service_id!r} is restricted to its owner"
                )
        ticket = self.grid.orchestrator.process(
            service_id,
            req.body,
            principal=req.principal.subject,
            deadline=req.float_param("deadline"),
        )
        return GatewayResponse(200, serialize_response(ticket.response))

    def handle_usage(self, req: GatewayRequest) -> GatewayResponse:
        allowed = {"principal", "service", "since", "until"}
        unknown = set(req.query) - allowed
        if unknown:
            raise InputError(f"unknown query parameter(s): {', '.join(sorted(unknown))}")
        principal = req.single("principal")
        if not req.principal.is_admin:
            if principal is not None and principal != req.principal.subject:
                raise AuthorizationError("usage of other principals requires role admin")
            principal = req.principal.subject
        since = req.float_param("since")
        until = req.float_param("until")
        events = self.grid.orchestrator.ledger.events(
            service_id=req.single("service"), principal=principal
        )
        if since is not None:
            events = [e for e in events if e.started_at >= since]
        if until is not None:
            events = [e for e in events if e.started_at < until]
        by_outcome: dict[str, int] = {}
        for e in events:
            by_outcome[e.outcome] = by_outcome.get(e.outcome, 0) + 1
        return GatewayResponse.of(200, {
            "count": len(events),
            "by_outcome": dict(sorted(by_outcome.items())),
            "total_duration": round(sum(e.duration for e in events), 9),
            "total_request_bytes": sum(e.request_bytes for e in events),
            "events": [e.to_doc() for e in events],
        })

    # ----------------------------------------------------------- harvest

    def handle_list_sources(self, req: GatewayRequest) -> GatewayResponse:
        sources = [s.to_doc() for s in self.grid.harvester.list_sources()]
        return GatewayResponse.of(200, {"sources": sources})

    def handle_add_source(self, req: GatewayRequest) -> GatewayResponse:
        source = HarvestSource.from_doc(req.json_body())
        self.grid.harvester.add_source(source)
        return GatewayResponse.of(201, source.to_doc())

    def handle_run_harvest(self, req: GatewayRequest) -> GatewayResponse:
        report = self.grid.harvester.run(req.params["source_id"])
        return GatewayResponse.of(200, report.to_doc())

    # ------------------------------------------------------------ runner

    def _runner(self, name: str) -> BuiltinRunner:
        if name not in BUILTIN_SERVICES:
            raise NotFound(f"no sample runner {name!r}")
        runner = self._builtin_runners.get(name)
        if runner is None:
            svc = BUILTIN_SERVICES[name]
            runner = BuiltinRunner(svc.service_class, svc.handler)
            self._builtin_runners[name] = runner
        return runner

    def handle_runner_health(self, req: GatewayRequest) -> GatewayResponse:
        runner = self._runner(req.params["name"])
        alive = runner.probe(self.config.probe_timeout)
        return GatewayResponse.of(200 if alive else 503, {
            "name": req.params["name"],
            "alive": alive,
        })

    def handle_runner_process(self, req: GatewayRequest) -> GatewayResponse:
        runner = self._runner(req.params["name"])
        outcome = runner.invoke(req.body, timeout=self.config.probe_timeout)
        if outcome.kind != "response" or outcome.response is None:
            raise TransportError(f"sample runner failed: {outcome.detail or outcome.kind}")
        return GatewayResponse(200, outcome.response)


class _GatewayHTTPHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # noqa: ARG002  keep test output clean
        pass

    def _serve(self):
        gateway: Gateway = self.server.gateway  # type: ignore[attr-defined]
        try:
            length = int(self.headers.get("Content-Length") or 0)
        except ValueError:
            length = 0
        if length > MAX_BODY_BYTES:
            reply = GatewayResponse.of(
                422, {"code": "grid.invalid_input", "message": "request body too large"}
            )
        else:
            body = self.rfile.read(length) if length else b""
            reply = gateway.dispatch(self.command, self.path, dict(self.headers), body)
        self.send_response(reply.status)
        self.send_header("Content-Type", reply.content_type)
        self.send_header("Content-Length", str(len(reply.body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(reply.body)

    def do_OPTIONS(self):
        # CORS preflight for browser clients served from another origin.
        # Tokens travel in an explicit Authorization header, never cookies,
        # so the wildcard origin is safe.
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, PATCH, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Access-Control-Max-Age", "600")
        self.send_header("Content-Length", "0")
        self.end_headers()

    do_GET = _serve
    do_POST = _serve
    do_PUT = _serve
    do_DELETE = _serve
    do_PATCH = _serve


class GatewayServer:
    """Threaded HTTP front on a Gateway; binds an ephemeral port by default."""

    def __init__(self, grid: Grid, host: str | None = None, port: int | None = None):
        self.gateway = Gateway(grid)
        self._httpd = ThreadingHTTPServer(
            (host or grid.config.host, grid.config.port if port is None else port),
            _GatewayHTTPHandler,
        )
        self._httpd.gateway = self.gateway  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self):
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self):
        """Block the calling thread until interrupted; used by the CLI."""
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
