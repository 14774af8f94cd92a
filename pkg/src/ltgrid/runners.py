"""Runner abstraction: how a registered service actually gets executed.

Three descriptor types:
  builtin  — name of a bundled sample service, run in-process
  external — base URL of an HTTP endpoint speaking the envelope protocol
             (GET {base}/health for liveness, POST {base}/process to run)
  image    — opaque container-image reference; stored and displayed but only
             executable if the operator configures a binding for it

A Runner's invoke() never raises for service-level problems; it returns a
RunnerOutcome whose kind says what happened. "hang" means the runner will
never answer (in simulation: no completion event is ever scheduled; over
HTTP: the socket timed out). Transport-level unreachability raises
TransportError so callers can distinguish it from an in-band failure.
"""

from __future__ import annotations

import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable, Protocol

from .envelopes import (
    LTResponse,
    parse_request,
    serialize_response,
    validate_request,
)
from .errors import InputError, TransportError
from .model import ServiceClass

RUNNER_TYPES = ("builtin", "external", "image")

DEFAULT_SERVICE_TIME = 0.05  # simulated seconds per builtin invocation


@dataclass(frozen=True)
class RunnerDescriptor:
    type: str  # builtin | external | image
    ref: str   # builtin name, base URL, or image reference

    def __post_init__(self):
        if self.type not in RUNNER_TYPES:
            raise InputError(f"unknown runner type {self.type!r}", field_path="runner.type")
        if not self.ref:
            raise InputError("runner ref must be non-empty", field_path="runner.ref")

    def to_doc(self) -> dict:
        return {"type": self.type, "ref": self.ref}

    @staticmethod
    def from_doc(doc: dict) -> "RunnerDescriptor":
        if not isinstance(doc, dict):
            raise InputError("runner must be an object", field_path="runner")
        unknown = set(doc) - {"type", "ref"}
        if unknown:
            raise InputError(
                f"unknown runner field(s): {', '.join(sorted(unknown))}", field_path="runner"
            )
        return RunnerDescriptor(type=str(doc.get("type", "")), ref=str(doc.get("ref", "")))


@dataclass(frozen=True)
class RunnerOutcome:
    kind: str  # "response" | "crash" | "hang"
    response: bytes | None = None
    duration: float = 0.0
    detail: str = ""

    @staticmethod
    def ok(response: bytes, duration: float) -> "RunnerOutcome":
        return RunnerOutcome(kind="response", response=response, duration=duration)


class Runner(Protocol):
    def probe(self, timeout: float) -> bool:
        """Liveness check; True means the runner looks able to serve."""
        ...

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        """Execute one request. timeout bounds real-clock runners only;
        simulated runners report their notional duration instead."""
        ...


class BuiltinRunner:
    """In-process execution of a bundled sample service."""

    def __init__(
        self,
        service_class: ServiceClass,
        handler: Callable,
        service_time: float = DEFAULT_SERVICE_TIME,
    ):
        self.service_class = service_class
        self.handler = handler
        self.service_time = service_time

    def probe(self, timeout: float) -> bool:
        return True

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        try:
            req = parse_request(request_bytes)
        except InputError as e:
            resp = LTResponse.failure_response("lt.invalid_request", e.message)
            return RunnerOutcome.ok(serialize_response(resp), self.service_time)
        report = validate_request(self.service_class, req)
        if not report.valid:
            detail = "; ".join(i.message for i in report.errors())
            resp = LTResponse.failure_response("lt.invalid_request", detail)
            return RunnerOutcome.ok(serialize_response(resp), self.service_time)
        try:
            resp = self.handler(req)
        except Exception as e:  # a buggy handler must not take the pool down
            resp = LTResponse.failure_response("lt.internal", f"{type(e).__name__}: {e}")
        return RunnerOutcome.ok(serialize_response(resp), self.service_time)


class HttpRunner:
    """Talks to an external endpoint speaking the envelope protocol."""

    def __init__(self, base_url: str):
        self.base_url = base_url.rstrip("/")

    def probe(self, timeout: float) -> bool:
        try:
            with urllib.request.urlopen(f"{self.base_url}/health", timeout=timeout) as resp:
                return resp.status == 200
        except (urllib.error.URLError, OSError):
            return False

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        req = urllib.request.Request(
            f"{self.base_url}/process",
            data=request_bytes,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        started = time.monotonic()
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                body = resp.read()
                return RunnerOutcome.ok(body, time.monotonic() - started)
        except urllib.error.HTTPError as e:
            # a served error page is still an answer; let the caller try to
            # parse it (the envelope allows in-band failure)
            return RunnerOutcome.ok(e.read(), time.monotonic() - started)
        except TimeoutError:
            return RunnerOutcome(kind="hang", duration=timeout, detail="socket timeout")
        except (urllib.error.URLError, OSError) as e:
            if isinstance(getattr(e, "reason", None), TimeoutError):
                return RunnerOutcome(kind="hang", duration=timeout, detail="socket timeout")
            raise TransportError(f"runner unreachable: {e}") from None


class UnboundImageRunner:
    """Placeholder for an image reference with no configured binding."""

    def __init__(self, image_ref: str):
        self.image_ref = image_ref

    def probe(self, timeout: float) -> bool:
        return False

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        raise TransportError(
            f"image {self.image_ref!r} has no execution binding on this deployment"
        )


def resolve_runner(descriptor: RunnerDescriptor, bindings: dict | None = None) -> Runner:
    """Descriptor to executable runner.

    bindings maps image references (and optionally builtin names) to Runner
    objects the operator wired up; it is consulted before the defaults.
    """
    if bindings and descriptor.ref in bindings:
        return bindings[descriptor.ref]
    if descriptor.type == "builtin":
        from .samples import BUILTIN_SERVICES

        service = BUILTIN_SERVICES.get(descriptor.ref)
        if service is None:
            raise InputError(
                f"unknown builtin service {descriptor.ref!r}; "
                f"available: {', '.join(sorted(BUILTIN_SERVICES))}",
                field_path="runner.ref",
            )
        return BuiltinRunner(service.service_class, service.handler)
    if descriptor.type == "external":
        return HttpRunner(descriptor.ref)
    return UnboundImageRunner(descriptor.ref)
