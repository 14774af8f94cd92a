"""Automated conformance battery run against a service runner.

A functional service cannot be published until its latest report passed.
The battery probes the behaviors the platform depends on, in a fixed
order, stopping at the first failure:

  reachability      liveness probe answers in time
  deadline          a well-formed request completes within the deadline
  response parse    the bytes that came back parse as an envelope
  response valid    the parsed response is legal for the class (and is not
                    an in-band failure; a service failing its own happy
                    path is not conformant)
  malformed request garbage bytes come back as kind=failure, not a crash
  empty content     an empty-content request is answered (any kind)
"""

from __future__ import annotations

from dataclasses import dataclass

from .envelopes import (
    LTRequest,
    parse_response,
    serialize_request,
    validate_response,
)
from .errors import InputError, TransportError
from .model import ServiceClass
from .runners import Runner, RunnerOutcome

STEP_NAMES = (
    "reachability",
    "deadline",
    "response parse",
    "response valid",
    "malformed request",
    "empty content",
)

DEFAULT_DEADLINE = 5.0
DEFAULT_PROBE_TIMEOUT = 2.0

MALFORMED_PROBE = b"this is not an envelope at all {"


@dataclass(frozen=True)
class ConformanceStep:
    name: str
    passed: bool
    detail: str = ""

    def to_doc(self) -> dict:
        doc = {"name": self.name, "passed": self.passed}
        if self.detail:
            doc["detail"] = self.detail
        return doc


@dataclass(frozen=True)
class ConformanceReport:
    passed: bool
    steps: tuple[ConformanceStep, ...]
    checked_at: float | None = None

    @property
    def failed_step(self) -> str | None:
        for step in self.steps:
            if not step.passed:
                return step.name
        return None

    def to_doc(self) -> dict:
        doc = {"passed": self.passed, "steps": [s.to_doc() for s in self.steps]}
        if self.checked_at is not None:
            doc["checked_at"] = self.checked_at
        return doc


def probe_request(service_class: ServiceClass, params: dict | None = None) -> LTRequest:
    """The well-formed request the battery sends for a given class."""
    params = dict(params or {})
    if service_class is ServiceClass.MT:
        params.setdefault("target_lang", "de")
        params.setdefault("source_lang", "en")
        return LTRequest.text("hello world", **params)
    if service_class is ServiceClass.ASR:
        from .samples import tonecodec

        return LTRequest.audio_request(tonecodec.encode("HI"), **params)
    return LTRequest.text("Hello world", **params)


def empty_request(service_class: ServiceClass, params: dict | None = None) -> LTRequest:
    params = dict(params or {})
    if service_class is ServiceClass.MT:
        params.setdefault("target_lang", "de")
    if service_class is ServiceClass.ASR:
        return LTRequest.audio_request(b"", **params)
    return LTRequest.text("", **params)


def _invoke(runner: Runner, request_bytes: bytes, timeout: float) -> RunnerOutcome:
    try:
        return runner.invoke(request_bytes, timeout)
    except TransportError as e:
        return RunnerOutcome(kind="crash", detail=f"transport: {e.message}")


def run_conformance(
    runner: Runner,
    service_class: ServiceClass,
    deadline: float = DEFAULT_DEADLINE,
    probe_timeout: float = DEFAULT_PROBE_TIMEOUT,
    probe_params: dict | None = None,
    checked_at: float | None = None,
) -> ConformanceReport:
    steps: list[ConformanceStep] = []

    def fail(name: str, detail: str) -> ConformanceReport:
        steps.append(ConformanceStep(name, False, detail))
        return ConformanceReport(passed=False, steps=tuple(steps), checked_at=checked_at)

    def ok(name: str, detail: str = ""):
        steps.append(ConformanceStep(name, True, detail))

    try:
        reachable = runner.probe(probe_timeout)
    except TransportError as e:
        reachable = False
        probe_detail = e.message
    else:
        probe_detail = "no answer to liveness probe" if not reachable else ""
    if not reachable:
        return fail("reachability", probe_detail)
    ok("reachability")

    req = probe_request(service_class, probe_params)
    outcome = _invoke(runner, serialize_request(req), deadline)
    if outcome.kind == "hang" or outcome.duration > deadline:
        return fail(
            "deadline",
            "no response within deadline"
            if outcome.kind == "hang"
            else f"took {outcome.duration:.3f}s, deadline {deadline:.3f}s",
        )
    ok("deadline", f"{outcome.duration:.3f}s")

    if outcome.kind != "response":
        return fail("response parse", outcome.detail or "runner crashed, nothing to parse")
    try:
        resp = parse_response(outcome.response)
    except InputError as e:
        return fail("response parse", e.message)
    ok("response parse")

    report = validate_response(service_class, req, resp)
    if not report.valid:
        return fail("response valid", "; ".join(i.message for i in report.errors()))
    if resp.kind == "failure":
        return fail(
            "response valid",
            f"in-band failure on a well-formed request: {resp.failure[0].message}",
        )
    ok("response valid", f"kind={resp.kind}")

    outcome = _invoke(runner, MALFORMED_PROBE, deadline)
    if outcome.kind != "response":
        return fail("malformed request", f"runner did not answer in-band ({outcome.kind})")
    try:
        resp = parse_response(outcome.response)
    except InputError as e:
        return fail("malformed request", f"unparseable answer: {e.message}")
    if resp.kind != "failure":
        return fail("malformed request", f"expected kind=failure, got {resp.kind}")
    ok("malformed request")

    outcome = _invoke(runner, serialize_request(empty_request(service_class, probe_params)), deadline)
    if outcome.kind != "response":
        return fail("empty content", f"runner did not answer ({outcome.kind})")
    try:
        parse_response(outcome.response)
    except InputError as e:
        return fail("empty content", f"unparseable answer: {e.message}")
    ok("empty content")

    return ConformanceReport(passed=True, steps=tuple(steps), checked_at=checked_at)
