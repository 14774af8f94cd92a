"""Scripted and fault-injecting runners shared across orchestrator tests."""

from __future__ import annotations

import random

from ltgrid.envelopes import LTResponse, serialize_response
from ltgrid.model import ServiceClass
from ltgrid.runners import RunnerOutcome


def good_response_bytes(service_class: ServiceClass) -> bytes:
    if service_class is ServiceClass.IE:
        resp = LTResponse.annotations_response({"tokens": []})
    elif service_class is ServiceClass.MT:
        resp = LTResponse.texts_response(["ok"])
    elif service_class is ServiceClass.Classification:
        resp = LTResponse.classification_response([])
    elif service_class is ServiceClass.TTS:
        resp = LTResponse.audio_response(b"\x00\x00")
    else:
        resp = LTResponse.texts_response(["ok"])
    return serialize_response(resp)


def failure_response_bytes(code: str = "lt.invalid_request", message: str = "nope") -> bytes:
    return serialize_response(LTResponse.failure_response(code, message))


def battery_outcomes(service_class: ServiceClass, duration: float = 0.01) -> list[RunnerOutcome]:
    """The three invoke outcomes that let a runner pass the conformance battery."""
    return [
        RunnerOutcome.ok(good_response_bytes(service_class), duration),
        RunnerOutcome.ok(failure_response_bytes(), duration),
        RunnerOutcome.ok(good_response_bytes(service_class), duration),
    ]


class SequenceRunner:
    """Plays outcomes in order, then repeats the last one forever.

    probe() consults probe_script the same way when given, else probe_ok.
    """

    def __init__(self, outcomes, probe_ok: bool = True, probe_script: list[bool] | None = None):
        self.outcomes = list(outcomes)
        self.probe_ok = probe_ok
        self.probe_script = list(probe_script) if probe_script is not None else None
        self.invocations = 0

    def probe(self, timeout: float) -> bool:
        if self.probe_script:
            if len(self.probe_script) > 1:
                return self.probe_script.pop(0)
            return self.probe_script[0]
        return self.probe_ok

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        self.invocations += 1
        if len(self.outcomes) > 1:
            return self.outcomes.pop(0)
        return self.outcomes[0]


class FaultyRunner:
    """Seeded random mix of good, slow, malformed, failing, crashing and
    hanging behavior, with occasional probe failures."""

    BEHAVIORS = ("good", "slow", "malformed", "inband", "crash", "hang")
    WEIGHTS = (55, 10, 10, 10, 8, 7)

    def __init__(self, seed: int, service_class: ServiceClass = ServiceClass.IE,
                 probe_fail_rate: float = 0.08):
        self.rng = random.Random(seed)
        self.service_class = service_class
        self.probe_fail_rate = probe_fail_rate

    def probe(self, timeout: float) -> bool:
        return self.rng.random() >= self.probe_fail_rate

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        behavior = self.rng.choices(self.BEHAVIORS, weights=self.WEIGHTS)[0]
        if behavior == "good":
            return RunnerOutcome.ok(
                good_response_bytes(self.service_class), self.rng.uniform(0.01, 0.3)
            )
        if behavior == "slow":
            return RunnerOutcome.ok(
                good_response_bytes(self.service_class), self.rng.uniform(1.2, 3.0)
            )
        if behavior == "malformed":
            return RunnerOutcome.ok(b"%%% static on the line", self.rng.uniform(0.01, 0.2))
        if behavior == "inband":
            return RunnerOutcome.ok(
                failure_response_bytes("lt.internal", "synthetic fault"),
                self.rng.uniform(0.01, 0.2),
            )
        if behavior == "crash":
            return RunnerOutcome(kind="crash", duration=self.rng.uniform(0.01, 0.2),
                                 detail="synthetic crash")
        return RunnerOutcome(kind="hang")
