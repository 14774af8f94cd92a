"""Service registry and execution orchestrator with scale-to-zero pools.

Execution is modeled as a discrete-event simulation over an injected clock.
Every time-dependent rule (cold start, deadlines, idle scale-down, health
probes) reads the clock, so tests drive a VirtualClock deterministically
and the HTTP gateway runs the same engine against the real clock.

The flow of one request:

  submit()  -> validated, ticketed, enqueued (bounded FIFO), deadline event
               scheduled, instances cold-started if the pool lacks capacity
  dispatch  -> a ready idle instance takes the oldest queued request; the
               runner is invoked once and its outcome (response bytes,
               crash, or hang) is scheduled as a completion event after the
               reported duration; hangs schedule nothing
  resolve   -> exactly one of: valid response, in-band failure, masked
               lt.internal (crash or bad response bytes), lt.timeout
               (deadline event fired first), lt.overloaded (queue full at
               submit). Exactly one UsageEvent is appended either way.

Scaling actions happen in submit (cold-start on demand), autoscale_tick
(idle scale-down toward min_instances, queue-driven scale-up toward
max_instances) and health_sweep (probe failures). All state mutations are
serialized through one lock; runner invocations happen outside it.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time as _time
from dataclasses import dataclass, field

from .catalogue import Catalogue
from .conformance import ConformanceReport, run_conformance
from .envelopes import (
    LTRequest,
    LTResponse,
    parse_request,
    parse_response,
    serialize_request,
    validate_request,
    validate_response,
)
from .errors import Conflict, InputError, NotFound, ValidationFailed
from .model import EntityKind, MetadataRecord, ServiceClass, Status
from .runners import Runner, RunnerDescriptor, resolve_runner

DEFAULT_DEADLINE = 30.0
DEFAULT_IDLE_TIMEOUT = 60.0
DEFAULT_COLD_START = 0.5
DEFAULT_QUEUE_CAPACITY = 256
DEFAULT_PROBE_TIMEOUT = 2.0


class VirtualClock:
    """Manually advanced clock for deterministic tests."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def advance(self, dt: float) -> float:
        if dt < 0:
            raise ValueError("the clock does not run backwards")
        self._now += dt
        return self._now

    def advance_to(self, t: float) -> float:
        if t < self._now:
            raise ValueError("the clock does not run backwards")
        self._now = t
        return self._now


class RealClock:
    def now(self) -> float:
        return _time.monotonic()


@dataclass(frozen=True)
class ScalingPolicy:
    min_instances: int = 0
    max_instances: int = 1
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT
    cold_start_latency: float = DEFAULT_COLD_START

    def __post_init__(self):
        if self.min_instances < 0:
            raise InputError("min_instances must be >= 0", field_path="scaling.min_instances")
        if self.max_instances < 1:
            raise InputError("max_instances must be >= 1", field_path="scaling.max_instances")
        if self.min_instances > self.max_instances:
            raise InputError(
                "min_instances must not exceed max_instances", field_path="scaling.min_instances"
            )
        if self.idle_timeout <= 0:
            raise InputError("idle_timeout must be positive", field_path="scaling.idle_timeout")
        if self.cold_start_latency < 0:
            raise InputError(
                "cold_start_latency must be >= 0", field_path="scaling.cold_start_latency"
            )

    def to_doc(self) -> dict:
        return {
            "min_instances": self.min_instances,
            "max_instances": self.max_instances,
            "idle_timeout": self.idle_timeout,
            "cold_start_latency": self.cold_start_latency,
        }

    @staticmethod
    def from_doc(doc: dict) -> "ScalingPolicy":
        if not isinstance(doc, dict):
            raise InputError("scaling must be an object", field_path="scaling")
        unknown = set(doc) - {"min_instances", "max_instances", "idle_timeout", "cold_start_latency"}
        if unknown:
            raise InputError(
                f"unknown scaling field(s): {', '.join(sorted(unknown))}", field_path="scaling"
            )
        defaults = ScalingPolicy()
        try:
            return ScalingPolicy(
                min_instances=int(doc.get("min_instances", defaults.min_instances)),
                max_instances=int(doc.get("max_instances", defaults.max_instances)),
                idle_timeout=float(doc.get("idle_timeout", defaults.idle_timeout)),
                cold_start_latency=float(doc.get("cold_start_latency", defaults.cold_start_latency)),
            )
        except (TypeError, ValueError):
            raise InputError("scaling fields must be numeric", field_path="scaling") from None


@dataclass(frozen=True)
class ServiceManifest:
    service_id: str
    service_class: ServiceClass
    runner: RunnerDescriptor
    catalogue_record_id: str | None = None
    languages: tuple[str, ...] = ()
    restricted: bool = False
    scaling: ScalingPolicy = ScalingPolicy()
    deadline_default: float = DEFAULT_DEADLINE

    def to_doc(self) -> dict:
        return {
            "service_id": self.service_id,
            "service_class": self.service_class.value,
            "runner": self.runner.to_doc(),
            "catalogue_record_id": self.catalogue_record_id,
            "languages": list(self.languages),
            "restricted": self.restricted,
            "scaling": self.scaling.to_doc(),
            "deadline_default": self.deadline_default,
        }

    @staticmethod
    def from_doc(doc: dict) -> "ServiceManifest":
        if not isinstance(doc, dict):
            raise InputError("manifest must be an object", field_path="$")
        known = {
            "service_id",
            "service_class",
            "runner",
            "catalogue_record_id",
            "languages",
            "restricted",
            "scaling",
            "deadline_default",
        }
        unknown = set(doc) - known
        if unknown:
            raise InputError(f"unknown manifest field(s): {', '.join(sorted(unknown))}", field_path="$")
        try:
            service_class = ServiceClass(doc.get("service_class"))
        except ValueError:
            raise InputError(
                f"unknown service_class {doc.get('service_class')!r}", field_path="service_class"
            ) from None
        if "runner" not in doc:
            raise InputError("manifest requires a runner", field_path="runner")
        languages = doc.get("languages", [])
        if not isinstance(languages, list) or not all(isinstance(v, str) for v in languages):
            raise InputError("languages must be a list of strings", field_path="languages")
        deadline = doc.get("deadline_default", DEFAULT_DEADLINE)
        if isinstance(deadline, bool) or not isinstance(deadline, (int, float)) or deadline <= 0:
            raise InputError("deadline_default must be positive", field_path="deadline_default")
        return ServiceManifest(
            service_id=str(doc.get("service_id", "")),
            service_class=service_class,
            runner=RunnerDescriptor.from_doc(doc["runner"]),
            catalogue_record_id=doc.get("catalogue_record_id"),
            languages=tuple(languages),
            restricted=bool(doc.get("restricted", False)),
            scaling=ScalingPolicy.from_doc(doc.get("scaling", {})),
            deadline_default=float(deadline),
        )


@dataclass
class Instance:
    instance_id: str
    state: str = "cold_starting"  # cold_starting | ready | draining | terminated
    started_at: float = 0.0
    last_used: float = 0.0
    busy_with: str | None = None

    @property
    def alive(self) -> bool:
        return self.state in ("cold_starting", "ready")

    def snapshot(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "state": self.state,
            "busy_with": self.busy_with,
            "last_used": self.last_used,
        }


@dataclass
class Ticket:
    request_id: str
    service_id: str
    principal: str
    submitted_at: float
    deadline_at: float
    request: LTRequest
    request_bytes: int
    state: str = "queued"  # queued | dispatched | resolved
    accepted: bool = False
    instance_id: str | None = None
    response: LTResponse | None = None
    outcome: str | None = None
    resolved_at: float | None = None

    @property
    def resolved(self) -> bool:
        return self.state == "resolved"


@dataclass(frozen=True)
class UsageEvent:
    event_id: str
    principal: str
    service_id: str
    started_at: float
    duration: float
    request_bytes: int
    outcome: str  # success | timeout | rejected | <failure code>

    def to_doc(self) -> dict:
        return {
            "event_id": self.event_id,
            "principal": self.principal,
            "service_id": self.service_id,
            "started_at": self.started_at,
            "duration": self.duration,
            "request_bytes": self.request_bytes,
            "outcome": self.outcome,
        }


class UsageLedger:
    """Append-only usage record; totally ordered by append sequence."""

    def __init__(self):
        self._events: list[UsageEvent] = []
        self._lock = threading.Lock()

    def append(self, event: UsageEvent):
        with self._lock:
            self._events.append(event)

    def next_event_id(self) -> str:
        with self._lock:
            return f"evt-{len(self._events) + 1:06d}"

    def events(self, service_id: str | None = None, principal: str | None = None) -> list[UsageEvent]:
        with self._lock:
            out = list(self._events)
        if service_id is not None:
            out = [e for e in out if e.service_id == service_id]
        if principal is not None:
            out = [e for e in out if e.principal == principal]
        return out

    def summary(self, service_id: str | None = None) -> dict:
        events = self.events(service_id=service_id)
        by_outcome: dict[str, int] = {}
        for e in events:
            by_outcome[e.outcome] = by_outcome.get(e.outcome, 0) + 1
        return {
            "count": len(events),
            "by_outcome": dict(sorted(by_outcome.items())),
            "total_duration": round(sum(e.duration for e in events), 9),
            "total_request_bytes": sum(e.request_bytes for e in events),
        }

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)


class _Pool:
    def __init__(self, service_id: str):
        self.service_id = service_id
        self.instances: dict[str, Instance] = {}
        self.queue: list[str] = []  # request ids, FIFO
        self.instance_seq = itertools.count(1)
        self.accepted = 0
        self.resolved = 0

    def alive_instances(self) -> list[Instance]:
        return [i for i in self.instances.values() if i.alive]

    def free_ready(self) -> list[Instance]:
        return [
            i
            for i in self.instances.values()
            if i.state == "ready" and i.busy_with is None
        ]

    def warming(self) -> int:
        return sum(1 for i in self.instances.values() if i.state == "cold_starting")


class Orchestrator:
    """Routes requests to service runners under deadline and scaling rules."""

    def __init__(
        self,
        catalogue: Catalogue,
        clock=None,
        bindings: dict | None = None,
        queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
        probe_timeout: float = DEFAULT_PROBE_TIMEOUT,
    ):
        self.catalogue = catalogue
        self.clock = clock or RealClock()
        self.bindings = bindings or {}
        self.queue_capacity = queue_capacity
        self.probe_timeout = probe_timeout
        self.ledger = UsageLedger()
        self.action_log: list[tuple[float, str]] = []

        self._manifests: dict[str, ServiceManifest] = {}
        self._runners: dict[str, Runner] = {}
        self._reports: dict[str, ConformanceReport] = {}
        self._pools: dict[str, _Pool] = {}
        self._tickets: dict[str, Ticket] = {}
        self._record_to_service: dict[str, str] = {}

        self._lock = threading.RLock()
        self._cond = threading.Condition(self._lock)
        self._heap: list[tuple[float, int, str, tuple]] = []
        self._event_seq = itertools.count(1)
        self._ticket_seq = itertools.count(1)

    # ------------------------------------------------------------- registry

    def register_service(
        self,
        manifest: ServiceManifest,
        record: MetadataRecord | None = None,
        actor: str | None = None,
    ) -> str:
        """Store a manifest; conformance starts out unknown.

        With `record` given, a catalogue record is created for it (status
        ingested). Without one, the manifest attaches to the existing record
        named by its catalogue_record_id, whose lifecycle state is kept; this
        re-binds a service after a restart against a replayed catalogue.
        Either way the record must be a functional ToolService whose
        service_class matches the manifest.
        """
        if record is None:
            if not manifest.catalogue_record_id:
                raise InputError(
                    "attaching a manifest requires catalogue_record_id",
                    field_path="catalogue_record_id",
                )
            target = self.catalogue.get_record(manifest.catalogue_record_id)
        else:
            target = record
        if target.kind is not EntityKind.ToolService:
            raise InputError("registered services must have kind ToolService", field_path="kind")
        if target.service_class is None or target.function is None:
            raise InputError(
                "registered services must carry function and service_class",
                field_path="service_class",
            )
        if target.service_class is not manifest.service_class:
            raise InputError(
                f"manifest class {manifest.service_class.value} does not match "
                f"record class {target.service_class.value}",
                field_path="service_class",
            )
        runner = resolve_runner(manifest.runner, self.bindings)
        with self._lock:
            service_id = manifest.service_id or f"svc-{len(self._manifests) + 1:04d}"
            if service_id in self._manifests:
                raise Conflict(f"service id {service_id!r} already registered")
            if record is None:
                record_id = manifest.catalogue_record_id
                if record_id in self._record_to_service:
                    raise Conflict(
                        f"record {record_id} is already bound to service "
                        f"{self._record_to_service[record_id]!r}"
                    )
            else:
                record_id = self.catalogue.create_record(
                    record.with_fields(status=Status.ingested, owner=record.owner or actor),
                    actor=actor,
                )
            stored = ServiceManifest(
                service_id=service_id,
                service_class=manifest.service_class,
                runner=manifest.runner,
                catalogue_record_id=record_id,
                languages=manifest.languages or tuple(t.code for t in target.languages),
                restricted=manifest.restricted,
                scaling=manifest.scaling,
                deadline_default=manifest.deadline_default,
            )
            self._manifests[service_id] = stored
            self._runners[service_id] = runner
            self._pools[service_id] = _Pool(service_id)
            self._record_to_service[record_id] = service_id
            self._log(f"register {service_id}")
            return service_id

    def get_manifest(self, service_id: str) -> ServiceManifest:
        with self._lock:
            manifest = self._manifests.get(service_id)
        if manifest is None:
            raise NotFound(f"no service {service_id!r}")
        return manifest

    def list_services(self) -> list[ServiceManifest]:
        with self._lock:
            return [self._manifests[k] for k in sorted(self._manifests)]

    def service_for_record(self, record_id: str) -> str | None:
        with self._lock:
            return self._record_to_service.get(record_id)

    def describe_service(self, service_id: str) -> dict:
        manifest = self.get_manifest(service_id)
        doc = manifest.to_doc()
        doc["conformance"] = self.conformance_status(service_id)
        with self._lock:
            report = self._reports.get(service_id)
            if report is not None:
                doc["conformance_report"] = report.to_doc()
            record = self.catalogue.get_record(manifest.catalogue_record_id)
            doc["status"] = record.status.value
        return doc

    # ---------------------------------------------------------- conformance

    def run_service_conformance(self, service_id: str, deadline: float | None = None) -> ConformanceReport:
        manifest = self.get_manifest(service_id)
        runner = self._runners[service_id]
        report = run_conformance(
            runner,
            manifest.service_class,
            deadline=deadline if deadline is not None else min(manifest.deadline_default, 5.0),
            probe_timeout=self.probe_timeout,
            checked_at=self.clock.now(),
        )
        with self._lock:
            self._reports[service_id] = report
            self._log(f"conformance {service_id} {'passed' if report.passed else 'failed'}")
        return report

    def conformance_status(self, service_id: str) -> str:
        with self._lock:
            report = self._reports.get(service_id)
        if report is None:
            return "unknown"
        return "passed" if report.passed else "failed"

    def publish_gate(self, record: MetadataRecord) -> tuple[bool, str | None]:
        """Catalogue hook: a functional service publishes only after passing.

        Deliberately lock-free (plain dict reads): the catalogue calls this
        while holding its own lock, and register_service calls into the
        catalogue while holding ours, so taking our lock here would invite
        an ABBA deadlock.
        """
        service_id = self._record_to_service.get(record.id)
        report = self._reports.get(service_id) if service_id else None
        if service_id is None:
            return False, "no registered service backs this record"
        if report is None:
            return False, "conformance has not been run"
        if not report.passed:
            return False, f"conformance failed at step {report.failed_step!r}"
        return True, None

    # ------------------------------------------------------------ the engine

    def _log(self, text: str):
        self.action_log.append((self.clock.now(), text))

    def _schedule(self, at: float, kind: str, data: tuple):
        heapq.heappush(self._heap, (at, next(self._event_seq), kind, data))

    def _next_event_at(self) -> float | None:
        return self._heap[0][0] if self._heap else None

    def run_due_events(self):
        """Apply every event whose time has come (real-clock mode)."""
        with self._lock:
            while self._heap and self._heap[0][0] <= self.clock.now():
                self._pop_and_apply()

    def drive(self, until: float | None = None):
        """Virtual-clock mode: pop events in order, advancing the clock.

        Runs until the heap is empty or the next event is past `until`.
        """
        if not isinstance(self.clock, VirtualClock):
            raise InputError("drive() requires a virtual clock")
        with self._lock:
            while self._heap:
                at = self._heap[0][0]
                if until is not None and at > until:
                    break
                self.clock.advance_to(max(at, self.clock.now()))
                self._pop_and_apply()
            if until is not None and until > self.clock.now():
                self.clock.advance_to(until)

    def _pop_and_apply(self):
        at, _seq, kind, data = heapq.heappop(self._heap)
        if kind == "instance_ready":
            self._on_instance_ready(*data)
        elif kind == "completion":
            self._on_completion(*data)
        elif kind == "deadline":
            self._on_deadline(*data)

    # ------------------------------------------------------------- lifecycle

    def _start_instance(self, pool: _Pool, reason: str) -> Instance:
        manifest = self._manifests[pool.service_id]
        instance = Instance(
            instance_id=f"{pool.service_id}#{next(pool.instance_seq):03d}",
            state="cold_starting",
            started_at=self.clock.now(),
            last_used=self.clock.now(),
        )
        pool.instances[instance.instance_id] = instance
        self._log(f"start {instance.instance_id} {reason}")
        self._schedule(
            self.clock.now() + manifest.scaling.cold_start_latency,
            "instance_ready",
            (pool.service_id, instance.instance_id),
        )
        return instance

    def _terminate_instance(self, pool: _Pool, instance: Instance, reason: str):
        if instance.state == "terminated":
            return
        # an instance with an unresolved completion event drains first; the
        # stale event (or the next sweep/tick) finalizes it
        instance.state = "draining" if instance.busy_with is not None else "terminated"
        self._log(f"{'drain' if instance.state == 'draining' else 'terminate'} {instance.instance_id} {reason}")

    def _on_instance_ready(self, service_id: str, instance_id: str):
        pool = self._pools[service_id]
        instance = pool.instances[instance_id]
        if instance.state != "cold_starting":
            return
        instance.state = "ready"
        instance.last_used = self.clock.now()
        self._log(f"ready {instance_id}")
        self._dispatch(pool)

    def _on_completion(self, service_id: str, instance_id: str, request_id: str, outcome):
        pool = self._pools[service_id]
        instance = pool.instances.get(instance_id)
        ticket = self._tickets[request_id]

        if instance is not None and instance.busy_with == request_id:
            instance.busy_with = None
            instance.last_used = self.clock.now()
            if instance.state == "draining":
                instance.state = "terminated"
                self._log(f"terminate {instance_id} drained")

        if ticket.resolved:
            return  # deadline beat the completion; nothing more to do

        if outcome.kind == "crash":
            if instance is not None and instance.state == "ready":
                instance.state = "terminated"
                self._log(f"terminate {instance_id} crash")
            self._resolve(
                ticket,
                LTResponse.failure_response("lt.internal", outcome.detail or "runner crashed"),
                "lt.internal",
            )
        else:
            manifest = self._manifests[service_id]
            try:
                resp = parse_response(outcome.response)
            except InputError as e:
                resp = None
                detail = f"runner returned an unparseable response: {e.message}"
            if resp is not None:
                report = validate_response(manifest.service_class, ticket.request, resp)
                if not report.valid:
                    resp = None
                    detail = "runner response failed validation: " + "; ".join(
                        i.message for i in report.errors()
                    )
            if resp is None:
                self._resolve(ticket, LTResponse.failure_response("lt.internal", detail), "lt.internal")
            elif resp.kind == "failure":
                self._resolve(ticket, resp, resp.failure[0].code)
            else:
                self._resolve(ticket, resp, "success")
        self._dispatch(pool)

    def _on_deadline(self, service_id: str, request_id: str):
        pool = self._pools[service_id]
        ticket = self._tickets[request_id]
        if ticket.resolved:
            return
        if ticket.state == "queued":
            pool.queue.remove(request_id)
        elif ticket.instance_id is not None:
            instance = pool.instances.get(ticket.instance_id)
            if instance is not None and instance.alive:
                # whatever it is doing, it is too late; take it out of rotation
                self._terminate_instance(pool, instance, "timeout")
        self._resolve(
            ticket,
            LTResponse.failure_response(
                "lt.timeout", f"no result within {ticket.deadline_at - ticket.submitted_at:.3f}s"
            ),
            "timeout",
        )
        self._log(f"timeout {request_id}")
        self._dispatch(pool)

    def _resolve(self, ticket: Ticket, response: LTResponse, outcome: str):
        if ticket.resolved:
            raise AssertionError(f"{ticket.request_id} resolved twice ({ticket.outcome} then {outcome})")
        ticket.state = "resolved"
        ticket.response = response
        ticket.outcome = outcome
        ticket.resolved_at = self.clock.now()
        pool = self._pools[ticket.service_id]
        if ticket.accepted:
            pool.resolved += 1
        self.ledger.append(
            UsageEvent(
                event_id=self.ledger.next_event_id(),
                principal=ticket.principal,
                service_id=ticket.service_id,
                started_at=ticket.submitted_at,
                duration=round(ticket.resolved_at - ticket.submitted_at, 9),
                request_bytes=ticket.request_bytes,
                outcome=outcome,
            )
        )
        self._log(f"complete {ticket.request_id} {outcome}")
        self._cond.notify_all()

    # -------------------------------------------------------------- dispatch

    def _dispatch(self, pool: _Pool):
        """Hand queued requests to free instances; invoke outside the lock."""
        batch: list[tuple[Ticket, Instance]] = []
        while pool.queue:
            free = pool.free_ready()
            if not free:
                break
            instance = min(free, key=lambda i: i.instance_id)
            request_id = pool.queue.pop(0)
            ticket = self._tickets[request_id]
            ticket.state = "dispatched"
            ticket.instance_id = instance.instance_id
            instance.busy_with = request_id
            instance.last_used = self.clock.now()
            self._log(f"dispatch {request_id} -> {instance.instance_id}")
            batch.append((ticket, instance))

        if not batch:
            return
        runner = self._runners[pool.service_id]
        dispatched_at = self.clock.now()
        # the lock is held by our caller; release it around the invocation
        # so slow external runners do not stall the whole engine
        self._lock.release()
        try:
            outcomes = []
            for ticket, instance in batch:
                budget = max(ticket.deadline_at - dispatched_at, 0.001)
                outcomes.append(runner.invoke(serialize_request(ticket.request), budget))
        finally:
            self._lock.acquire()
        for (ticket, instance), outcome in zip(batch, outcomes):
            if outcome.kind == "hang":
                self._log(f"hang {ticket.request_id} on {instance.instance_id}")
                continue  # no completion event; the deadline will fire
            self._schedule(
                dispatched_at + max(outcome.duration, 0.0),
                "completion",
                (pool.service_id, instance.instance_id, ticket.request_id, outcome),
            )

    # ---------------------------------------------------------------- submit

    def submit(
        self,
        service_id: str,
        request: LTRequest | bytes,
        principal: str = "anonymous",
        deadline: float | None = None,
    ) -> Ticket:
        """Queue one request; returns an unresolved Ticket (non-blocking)."""
        with self._lock:
            manifest = self._manifests.get(service_id)
            if manifest is None:
                raise NotFound(f"no service {service_id!r}")
            record = self.catalogue.get_record(manifest.catalogue_record_id)
            if record.status is not Status.published:
                raise NotFound(f"service {service_id!r} is not published")

            now = self.clock.now()
            if isinstance(request, (bytes, bytearray)):
                raw_len = len(request)
                try:
                    req = parse_request(bytes(request))
                except InputError:
                    self.ledger.append(
                        UsageEvent(
                            event_id=self.ledger.next_event_id(),
                            principal=principal,
                            service_id=service_id,
                            started_at=now,
                            duration=0.0,
                            request_bytes=raw_len,
                            outcome="rejected",
                        )
                    )
                    self._log("reject (unparseable request)")
                    raise
            else:
                req = request
                raw_len = len(serialize_request(req))

            ticket = Ticket(
                request_id=f"req-{next(self._ticket_seq):06d}",
                service_id=service_id,
                principal=principal,
                submitted_at=now,
                deadline_at=now + (deadline if deadline is not None else manifest.deadline_default),
                request=req,
                request_bytes=raw_len,
            )
            self._tickets[ticket.request_id] = ticket

            report = validate_request(manifest.service_class, req)
            if not report.valid:
                self._resolve(
                    ticket,
                    LTResponse.failure_response(
                        "lt.invalid_request", "; ".join(i.message for i in report.errors())
                    ),
                    "rejected",
                )
                self._log(f"reject {ticket.request_id}")
                raise ValidationFailed(report, message="request failed validation")

            pool = self._pools[service_id]
            if len(pool.queue) >= self.queue_capacity:
                self._resolve(
                    ticket,
                    LTResponse.failure_response(
                        "lt.overloaded", f"queue full ({self.queue_capacity} waiting)"
                    ),
                    "lt.overloaded",
                )
                return ticket

            pool.accepted += 1
            ticket.accepted = True
            pool.queue.append(ticket.request_id)
            self._schedule(ticket.deadline_at, "deadline", (service_id, ticket.request_id))
            self._scale_up_for_queue(pool, manifest, reason="demand")
            self._dispatch(pool)
            return ticket

    def _scale_up_for_queue(self, pool: _Pool, manifest: ServiceManifest, reason: str) -> int:
        needed = len(pool.queue) - pool.warming() - len(pool.free_ready())
        headroom = manifest.scaling.max_instances - len(pool.alive_instances())
        to_start = min(needed, headroom)
        for _ in range(max(to_start, 0)):
            self._start_instance(pool, reason)
        return max(to_start, 0)

    def process(
        self,
        service_id: str,
        request: LTRequest | bytes,
        principal: str = "anonymous",
        deadline: float | None = None,
    ) -> Ticket:
        """submit() plus driving the engine until this ticket resolves."""
        ticket = self.submit(service_id, request, principal=principal, deadline=deadline)
        if ticket.resolved:
            return ticket
        if isinstance(self.clock, VirtualClock):
            with self._lock:
                while not ticket.resolved and self._heap:
                    self.clock.advance_to(max(self._heap[0][0], self.clock.now()))
                    self._pop_and_apply()
            if not ticket.resolved:
                raise AssertionError("event heap drained with an unresolved ticket")
            return ticket
        with self._cond:
            while not ticket.resolved:
                while self._heap and self._heap[0][0] <= self.clock.now():
                    self._pop_and_apply()
                if ticket.resolved:
                    break
                next_at = self._next_event_at()
                wait = 0.05 if next_at is None else max(min(next_at - self.clock.now(), 0.25), 0.0)
                self._cond.wait(wait)
        return ticket

    # ------------------------------------------------------------- scaling

    def autoscale_tick(self, now: float | None = None) -> list[str]:
        """Idle scale-down toward min_instances, queue scale-up, finalize drains."""
        actions: list[str] = []
        with self._lock:
            t = self.clock.now() if now is None else now
            for service_id in sorted(self._pools):
                pool = self._pools[service_id]
                manifest = self._manifests[service_id]
                scaling = manifest.scaling

                for instance in sorted(pool.instances.values(), key=lambda i: i.instance_id):
                    if instance.state != "draining":
                        continue
                    # a draining instance's request is already resolved; if
                    # its completion event never comes (hang), finalize here
                    if instance.busy_with is None or self._tickets[instance.busy_with].resolved:
                        instance.busy_with = None
                        instance.state = "terminated"
                        actions.append(f"terminate {instance.instance_id} drained")
                        self._log(actions[-1])

                idle = [
                    i
                    for i in sorted(pool.instances.values(), key=lambda i: i.instance_id)
                    if i.state == "ready"
                    and i.busy_with is None
                    and t - i.last_used > scaling.idle_timeout
                ]
                alive = len(pool.alive_instances())
                for instance in idle:
                    if alive <= scaling.min_instances:
                        break
                    instance.state = "terminated"
                    alive -= 1
                    actions.append(f"terminate {instance.instance_id} idle")
                    self._log(actions[-1])

                started = self._scale_up_for_queue(pool, manifest, reason="tick")
                for _ in range(started):
                    actions.append(f"start {service_id}")
                below_min = scaling.min_instances - len(pool.alive_instances())
                for _ in range(max(below_min, 0)):
                    self._start_instance(pool, "min_instances")
                    actions.append(f"start {service_id}")
        return actions

    def health_sweep(self, now: float | None = None) -> list[str]:
        """Probe every alive instance's runner; terminate and replace failures."""
        actions: list[str] = []
        with self._lock:
            services = sorted(self._pools)
        for service_id in services:
            runner = self._runners[service_id]
            with self._lock:
                pool = self._pools[service_id]
                candidates = [
                    i for i in sorted(pool.instances.values(), key=lambda x: x.instance_id) if i.alive
                ]
            for instance in candidates:
                healthy = runner.probe(self.probe_timeout)
                with self._lock:
                    if healthy or not instance.alive:
                        continue
                    in_flight = instance.busy_with
                    instance.busy_with = None
                    instance.state = "terminated"
                    actions.append(f"terminate {instance.instance_id} probe")
                    self._log(actions[-1])
                    if in_flight is not None:
                        ticket = self._tickets[in_flight]
                        if not ticket.resolved:
                            self._resolve(
                                ticket,
                                LTResponse.failure_response(
                                    "lt.internal", "instance failed its liveness probe mid-request"
                                ),
                                "lt.internal",
                            )
                    pending = len(self._pools[service_id].queue) + (1 if in_flight else 0)
                    manifest = self._manifests[service_id]
                    if pending > 0 and len(pool.alive_instances()) < manifest.scaling.max_instances:
                        self._start_instance(pool, "replacement")
                        actions.append(f"start {service_id}")
                    self._dispatch(pool)
        return actions

    # ------------------------------------------------------------ inspection

    def pool_stats(self, service_id: str) -> dict:
        with self._lock:
            pool = self._pools.get(service_id)
            if pool is None:
                raise NotFound(f"no service {service_id!r}")
            return {
                "service_id": service_id,
                "queue_length": len(pool.queue),
                "in_flight": sum(1 for i in pool.instances.values() if i.busy_with is not None),
                "accepted": pool.accepted,
                "resolved": pool.resolved,
                "instances": [
                    pool.instances[k].snapshot() for k in sorted(pool.instances)
                ],
            }

    def get_ticket(self, request_id: str) -> Ticket:
        with self._lock:
            ticket = self._tickets.get(request_id)
        if ticket is None:
            raise NotFound(f"no request {request_id!r}")
        return ticket
