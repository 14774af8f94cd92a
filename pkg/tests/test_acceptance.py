"""End-to-end acceptance checks.

Each test exercises one headline guarantee of the grid and prints a single
[PASS]/[FAIL] line straight to the terminal, so a full run reads as a
checklist. Everything here goes through public surfaces: the grid facade,
the orchestrator, the gateway dispatcher and the bundled fixtures.
"""

import json
import random
import time
from collections import Counter
from contextlib import contextmanager

import pytest

from ltgrid.auth import issue_token
from ltgrid.canonical import doc_to_record
from ltgrid.catalogue import Catalogue, ConformanceRequired, SearchQuery
from ltgrid.config import GridConfig
from ltgrid.gateway import ROUTES, Gateway
from ltgrid.grid import Grid
from ltgrid.model import EntityKind, ServiceClass
from ltgrid.orchestrator import (
    Orchestrator,
    ScalingPolicy,
    ServiceManifest,
    VirtualClock,
)
from ltgrid.runners import RunnerDescriptor, RunnerOutcome
from ltgrid.samples import tonecodec

from gen import populate_catalogue
from stubs import FaultyRunner, SequenceRunner, battery_outcomes, good_response_bytes
from test_search_oracle import assert_engine_matches_oracle, random_query_doc

SECRET = "acceptance-secret"


@pytest.fixture()
def announce(capsys):
    @contextmanager
    def _announce(line: str):
        outcome = "PASS"
        try:
            yield
        except BaseException:
            outcome = "FAIL"
            raise
        finally:
            with capsys.disabled():
                print(f"[{outcome}] {line}")

    return _announce


def tool_doc(name: str, service_class: str = "IE", function: str = "Tokenization") -> dict:
    return {
        "kind": "ToolService",
        "resource_name": name,
        "description": f"{name} acceptance stub",
        "languages": ["en"],
        "function": function,
        "service_class": service_class,
    }


def publish_stub(grid: Grid, service_id: str, runner, deadline: float = 1.0,
                 queue_warmup: bool = True, scaling: ScalingPolicy | None = None) -> str:
    """Bind a scripted runner, pass the battery, publish, return the service id."""
    ref = f"stub:{service_id}"
    grid.orchestrator.bindings[ref] = runner
    manifest = ServiceManifest(
        service_id=service_id,
        service_class=ServiceClass.IE,
        runner=RunnerDescriptor("image", ref),
        scaling=scaling or ScalingPolicy(max_instances=3, idle_timeout=4.0,
                                         cold_start_latency=0.2),
        deadline_default=deadline,
    )
    grid.orchestrator.register_service(manifest, doc_to_record(tool_doc(service_id)))
    report = grid.orchestrator.run_service_conformance(service_id)
    assert report.passed, report.failed_step
    rid = grid.orchestrator.get_manifest(service_id).catalogue_record_id
    grid.catalogue.transition_status(rid, admin=True)
    grid.catalogue.transition_status(rid, admin=True)
    return service_id


class WarmupThenFaulty:
    """Passes the conformance battery on scripted outcomes, then injects faults."""

    def __init__(self, seed: int):
        self.warmup = battery_outcomes(ServiceClass.IE)
        self.faulty = FaultyRunner(seed)

    def probe(self, timeout: float) -> bool:
        if self.warmup:
            return True
        return self.faulty.probe(timeout)

    def invoke(self, request_bytes: bytes, timeout: float) -> RunnerOutcome:
        if self.warmup:
            return self.warmup.pop(0)
        return self.faulty.invoke(request_bytes, timeout)


# --------------------------------------------------------------- criteria


def test_harvest_fixture_reproduction(announce):
    grid = Grid(GridConfig())
    started = time.monotonic()
    expected = {
        "elra": {"Corpus": 20, "LexicalConceptualResource": 2},
        "elrc_share": {"Corpus": 180, "LexicalConceptualResource": 7},
        "metashare": {"Corpus": 52, "LexicalConceptualResource": 12,
                      "LanguageDescription": 7},
    }
    with announce("harvest reproduces the fixture counts exactly and re-runs add 0"):
        for source_id in expected:
            report = grid.harvester.run(source_id)
            assert report.failed == (), report.failed
        by_source: dict[str, Counter] = {}
        for record in grid.catalogue.list_records():
            by_source.setdefault(record.source.source_id, Counter())[record.kind.value] += 1
        assert {s: dict(c) for s, c in by_source.items()} == expected

        for source_id in expected:
            rerun = grid.harvester.run(source_id)
            assert rerun.added == 0 and rerun.updated == 0
        elapsed = time.monotonic() - started
        assert elapsed < 5.0, f"harvest took {elapsed:.2f}s"


def test_release_fixture_facet_counts(announce):
    grid = Grid(GridConfig())
    with announce("release fixture facets: IE=133 MT=24 ASR=9 TTS=4 Classification=2"):
        assert grid.load_release_fixture() == 172
        result = grid.catalogue.search(SearchQuery.parse({"limit": 1}))
        assert result.facet_counts["service_class"] == {
            "ASR": 9, "Classification": 2, "IE": 133, "MT": 24, "TTS": 4,
        }


def test_translation_pair_facets(announce):
    grid = Grid(GridConfig())
    grid.load_release_fixture()
    with announce("translation pair facets: en->lv=3 no->en=2 en->hi=1"):
        for source, target, count in (("en", "lv", 3), ("no", "en", 2), ("en", "hi", 1)):
            result = grid.catalogue.search(SearchQuery.parse(
                {"facets": {"source": [source], "target": [target]}, "limit": 1}
            ))
            assert result.total == count, (source, target, result.total)


def test_search_matches_brute_force_oracle(announce):
    rng = random.Random(1759)
    cat = Catalogue(publish_gate=lambda record: (True, None))
    started = time.monotonic()
    with announce("search engine equals the brute-force oracle on 200 queries x 2000 records"):
        populate_catalogue(cat, rng, 2000)
        for _ in range(200):
            assert_engine_matches_oracle(cat, random_query_doc(rng))
        elapsed = time.monotonic() - started
        assert elapsed < 30.0, f"oracle sweep took {elapsed:.2f}s"


def run_fault_injection(seed: int, n_requests: int = 1000):
    """Seeded storm against a faulty service on a virtual clock.

    Returns (outcome counter, ledger docs, action log, gateway usage doc).
    """
    clock = VirtualClock()
    grid = Grid(GridConfig(token_secret=SECRET, queue_capacity=8), clock=clock)
    gateway = Gateway(grid)
    sid = publish_stub(
        grid, "acc.faulty", WarmupThenFaulty(seed * 7 + 1), deadline=1.0,
        scaling=ScalingPolicy(max_instances=3, idle_timeout=4.0, cold_start_latency=0.2),
    )
    request = json.dumps({"kind": "text", "content": "storm test"}).encode()

    rng = random.Random(seed)
    tickets = []
    for i in range(n_requests):
        clock.advance(rng.uniform(0.0, 0.25))
        try:
            tickets.append(grid.orchestrator.submit(sid, request, principal="storm"))
        except Exception as e:  # noqa: BLE001  submit must never raise here
            raise AssertionError(f"submit {i} raised {e}") from e
        if i % 7 == 0:
            grid.orchestrator.drive(until=clock.now())
            grid.orchestrator.autoscale_tick()
        if i % 13 == 0:
            grid.orchestrator.health_sweep()
    grid.orchestrator.drive()
    for _ in range(3):
        grid.orchestrator.autoscale_tick()
        grid.orchestrator.drive()

    outcomes = Counter(t.outcome for t in tickets)
    ledger = [e.to_doc() for e in grid.orchestrator.ledger.events()]
    admin = {"Authorization": "Bearer " + issue_token(SECRET, "root", ["admin"])}
    usage = gateway.dispatch("GET", "/api/usage", headers=admin).json()
    return tickets, outcomes, ledger, grid.orchestrator.action_log, usage


def test_every_request_reaches_one_terminal_outcome(announce):
    with announce("1000 fault-injected requests all reach exactly one metered outcome"):
        tickets, outcomes, ledger, _, usage = run_fault_injection(seed=424242)
        assert len(tickets) == 1000
        assert all(t.resolved for t in tickets)
        assert sum(outcomes.values()) == 1000
        assert set(outcomes) <= {"success", "timeout", "lt.internal", "lt.overloaded"}
        # the storm must actually exercise the interesting paths
        assert outcomes["success"] > 0 and outcomes["timeout"] > 0
        assert outcomes["lt.internal"] > 0

        assert len(ledger) == 1000
        assert Counter(e["outcome"] for e in ledger) == outcomes
        # the gateway's metering view reconciles with the orchestrator ledger
        assert usage["count"] == 1000
        assert usage["by_outcome"] == dict(outcomes)


def test_fault_injection_is_reproducible(announce):
    with announce("identical seeds give identical fault-injection traces"):
        _, outcomes_a, ledger_a, log_a, _ = run_fault_injection(seed=77, n_requests=300)
        _, outcomes_b, ledger_b, log_b, _ = run_fault_injection(seed=77, n_requests=300)
        assert outcomes_a == outcomes_b
        assert ledger_a == ledger_b
        assert log_a == log_b


def run_scale_to_zero(seed: int):
    clock = VirtualClock()
    grid = Grid(GridConfig(), clock=clock)
    policy = ScalingPolicy(min_instances=0, max_instances=2,
                           idle_timeout=5.0, cold_start_latency=0.5)
    steady = SequenceRunner(battery_outcomes(ServiceClass.IE)
                            + [RunnerOutcome.ok(good_response_bytes(ServiceClass.IE), 0.05)])
    sid = publish_stub(grid, "acc.steady", steady, deadline=10.0, scaling=policy)
    request = json.dumps({"kind": "text", "content": "tick"}).encode()
    rng = random.Random(seed)

    def burst(n: int) -> list:
        batch = []
        for _ in range(n):
            clock.advance(rng.uniform(0.01, 0.1))
            batch.append(grid.orchestrator.submit(sid, request))
            grid.orchestrator.autoscale_tick()
        grid.orchestrator.drive()
        return batch

    first = burst(6)
    # idle long enough for the reaper, then scale all the way down
    clock.advance(policy.idle_timeout + rng.uniform(0.5, 1.5))
    grid.orchestrator.autoscale_tick()
    stats_idle = grid.orchestrator.pool_stats(sid)
    second = burst(3)
    # one more request against the still-warm pool
    warm = grid.orchestrator.process(sid, request)
    return first, stats_idle, second, warm, list(grid.orchestrator.action_log)


def test_scale_to_zero_is_deterministic(announce):
    with announce("scale-to-zero: pool hits 0 after idle, cold start paid again, "
                  "identical seeds give identical action logs"):
        first, stats_idle, second, warm, log = run_scale_to_zero(seed=5150)
        assert all(t.outcome == "success" for t in first + second)

        cold = 0.5
        assert first[0].resolved_at - first[0].submitted_at >= cold
        alive = [i for i in stats_idle["instances"]
                 if i["state"] in ("cold_starting", "ready")]
        assert alive == [], f"instances survived the idle window: {alive}"
        assert second[0].resolved_at - second[0].submitted_at >= cold
        # a request against the warm pool does not pay the cold start again
        assert warm.outcome == "success"
        assert warm.resolved_at - warm.submitted_at < cold

        _, _, _, _, log_again = run_scale_to_zero(seed=5150)
        assert log == log_again
        _, _, _, _, log_other = run_scale_to_zero(seed=5151)
        assert log_other != log


def test_conformance_gate_blocks_failing_runners(announce):
    grid = Grid(GridConfig())
    orch = grid.orchestrator
    stubs = {
        "acc.malformed": SequenceRunner([RunnerOutcome.ok(b"%%% static", 0.01)]),
        "acc.hanging": SequenceRunner([RunnerOutcome(kind="hang", duration=2.0)]),
        "acc.healthy": SequenceRunner(battery_outcomes(ServiceClass.IE)),
    }
    with announce("conformance battery: malformed/hanging/healthy -> fail/fail/pass, "
                  "only the passing service publishes"):
        record_ids = {}
        for name, runner in stubs.items():
            ref = f"stub:{name}"
            orch.bindings[ref] = runner
            orch.register_service(
                ServiceManifest(service_id=name, service_class=ServiceClass.IE,
                                runner=RunnerDescriptor("image", ref),
                                deadline_default=1.0),
                doc_to_record(tool_doc(name)),
            )
            record_ids[name] = orch.get_manifest(name).catalogue_record_id

        reports = {name: orch.run_service_conformance(name) for name in stubs}
        assert reports["acc.malformed"].passed is False
        assert reports["acc.malformed"].failed_step == "response parse"
        assert reports["acc.hanging"].passed is False
        assert reports["acc.hanging"].failed_step == "deadline"
        assert reports["acc.healthy"].passed is True

        for name, rid in record_ids.items():
            grid.catalogue.transition_status(rid, admin=True)  # curated
            if name == "acc.healthy":
                grid.catalogue.transition_status(rid, admin=True)
                assert grid.service_status(name) == "published"
            else:
                with pytest.raises(ConformanceRequired):
                    grid.catalogue.transition_status(rid, admin=True)
                assert grid.service_status(name) == "curated"


def test_audio_codec_round_trip(announce):
    rng = random.Random(90125)
    started = time.monotonic()
    with announce("audio codec: 1000 random strings survive encode/decode exactly"):
        for _ in range(1000):
            text = "".join(rng.choice(tonecodec.ALPHABET)
                           for _ in range(rng.randint(1, 48)))
            assert tonecodec.decode(tonecodec.encode(text)) == text
        elapsed = time.monotonic() - started
        assert elapsed < 20.0, f"codec sweep took {elapsed:.2f}s"


def test_protected_routes_reject_bad_tokens(announce):
    gateway = Gateway(Grid(GridConfig(token_secret=SECRET)))
    protected = [r for r in ROUTES if r.roles is not None]
    expired = {"Authorization": "Bearer " + issue_token(
        SECRET, "late", ["admin"], ttl=60.0, now=time.time() - 3600)}
    roleless = {"Authorization": "Bearer " + issue_token(SECRET, "norole", [])}
    with announce(f"all {len(protected)} protected routes reject missing/expired/"
                  "under-privileged tokens with 401/401/403"):
        assert len(protected) >= 10
        for route in protected:
            path = route.template.replace("{record_id}", "x") \
                                 .replace("{service_id}", "x") \
                                 .replace("{source_id}", "x")
            missing = gateway.dispatch(route.method, path)
            assert missing.status == 401, (route.template, missing.status)
            assert missing.json()["code"] == "grid.unauthenticated"

            stale = gateway.dispatch(route.method, path, headers=expired)
            assert stale.status == 401, (route.template, stale.status)

            weak = gateway.dispatch(route.method, path, headers=roleless)
            assert weak.status == 403, (route.template, weak.status)
            assert weak.json()["code"] == "grid.forbidden"
