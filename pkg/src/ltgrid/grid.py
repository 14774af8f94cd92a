"""Assembly of the whole platform: catalogue, orchestrator, harvester.

`Grid` wires the pieces together: the catalogue's publish step defers to
the orchestrator's conformance gate, the harvester writes through the
catalogue, and the bundled fixture repositories are pre-registered so the
CLI and gateway can run them by name.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .catalogue import Catalogue
from .config import GridConfig
from .fixture_server import FIXTURE_REPOS, file_source
from .harvest import Harvester
from .model import EntityKind, LanguagePair, MetadataRecord, Provenance, Status
from .orchestrator import Orchestrator, ServiceManifest
from .runners import RunnerDescriptor
from .samples import BUILTIN_SERVICES


class Grid:
    """One running platform instance (no HTTP; the gateway adds that)."""

    def __init__(self, config: GridConfig | None = None, clock=None):
        self.config = config or GridConfig()
        self.catalogue = Catalogue(
            log_path=self.config.catalogue_log, publish_gate=self._publish_gate
        )
        self.orchestrator = Orchestrator(
            self.catalogue,
            clock=clock,
            queue_capacity=self.config.queue_capacity,
            probe_timeout=self.config.probe_timeout,
        )
        self.harvester = Harvester(self.catalogue)
        for name in sorted(FIXTURE_REPOS):
            repo_dir = Path(self.config.fixture_dir) if self.config.fixture_dir else None
            source = file_source(name, repo_dir)
            if Path(source.locator).exists():
                self.harvester.add_source(source)
        if self.config.with_samples:
            self.install_samples()

    def _publish_gate(self, record: MetadataRecord):
        return self.orchestrator.publish_gate(record)

    def install_samples(self) -> list[str]:
        """Register, conformance-test and publish every built-in sample service.

        Sample records carry the stable identity ("builtin", name), so on a
        grid replaying a catalogue log the manifests re-attach to the records
        already there instead of creating duplicates.
        """
        published = []
        for name in sorted(BUILTIN_SERVICES):
            svc = BUILTIN_SERVICES[name]
            if name in {m.service_id for m in self.orchestrator.list_services()}:
                continue
            manifest = ServiceManifest(
                service_id=name,
                service_class=svc.service_class,
                runner=RunnerDescriptor("builtin", name),
                languages=svc.languages,
                scaling=self.config.scaling,
            )
            existing = self.catalogue.find_by_identity("builtin", name)
            if existing is not None:
                manifest = replace(manifest, catalogue_record_id=existing.id)
                service_id = self.orchestrator.register_service(manifest)
            else:
                record = MetadataRecord(
                    kind=EntityKind.ToolService,
                    resource_name=name,
                    description=svc.description,
                    languages=svc.languages,
                    language_pairs=tuple(
                        LanguagePair(source=s, target=t) for s, t in svc.language_pairs
                    ),
                    function=svc.function,
                    service_class=svc.service_class,
                    licence_ref="CC0-1.0",
                    source=Provenance.harvested("builtin", name),
                )
                service_id = self.orchestrator.register_service(manifest, record)
            report = self.orchestrator.run_service_conformance(service_id)
            if not report.passed:  # built-ins must pass; anything else is a bug
                raise AssertionError(
                    f"builtin {name} failed conformance at {report.failed_step}"
                )
            record_id = self.orchestrator.get_manifest(service_id).catalogue_record_id
            while self.catalogue.get_record(record_id).status is not Status.published:
                self.catalogue.transition_status(record_id, admin=True)
            published.append(service_id)
        return published

    def load_release_fixture(self) -> int:
        """Harvest the bundled release-1-alpha service metadata; returns count added."""
        return self.harvester.run("release1alpha").added

    def service_status(self, service_id: str) -> str:
        manifest = self.orchestrator.get_manifest(service_id)
        return self.catalogue.get_record(manifest.catalogue_record_id).status.value

    def published_services(self) -> list[str]:
        out = []
        for manifest in self.orchestrator.list_services():
            record = self.catalogue.get_record(manifest.catalogue_record_id)
            if record.status is Status.published:
                out.append(manifest.service_id)
        return out
