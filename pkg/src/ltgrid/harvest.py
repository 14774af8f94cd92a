"""Legacy-repository harvesting: format converters, list/get transports,
and incremental runs that feed the catalogue.

Three source formats are supported. ``legacy_xml`` is an element-per-field
XML dialect and ``legacy_json`` an object-per-record array; both carry the
same logical fields and share one kind-mapping table. ``native`` sources
ship catalogue record documents directly. The field mapping is documented
in docs/legacy-formats.md.
"""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.parse
import urllib.request
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .canonical import content_fingerprint, doc_to_record
from .catalogue import Catalogue
from .errors import Conflict, GridError, InputError, NotFound, TransportError
from .model import EntityKind, MetadataRecord, Provenance, ServiceClass, validate_record

HARVEST_FORMATS = ("legacy_xml", "legacy_json", "native")

#: Legacy resourceType -> catalogue entity kind. Models and computational
#: grammars both describe a language, hence the shared target kind.
KIND_MAP = {
    "corpus": EntityKind.Corpus,
    "lexicalConceptualResource": EntityKind.LexicalConceptualResource,
    "languageDescription": EntityKind.LanguageDescription,
    "model": EntityKind.LanguageDescription,
    "tool": EntityKind.ToolService,
}

HTTP_TIMEOUT = 10.0


class ConversionError(InputError):
    """A legacy document could not be mapped onto a catalogue record."""

    code = "harvest.conversion"

    def __init__(self, message: str, source_record_id: str | None = None):
        super().__init__(message)
        self.source_record_id = source_record_id


@dataclass(frozen=True)
class HarvestCursor:
    """Incremental position in a source; datestamps are RFC 3339 strings.

    Uniform Z-suffixed timestamps compare correctly as plain strings, which
    is all the fixture repositories (and this module) ever produce.
    """

    last_datestamp: str | None = None

    def advanced_to(self, datestamp: str | None) -> "HarvestCursor":
        if datestamp is None:
            return self
        if self.last_datestamp is not None and datestamp < self.last_datestamp:
            return self  # never move backward
        return HarvestCursor(last_datestamp=datestamp)


@dataclass
class HarvestSource:
    """A legacy repository: where it lives and how to read it."""

    id: str
    format: str
    locator: str  # file path or HTTP base URL
    cursor: HarvestCursor = field(default_factory=HarvestCursor)

    def __post_init__(self):
        if not self.id:
            raise InputError("source id must be non-empty", field_path="id")
        if self.format not in HARVEST_FORMATS:
            raise InputError(
                f"unknown harvest format {self.format!r}; expected one of "
                + ", ".join(HARVEST_FORMATS),
                field_path="format",
            )
        if not self.locator:
            raise InputError("source locator must be non-empty", field_path="locator")

    @property
    def is_http(self) -> bool:
        return self.locator.startswith(("http://", "https://"))

    def to_doc(self) -> dict:
        doc = {"id": self.id, "format": self.format, "locator": self.locator}
        if self.cursor.last_datestamp is not None:
            doc["cursor"] = self.cursor.last_datestamp
        return doc

    @staticmethod
    def from_doc(doc) -> "HarvestSource":
        if not isinstance(doc, dict):
            raise InputError("harvest source must be an object", field_path="$")
        unknown = set(doc) - {"id", "format", "locator", "cursor"}
        if unknown:
            raise InputError(
                f"unknown source field(s): {', '.join(sorted(unknown))}", field_path="$"
            )
        for key in ("id", "format", "locator"):
            if not isinstance(doc.get(key), str) or not doc.get(key):
                raise InputError(f"{key} must be a non-empty string", field_path=key)
        cursor = doc.get("cursor")
        if cursor is not None and not isinstance(cursor, str):
            raise InputError("cursor must be a datestamp string", field_path="cursor")
        return HarvestSource(
            id=doc["id"],
            format=doc["format"],
            locator=doc["locator"],
            cursor=HarvestCursor(last_datestamp=cursor),
        )


@dataclass(frozen=True)
class HarvestReport:
    """Outcome of one run; added + updated + unchanged + |failed| == enumerated."""

    source_id: str
    enumerated: int = 0
    added: int = 0
    updated: int = 0
    unchanged: int = 0
    failed: tuple[tuple[str, str], ...] = ()
    cursor: str | None = None

    def to_doc(self) -> dict:
        return {
            "source_id": self.source_id,
            "enumerated": self.enumerated,
            "added": self.added,
            "updated": self.updated,
            "unchanged": self.unchanged,
            "failed": [{"source_record_id": i, "reason": r} for i, r in self.failed],
            "cursor": self.cursor,
        }


# ------------------------------------------------------------------ converters


def _text_of(element: ET.Element, tag: str) -> str | None:
    child = element.find(tag)
    if child is None or child.text is None:
        return None
    return child.text.strip() or None


def _map_kind(resource_type: str | None, source_record_id: str | None) -> EntityKind:
    if not resource_type:
        raise ConversionError("missing resourceType", source_record_id)
    kind = KIND_MAP.get(resource_type)
    if kind is None:
        raise ConversionError(
            f"unmappable resourceType {resource_type!r}", source_record_id
        )
    return kind


def _build_record(
    *,
    kind: EntityKind,
    name: str | None,
    description: str | None,
    languages: list[str],
    licence: str | None,
    function: str | None,
    service_class: str | None,
    provenance: Provenance,
    source_record_id: str | None,
) -> MetadataRecord:
    if not name:
        raise ConversionError("missing resourceName", source_record_id)
    cls = None
    if service_class is not None:
        try:
            cls = ServiceClass(service_class)
        except ValueError:
            raise ConversionError(
                f"unknown serviceClass {service_class!r}", source_record_id
            ) from None
    return MetadataRecord(
        kind=kind,
        resource_name=name,
        description=description or "",
        languages=tuple(languages),
        function=function,
        service_class=cls,
        licence_ref=licence,
        source=provenance,
    )


def convert_legacy_xml(document, source_id: str, harvest_time: str | None = None) -> MetadataRecord:
    """Convert one ``<record>`` element (or its XML text) to a record."""
    if isinstance(document, (str, bytes)):
        try:
            element = ET.fromstring(document)
        except ET.ParseError as e:
            raise ConversionError(f"malformed XML: {e}") from None
    else:
        element = document
    if element.tag != "record":
        raise ConversionError(f"expected a <record> element, got <{element.tag}>")
    rid = element.get("id")
    if not rid:
        raise ConversionError("record element lacks an id attribute")
    return _build_record(
        kind=_map_kind(_text_of(element, "resourceType"), rid),
        name=_text_of(element, "resourceName"),
        description=_text_of(element, "description"),
        languages=[e.text.strip() for e in element.findall("language") if e.text],
        licence=_text_of(element, "licence"),
        function=_text_of(element, "function"),
        service_class=_text_of(element, "serviceClass"),
        provenance=Provenance.harvested(source_id, rid, harvest_time),
        source_record_id=rid,
    )


def convert_legacy_json(document, source_id: str, harvest_time: str | None = None) -> MetadataRecord:
    """Convert one legacy JSON object to a record."""
    if not isinstance(document, dict):
        raise ConversionError("legacy_json document must be an object")
    rid = document.get("id")
    if not isinstance(rid, str) or not rid:
        raise ConversionError("document lacks an id")
    languages = document.get("languages", [])
    if not isinstance(languages, list) or not all(isinstance(v, str) for v in languages):
        raise ConversionError("languages must be a list of strings", rid)
    return _build_record(
        kind=_map_kind(document.get("resourceType"), rid),
        name=document.get("resourceName"),
        description=document.get("description"),
        languages=languages,
        licence=document.get("licence"),
        function=document.get("function"),
        service_class=document.get("serviceClass"),
        provenance=Provenance.harvested(source_id, rid, harvest_time),
        source_record_id=rid,
    )


def convert_native(document, source_id: str, harvest_time: str | None = None) -> MetadataRecord:
    """Wrap a native record document; provenance still points at the source."""
    if not isinstance(document, dict):
        raise ConversionError("native document must be an object")
    rid = document.get("id")
    if not isinstance(rid, str) or not rid:
        raise ConversionError("document lacks an id")
    body = document.get("record")
    if not isinstance(body, dict):
        raise ConversionError("native document lacks a record object", rid)
    try:
        record = doc_to_record(body)
    except GridError as e:
        raise ConversionError(f"bad native record: {e.message}", rid) from None
    return record.with_fields(
        id=None, source=Provenance.harvested(source_id, rid, harvest_time)
    )


_CONVERTERS = {
    "legacy_xml": convert_legacy_xml,
    "legacy_json": convert_legacy_json,
    "native": convert_native,
}


def convert_legacy(format: str, document, source_id: str = "legacy",
                   harvest_time: str | None = None) -> MetadataRecord:
    """Convert one source document; the result passes validate_record."""
    converter = _CONVERTERS.get(format)
    if converter is None:
        raise InputError(f"unknown harvest format {format!r}", field_path="format")
    record = converter(document, source_id, harvest_time)
    report = validate_record(record)
    if not report.valid:
        first = report.errors()[0]
        raise ConversionError(
            f"converted record is invalid at {first.field_path}: {first.message}",
            record.source.source_record_id,
        )
    return record


# ------------------------------------------------------------------ transports


class _FileReader:
    """Reads a whole fixture file; documents are keyed by their id."""

    def __init__(self, source: HarvestSource):
        self.source = source
        path = Path(source.locator)
        if not path.exists():
            raise TransportError(f"source file {source.locator} does not exist")
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as e:
            raise TransportError(f"cannot read {source.locator}: {e}") from None
        self._docs: dict[str, object] = {}
        self._stamps: dict[str, str] = {}
        if source.format == "legacy_xml":
            try:
                root = ET.fromstring(raw)
            except ET.ParseError as e:
                raise TransportError(f"malformed repository XML: {e}") from None
            for element in root.findall("record"):
                rid = element.get("id") or ""
                self._docs[rid] = ET.tostring(element, encoding="unicode")
                self._stamps[rid] = element.get("datestamp") or ""
        else:
            try:
                rows = json.loads(raw)
            except json.JSONDecodeError as e:
                raise TransportError(f"malformed repository JSON: {e}") from None
            if not isinstance(rows, list):
                raise TransportError("repository JSON must be an array")
            for row in rows:
                rid = row.get("id") if isinstance(row, dict) else None
                if isinstance(rid, str):
                    self._docs[rid] = row
                    self._stamps[rid] = str(row.get("datestamp", ""))

    def list(self, since: str | None) -> list[tuple[str, str]]:
        pairs = [
            (rid, stamp)
            for rid, stamp in self._stamps.items()
            if since is None or stamp >= since
        ]
        return sorted(pairs, key=lambda p: (p[1], p[0]))

    def fetch(self, record_id: str):
        if record_id not in self._docs:
            raise NotFound(f"source has no record {record_id!r}")
        return self._docs[record_id]


class _HttpReader:
    """Speaks the list/get protocol: GET {base}/list and {base}/record/{id}."""

    def __init__(self, source: HarvestSource):
        self.source = source
        self.base = source.locator.rstrip("/")

    def _get(self, url: str) -> bytes:
        try:
            with urllib.request.urlopen(url, timeout=HTTP_TIMEOUT) as resp:
                return resp.read()
        except urllib.error.HTTPError as e:
            if e.code == 404:
                raise NotFound(f"source returned 404 for {url}") from None
            raise TransportError(f"source returned HTTP {e.code} for {url}") from None
        except (urllib.error.URLError, OSError, TimeoutError) as e:
            raise TransportError(f"cannot reach source: {e}") from None

    def list(self, since: str | None) -> list[tuple[str, str]]:
        url = f"{self.base}/list"
        if since is not None:
            url += "?since=" + urllib.parse.quote(since)
        try:
            body = self._get(url)
        except NotFound:
            # a missing /list endpoint means the repository itself is gone
            raise TransportError(f"source has no list endpoint at {url}") from None
        try:
            rows = json.loads(body)
        except json.JSONDecodeError:
            raise TransportError("source /list returned malformed JSON") from None
        pairs = []
        for row in rows if isinstance(rows, list) else []:
            if isinstance(row, dict) and isinstance(row.get("id"), str):
                pairs.append((row["id"], str(row.get("datestamp", ""))))
        return sorted(pairs, key=lambda p: (p[1], p[0]))

    def fetch(self, record_id: str):
        body = self._get(f"{self.base}/record/{urllib.parse.quote(record_id, safe='')}")
        if self.source.format == "legacy_xml":
            return body.decode("utf-8")
        try:
            return json.loads(body)
        except json.JSONDecodeError:
            raise TransportError(
                f"source returned malformed JSON for record {record_id!r}"
            ) from None


def _reader(source: HarvestSource):
    return _HttpReader(source) if source.is_http else _FileReader(source)


def list_identifiers(source: HarvestSource, since: str | None = None) -> list[tuple[str, str]]:
    """Enumerate (source_record_id, datestamp), ascending by datestamp then id."""
    return _reader(source).list(since)


def get_source_record(source: HarvestSource, record_id: str):
    """Fetch one document in the source's native shape (XML text or dict)."""
    return _reader(source).fetch(record_id)


# ------------------------------------------------------------------- harvester


class Harvester:
    """Registers sources and runs them against one catalogue.

    Runs on the same source are mutually exclusive; distinct sources may
    run concurrently. All writes go through the catalogue's versioned path.
    """

    def __init__(self, catalogue: Catalogue):
        self.catalogue = catalogue
        self._sources: dict[str, HarvestSource] = {}
        self._reports: dict[str, list[HarvestReport]] = {}
        self._run_locks: dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    def add_source(self, source: HarvestSource) -> str:
        with self._lock:
            if source.id in self._sources:
                raise Conflict(f"source {source.id!r} already registered")
            self._sources[source.id] = source
            self._reports[source.id] = []
            self._run_locks[source.id] = threading.Lock()
            return source.id

    def get_source(self, source_id: str) -> HarvestSource:
        with self._lock:
            source = self._sources.get(source_id)
        if source is None:
            raise NotFound(f"no harvest source {source_id!r}")
        return source

    def list_sources(self) -> list[HarvestSource]:
        with self._lock:
            return [self._sources[k] for k in sorted(self._sources)]

    def reports_for(self, source_id: str) -> list[HarvestReport]:
        self.get_source(source_id)
        with self._lock:
            return list(self._reports[source_id])

    def run(self, source_id: str, harvest_time: str | None = None) -> HarvestReport:
        """Enumerate the whole source, creating, updating or skipping records.

        Enumeration is always full: change detection is by content hash, so
        unchanged records cost one comparison and the report's `unchanged`
        count reflects the entire repository. The cursor still records the
        newest datestamp seen and never moves backward.
        """
        source = self.get_source(source_id)
        run_lock = self._run_locks[source_id]
        with run_lock:
            reader = _reader(source)  # transport failure here aborts untouched
            identifiers = reader.list(None)
            added = updated = unchanged = 0
            failed: list[tuple[str, str]] = []
            max_stamp: str | None = None
            for rid, stamp in identifiers:
                if stamp and (max_stamp is None or stamp > max_stamp):
                    max_stamp = stamp
                try:
                    document = reader.fetch(rid)
                    record = convert_legacy(
                        source.format, document, source_id=source.id,
                        harvest_time=harvest_time,
                    )
                except GridError as e:
                    failed.append((rid, e.message))
                    continue
                existing = self.catalogue.find_by_identity(source.id, rid)
                try:
                    if existing is None:
                        self.catalogue.create_record(record)
                        added += 1
                    elif content_fingerprint(existing) == content_fingerprint(record):
                        unchanged += 1
                    else:
                        self.catalogue.update_record(
                            existing.id,
                            record.with_fields(id=existing.id),
                            expected_version=existing.version,
                            admin=True,
                        )
                        updated += 1
                except GridError as e:
                    failed.append((rid, e.message))
            source.cursor = source.cursor.advanced_to(max_stamp)
            report = HarvestReport(
                source_id=source.id,
                enumerated=len(identifiers),
                added=added,
                updated=updated,
                unchanged=unchanged,
                failed=tuple(failed),
                cursor=source.cursor.last_datestamp,
            )
        with self._lock:
            self._reports[source.id].append(report)
        return report
