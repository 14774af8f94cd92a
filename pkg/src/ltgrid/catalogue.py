"""Catalogue: record store with optimistic versioning and faceted search.

Storage is a single append-only log file plus in-memory indexes rebuilt on
start; every committed mutation appends the record's full canonical form, so
replaying the log (last state per id wins) restores the catalogue after a
crash. There is no external database.

Search combines a case-folded substring match over resource_name and
description with facet filters. Facet counts follow the usual faceted-browse
convention: the counts for facet F are computed over the records that match
the text term and every *other* selected facet, so the sidebar shows what
picking each value of F would narrow the result to.

Authorization is thin by design: ``actor`` is an opaque principal id, and
``admin=True`` bypasses ownership checks. Role policy lives in the gateway.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Callable

from .canonical import (
    parse_record,
    read_record_stream,
    record_to_doc,
    write_record_stream,
)
from .errors import (
    AuthorizationError,
    Conflict,
    InputError,
    NotFound,
    StaleVersion,
    ValidationFailed,
)
from .languages import classify_language
from .model import NEXT_STATUS, MetadataRecord, Status, validate_record

LOG_HEADER = "ltgrid-catalogue-log v1"

FACET_NAMES = (
    "kind",
    "service_class",
    "language",
    "language_category",
    "status",
    "function",
    "source",
    "target",
)

MAX_PAGE_LIMIT = 100
DEFAULT_PAGE_LIMIT = 20


class ConformanceRequired(Conflict):
    """Publication blocked: the service has not passed conformance testing."""

    code = "catalogue.conformance"
    reason = "conformance"


@dataclass(frozen=True)
class SearchQuery:
    text: str | None = None
    facets: dict = field(default_factory=dict)  # facet name -> tuple of accepted values
    offset: int = 0
    limit: int = DEFAULT_PAGE_LIMIT

    def __post_init__(self):
        object.__setattr__(self, "facets", {k: tuple(v) for k, v in self.facets.items()})

    @staticmethod
    def parse(doc: dict) -> "SearchQuery":
        if not isinstance(doc, dict):
            raise InputError("search query must be an object")
        unknown = set(doc) - {"text", "facets", "offset", "limit"}
        if unknown:
            raise InputError(f"unknown query field(s): {', '.join(sorted(unknown))}")
        facets = doc.get("facets", {})
        if not isinstance(facets, dict):
            raise InputError("facets must be an object", field_path="facets")
        parsed = {}
        for name, values in facets.items():
            if name not in FACET_NAMES:
                raise InputError(f"unknown facet {name!r}", field_path=f"facets.{name}")
            if isinstance(values, str):
                values = [values]
            if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
                raise InputError("facet values must be strings", field_path=f"facets.{name}")
            if values:
                parsed[name] = tuple(values)
        text = doc.get("text")
        if text is not None and not isinstance(text, str):
            raise InputError("text must be a string", field_path="text")
        offset = doc.get("offset", 0)
        limit = doc.get("limit", DEFAULT_PAGE_LIMIT)
        if not isinstance(offset, int) or isinstance(offset, bool) or offset < 0:
            raise InputError("offset must be a non-negative integer", field_path="offset")
        if not isinstance(limit, int) or isinstance(limit, bool) or not 1 <= limit <= MAX_PAGE_LIMIT:
            raise InputError(f"limit must be in 1..{MAX_PAGE_LIMIT}", field_path="limit")
        return SearchQuery(text=text or None, facets=parsed, offset=offset, limit=limit)


@dataclass
class SearchResult:
    total: int
    hits: list  # record summaries, page slice
    facet_counts: dict  # facet name -> {value: count}
    offset: int
    limit: int

    def to_doc(self) -> dict:
        return {
            "total": self.total,
            "hits": self.hits,
            "facet_counts": self.facet_counts,
            "offset": self.offset,
            "limit": self.limit,
        }


def record_facet_values(record: MetadataRecord) -> dict:
    """The facet values a record contributes, keyed by facet name."""
    values: dict[str, tuple[str, ...]] = {
        "kind": (record.kind.value,),
        "status": (record.status.value,),
    }
    if record.service_class is not None:
        values["service_class"] = (record.service_class.value,)
    if record.function is not None:
        values["function"] = (record.function,)
    langs = []
    cats = set()
    for tag in record.languages:
        if tag.well_formed():
            if tag.code not in langs:
                langs.append(tag.code)
            cats.add(classify_language(tag).value)
    if langs:
        values["language"] = tuple(langs)
        values["language_category"] = tuple(sorted(cats))
    if record.language_pairs:
        values["source"] = tuple(dict.fromkeys(p.source for p in record.language_pairs))
        values["target"] = tuple(dict.fromkeys(p.target for p in record.language_pairs))
    return values


def summarize(record: MetadataRecord) -> dict:
    summary = {
        "id": record.id,
        "kind": record.kind.value,
        "resource_name": record.resource_name,
        "status": record.status.value,
        "languages": [t.code for t in record.languages],
        "version": record.version,
    }
    if record.service_class is not None:
        summary["service_class"] = record.service_class.value
    if record.function is not None:
        summary["function"] = record.function
    if record.description:
        summary["description"] = record.description
    return summary


class Catalogue:
    """Record store backed by an append-log file (or memory when path=None)."""

    def __init__(
        self,
        log_path: str | Path | None = None,
        publish_gate: Callable[[MetadataRecord], tuple[bool, str | None]] | None = None,
    ):
        self._lock = threading.RLock()
        self._records: dict[str, MetadataRecord] = {}
        self._harvest_identity: dict[tuple[str, str], str] = {}
        self._facet_index: dict[str, dict[str, set[str]]] = {name: {} for name in FACET_NAMES}
        self._record_facets: dict[str, dict] = {}
        self._text_blobs: dict[str, str] = {}
        self._next_id = 1
        self.publish_gate = publish_gate
        self._log_path = Path(log_path) if log_path is not None else None
        self._log_fh: IO[bytes] | None = None
        if self._log_path is not None:
            self._replay_log()
            self._log_fh = open(self._log_path, "ab")

    # ------------------------------------------------------------------ log

    def _replay_log(self):
        path = self._log_path
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "wb") as fh:
                fh.write((LOG_HEADER + "\n").encode("utf-8"))
            return
        with open(path, "rb") as fh:
            header = fh.readline().decode("utf-8").rstrip("\n")
            if header != LOG_HEADER:
                raise InputError(f"unsupported catalogue log header {header!r}")
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                    record = parse_record(json.dumps(entry["record"]))
                except (json.JSONDecodeError, KeyError, InputError) as e:
                    raise InputError(f"corrupt catalogue log at line {lineno}: {e}") from None
                self._index_put(record)

    def _append_log(self, record: MetadataRecord):
        if self._log_fh is None:
            return
        entry = {"op": "put", "record": record_to_doc(record)}
        self._log_fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False).encode("utf-8") + b"\n")
        self._log_fh.flush()

    def close(self):
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    # ---------------------------------------------------------------- index

    def _index_put(self, record: MetadataRecord):
        rid = record.id
        old = self._records.get(rid)
        if old is not None:
            for name, values in self._record_facets[rid].items():
                for value in values:
                    bucket = self._facet_index[name].get(value)
                    if bucket is not None:
                        bucket.discard(rid)
                        if not bucket:
                            del self._facet_index[name][value]
            old_identity = old.source.identity
            if old_identity is not None:
                self._harvest_identity.pop(old_identity, None)
        self._records[rid] = record
        facets = record_facet_values(record)
        self._record_facets[rid] = facets
        for name, values in facets.items():
            index = self._facet_index[name]
            for value in values:
                index.setdefault(value, set()).add(rid)
        self._text_blobs[rid] = f"{record.resource_name}\n{record.description}".casefold()
        identity = record.source.identity
        if identity is not None:
            self._harvest_identity[identity] = rid
        if rid.startswith("rec-"):
            try:
                self._next_id = max(self._next_id, int(rid[4:]) + 1)
            except ValueError:
                pass

    def _commit(self, record: MetadataRecord):
        self._index_put(record)
        self._append_log(record)

    # ----------------------------------------------------------------- CRUD

    def _fresh_id(self) -> str:
        while True:
            rid = f"rec-{self._next_id:06d}"
            self._next_id += 1
            if rid not in self._records:
                return rid

    def create_record(self, record: MetadataRecord, actor: str | None = None, admin: bool = False) -> str:
        """Validate and store a new record; returns the assigned id."""
        report = validate_record(record)
        if not report.valid:
            raise ValidationFailed(report)
        with self._lock:
            identity = record.source.identity
            if identity is not None and identity in self._harvest_identity:
                raise Conflict(
                    f"harvested identity {identity[0]}:{identity[1]} already in catalogue "
                    f"(record {self._harvest_identity[identity]})"
                )
            rid = record.id
            if rid is None:
                rid = self._fresh_id()
            elif rid in self._records:
                raise Conflict(f"record id {rid!r} already exists")
            stored = record.with_fields(id=rid, version=1)
            if stored.status is Status.published:
                self._check_publishable(stored)
            self._commit(stored)
            return rid

    def get_record(self, record_id: str) -> MetadataRecord:
        with self._lock:
            record = self._records.get(record_id)
        if record is None:
            raise NotFound(f"no record {record_id!r}")
        return record

    def list_records(self) -> list[MetadataRecord]:
        with self._lock:
            return [self._records[rid] for rid in sorted(self._records)]

    def __len__(self) -> int:
        return len(self._records)

    def find_by_identity(self, source_id: str, source_record_id: str) -> MetadataRecord | None:
        with self._lock:
            rid = self._harvest_identity.get((source_id, source_record_id))
            return self._records.get(rid) if rid else None

    def _check_owner(self, stored: MetadataRecord, actor: str | None, admin: bool):
        if admin or stored.owner is None or actor is None:
            # actor=None marks trusted in-process callers (harvester, CLI
            # operator); the gateway always passes the authenticated subject.
            return
        if actor != stored.owner:
            raise AuthorizationError(
                f"record {stored.id} is owned by {stored.owner!r}", field_path="owner"
            )

    def update_record(
        self,
        record_id: str,
        record: MetadataRecord,
        expected_version: int,
        actor: str | None = None,
        admin: bool = False,
    ) -> int:
        """Optimistic-concurrency update; returns the new version.

        Content fields are replaced wholesale; identity and lifecycle fields
        (id, kind, status, owner, version) are controlled by the catalogue
        and their dedicated operations.
        """
        report = validate_record(record)
        if not report.valid:
            raise ValidationFailed(report)
        with self._lock:
            stored = self._records.get(record_id)
            if stored is None:
                raise NotFound(f"no record {record_id!r}")
            if record.kind is not stored.kind:
                raise InputError(
                    f"kind is immutable (stored {stored.kind.value}, got {record.kind.value})",
                    field_path="kind",
                )
            self._check_owner(stored, actor, admin)
            if stored.version != expected_version:
                raise StaleVersion(
                    f"record {record_id} is at version {stored.version}, caller expected {expected_version}",
                    expected=expected_version,
                    actual=stored.version,
                )
            if record.source.identity != stored.source.identity:
                raise InputError("harvest identity is immutable", field_path="source")
            updated = record.with_fields(
                id=record_id,
                status=stored.status,
                owner=stored.owner,
                version=stored.version + 1,
            )
            self._commit(updated)
            return updated.version

    def transition_status(
        self,
        record_id: str,
        to: Status | str | None = None,
        actor: str | None = None,
        admin: bool = False,
    ) -> Status:
        """Move the lifecycle one step forward (ingested>curated>published)."""
        with self._lock:
            stored = self._records.get(record_id)
            if stored is None:
                raise NotFound(f"no record {record_id!r}")
            self._check_owner(stored, actor, admin)
            next_status = NEXT_STATUS.get(stored.status)
            if to is not None:
                to = Status(to) if not isinstance(to, Status) else to
                if to is not next_status:
                    raise Conflict(
                        f"illegal transition {stored.status.value} -> {to.value}; "
                        "status moves one step forward only"
                    )
            if next_status is None:
                raise Conflict(f"record {record_id} is already {stored.status.value}")
            if next_status is Status.published:
                self._check_publishable(stored)
            self._commit(stored.with_fields(status=next_status, version=stored.version + 1))
            return next_status

    def _check_publishable(self, record: MetadataRecord):
        if record.is_functional_service():
            if self.publish_gate is None:
                raise ConformanceRequired(
                    f"functional service {record.id or record.resource_name!r} has no "
                    "conformance evidence; publication requires a passing conformance report"
                )
            ok, reason = self.publish_gate(record)
            if not ok:
                raise ConformanceRequired(
                    f"publication blocked for {record.id or record.resource_name!r}: {reason}"
                )

    def claim_record(self, principal: str, record_id: str, admin: bool = False) -> None:
        """Assign ownership to a principal; records can be claimed once."""
        with self._lock:
            stored = self._records.get(record_id)
            if stored is None:
                raise NotFound(f"no record {record_id!r}")
            if stored.owner is not None and not admin:
                raise Conflict(f"record {record_id} is already claimed by {stored.owner!r}")
            self._commit(stored.with_fields(owner=principal, version=stored.version + 1))

    # --------------------------------------------------------------- export

    def export_stream(self, fh: IO[bytes]) -> int:
        with self._lock:
            return write_record_stream(fh, (self._records[rid] for rid in sorted(self._records)))

    def import_stream(self, fh: IO[bytes]) -> int:
        """Restore records exactly as exported (status/owner/version kept)."""
        n = 0
        with self._lock:
            for record in read_record_stream(fh):
                report = validate_record(record)
                if not report.valid:
                    raise ValidationFailed(report)
                if record.id is None:
                    record = record.with_fields(id=self._fresh_id())
                if record.id in self._records:
                    raise Conflict(f"record id {record.id!r} already exists")
                identity = record.source.identity
                if identity is not None and identity in self._harvest_identity:
                    raise Conflict(f"harvested identity {identity} already in catalogue")
                self._commit(record)
                n += 1
        return n

    # --------------------------------------------------------------- search

    def _text_match_ids(self, term: str) -> set[str]:
        needle = term.casefold()
        return {rid for rid, blob in self._text_blobs.items() if needle in blob}

    def _facet_ids(self, name: str, values: tuple[str, ...]) -> set[str]:
        index = self._facet_index[name]
        out: set[str] = set()
        for value in values:
            out |= index.get(value, set())
        return out

    def search(self, query: SearchQuery) -> SearchResult:
        """Run a text+facet query; ordering is relevance, then record id."""
        with self._lock:
            text_ids = self._text_match_ids(query.text) if query.text else None
            facet_sets = {name: self._facet_ids(name, values) for name, values in query.facets.items()}

            matched = set(self._records) if text_ids is None else set(text_ids)
            for ids in facet_sets.values():
                matched &= ids

            needle = query.text.casefold() if query.text else None

            def sort_key(rid: str):
                if needle is None:
                    return (0, rid)
                name_hit = needle in self._records[rid].resource_name.casefold()
                return (0 if name_hit else 1, rid)

            ordered = sorted(matched, key=sort_key)
            page = ordered[query.offset : query.offset + query.limit]
            hits = [summarize(self._records[rid]) for rid in page]

            facet_counts: dict[str, dict[str, int]] = {}
            for name in FACET_NAMES:
                base = set(self._records) if text_ids is None else set(text_ids)
                for other, ids in facet_sets.items():
                    if other != name:
                        base &= ids
                counts: dict[str, int] = {}
                for rid in base:
                    for value in self._record_facets[rid].get(name, ()):
                        counts[value] = counts.get(value, 0) + 1
                if counts:
                    facet_counts[name] = dict(sorted(counts.items()))

            return SearchResult(
                total=len(matched),
                hits=hits,
                facet_counts=facet_counts,
                offset=query.offset,
                limit=query.limit,
            )
