"""Canonical byte form for catalogue records.

One record per UTF-8 JSON document with lexicographically sorted keys and no
insignificant whitespace, so structurally equal records serialize to
byte-identical output and fixtures diff cleanly. Optional fields are omitted
when empty. The format is documented in docs/record-format.md; streams of
records (export/import) are line-delimited with a versioned header.
"""

from __future__ import annotations

import hashlib
import json
from typing import IO, Iterable, Iterator

from .errors import InputError
from .languages import LanguageTag
from .model import (
    EntityKind,
    LanguagePair,
    MetadataRecord,
    Provenance,
    Relation,
    ServiceClass,
    Status,
)

STREAM_HEADER = "ltgrid-records v1"


def canonical_json_bytes(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def record_to_doc(record: MetadataRecord) -> dict:
    doc: dict = {
        "kind": record.kind.value,
        "resource_name": record.resource_name,
        "source": _provenance_to_doc(record.source),
        "status": record.status.value,
        "version": record.version,
    }
    if record.id is not None:
        doc["id"] = record.id
    if record.description:
        doc["description"] = record.description
    if record.languages:
        doc["languages"] = [_tag_to_doc(t) for t in record.languages]
    if record.language_pairs:
        doc["language_pairs"] = [{"source": p.source, "target": p.target} for p in record.language_pairs]
    if record.function is not None:
        doc["function"] = record.function
    if record.service_class is not None:
        doc["service_class"] = record.service_class.value
    if record.licence_ref is not None:
        doc["licence_ref"] = record.licence_ref
    if record.owner is not None:
        doc["owner"] = record.owner
    if record.relations:
        doc["relations"] = [{"name": r.name, "target": r.target} for r in record.relations]
    return doc


def _tag_to_doc(tag: LanguageTag) -> dict:
    doc = {"code": tag.code}
    if tag.display_name is not None:
        doc["display_name"] = tag.display_name
    return doc


def _provenance_to_doc(p: Provenance) -> dict:
    if p.type == "native":
        return {"type": "native"}
    doc = {"type": p.type, "source_id": p.source_id, "source_record_id": p.source_record_id}
    if p.harvest_time is not None:
        doc["harvest_time"] = p.harvest_time
    return doc


def serialize_record(record: MetadataRecord) -> bytes:
    return canonical_json_bytes(record_to_doc(record))


_TOP_KEYS = {
    "id", "kind", "resource_name", "description", "languages", "language_pairs",
    "function", "service_class", "licence_ref", "source", "status", "owner",
    "version", "relations",
}


def _expect(doc, key, types, path, default=None, required=False):
    if key not in doc:
        if required:
            raise InputError(f"missing required field", field_path=f"{path}{key}")
        return default
    value = doc[key]
    if not isinstance(value, types):
        raise InputError(
            f"expected {getattr(types, '__name__', types)}, got {type(value).__name__}",
            field_path=f"{path}{key}",
        )
    return value


def doc_to_record(doc, path: str = "$.") -> MetadataRecord:
    if not isinstance(doc, dict):
        raise InputError("record document must be a JSON object", field_path=path.rstrip("."))
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise InputError(f"unknown field(s): {', '.join(sorted(unknown))}", field_path=f"{path}{sorted(unknown)[0]}")

    kind_raw = _expect(doc, "kind", str, path, required=True)
    try:
        kind = EntityKind(kind_raw)
    except ValueError:
        raise InputError(f"unknown entity kind {kind_raw!r}", field_path=f"{path}kind") from None

    status_raw = _expect(doc, "status", str, path, default=Status.ingested.value)
    try:
        status = Status(status_raw)
    except ValueError:
        raise InputError(f"unknown status {status_raw!r}", field_path=f"{path}status") from None

    sc_raw = _expect(doc, "service_class", str, path)
    service_class = None
    if sc_raw is not None:
        try:
            service_class = ServiceClass(sc_raw)
        except ValueError:
            raise InputError(f"unknown service class {sc_raw!r}", field_path=f"{path}service_class") from None

    languages = []
    for i, item in enumerate(_expect(doc, "languages", list, path, default=[])):
        lpath = f"{path}languages[{i}]."
        if isinstance(item, str):  # bare-code shorthand accepted on input
            languages.append(LanguageTag(code=item))
            continue
        if not isinstance(item, dict):
            raise InputError("language entry must be an object or code string", field_path=lpath.rstrip("."))
        code = _expect(item, "code", str, lpath, required=True)
        languages.append(LanguageTag(code=code, display_name=_expect(item, "display_name", str, lpath)))

    pairs = []
    for i, item in enumerate(_expect(doc, "language_pairs", list, path, default=[])):
        ppath = f"{path}language_pairs[{i}]."
        if not isinstance(item, dict):
            raise InputError("language pair must be an object", field_path=ppath.rstrip("."))
        pairs.append(
            LanguagePair(
                source=_expect(item, "source", str, ppath, required=True),
                target=_expect(item, "target", str, ppath, required=True),
            )
        )

    relations = []
    for i, item in enumerate(_expect(doc, "relations", list, path, default=[])):
        rpath = f"{path}relations[{i}]."
        if not isinstance(item, dict):
            raise InputError("relation must be an object", field_path=rpath.rstrip("."))
        relations.append(
            Relation(
                name=_expect(item, "name", str, rpath, required=True),
                target=_expect(item, "target", str, rpath, required=True),
            )
        )

    source_doc = _expect(doc, "source", dict, path, default={"type": "native"})
    spath = f"{path}source."
    stype = _expect(source_doc, "type", str, spath, required=True)
    if stype == "native":
        source = Provenance.native()
    elif stype == "harvested":
        source = Provenance.harvested(
            source_id=_expect(source_doc, "source_id", str, spath, required=True),
            source_record_id=_expect(source_doc, "source_record_id", str, spath, required=True),
            harvest_time=_expect(source_doc, "harvest_time", str, spath),
        )
    else:
        raise InputError(f"unknown provenance type {stype!r}", field_path=f"{path}source.type")

    version = _expect(doc, "version", int, path, default=1)
    if isinstance(version, bool):
        raise InputError("expected int, got bool", field_path=f"{path}version")

    return MetadataRecord(
        id=_expect(doc, "id", str, path),
        kind=kind,
        resource_name=_expect(doc, "resource_name", str, path, required=True),
        description=_expect(doc, "description", str, path, default=""),
        languages=tuple(languages),
        language_pairs=tuple(pairs),
        function=_expect(doc, "function", str, path),
        service_class=service_class,
        licence_ref=_expect(doc, "licence_ref", str, path),
        source=source,
        status=status,
        owner=_expect(doc, "owner", str, path),
        version=version,
        relations=tuple(relations),
    )


def parse_record(data: bytes | str) -> MetadataRecord:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InputError(f"record document is not valid UTF-8: {e}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return doc_to_record(doc)


#: Fields excluded from the content fingerprint: they change on the catalogue
#: side (id, version, lifecycle, ownership) or per harvest run (harvest_time)
#: without the upstream document having changed.
_VOLATILE = ("id", "version", "status", "owner")


def content_fingerprint(record: MetadataRecord) -> str:
    """Hash of the record's content fields, for harvest change detection."""
    doc = record_to_doc(record)
    for key in _VOLATILE:
        doc.pop(key, None)
    if doc.get("source", {}).get("type") == "harvested":
        doc["source"].pop("harvest_time", None)
    return hashlib.sha256(canonical_json_bytes(doc)).hexdigest()


def write_record_stream(fh: IO[bytes], records: Iterable[MetadataRecord]) -> int:
    """Write a versioned record-stream file; returns the record count."""
    fh.write((STREAM_HEADER + "\n").encode("utf-8"))
    n = 0
    for record in records:
        fh.write(serialize_record(record) + b"\n")
        n += 1
    return n


def read_record_stream(fh: IO[bytes]) -> Iterator[MetadataRecord]:
    header = fh.readline().decode("utf-8").rstrip("\n")
    if header != STREAM_HEADER:
        raise InputError(f"unsupported record stream header {header!r}")
    for lineno, line in enumerate(fh, start=2):
        line = line.strip()
        if not line:
            continue
        try:
            yield parse_record(line)
        except InputError as e:
            raise InputError(f"line {lineno}: {e.message}", field_path=e.field_path) from None
