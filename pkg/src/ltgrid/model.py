"""Catalogue entity model and metadata validation.

The catalogue describes every entity the grid knows about - runnable tools
and services, data resources, and the actors, projects, documents and
licences around them - with one record type. The full upstream schema runs to
hundreds of elements; here only a deliberately small mandatory subset is
enforced so that minimal records can be imported and enriched later:

* every record needs a kind and a non-empty ``resource_name``,
* data resources (corpora, language descriptions, lexical/conceptual
  resources) need at least one language,
* functional tools/services (those declaring an executable ``function``)
  need a ``service_class`` so the orchestrator can route them.

Everything else - licence, description, relations - is recommended and at
most produces warnings. Records are immutable values; mutation happens by
building a new record (see :func:`dataclasses.replace`) and writing it
through the catalogue's versioned update path.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

from .languages import LanguageTag, classify_language, is_listed


class EntityKind(str, Enum):
    """The entity types a catalogue record can describe."""

    ToolService = "ToolService"
    Corpus = "Corpus"
    LanguageDescription = "LanguageDescription"
    LexicalConceptualResource = "LexicalConceptualResource"
    Organization = "Organization"
    Person = "Person"
    Project = "Project"
    Document = "Document"
    Licence = "Licence"


#: Kinds that describe data rather than runnable software.
DATA_RESOURCE_KINDS = frozenset(
    {EntityKind.Corpus, EntityKind.LanguageDescription, EntityKind.LexicalConceptualResource}
)


class ServiceClass(str, Enum):
    """Broad functional classes a runnable service is routed by."""

    MT = "MT"
    IE = "IE"
    ASR = "ASR"
    TTS = "TTS"
    Classification = "Classification"


class Status(str, Enum):
    """Record lifecycle; transitions move one step forward only."""

    ingested = "ingested"
    curated = "curated"
    published = "published"


#: Allowed one-step lifecycle transitions.
NEXT_STATUS = {Status.ingested: Status.curated, Status.curated: Status.published}


# Controlled vocabulary of service functions. Only a handful are executable
# as built-in samples; the rest exist so records can be described and faceted.
FUNCTION_VOCABULARY = frozenset(
    {
        "Speech recognition",
        "Terminology search",
        "Term recognition",
        "Part of speech tagging",
        "Dependency parsing",
        "Terminology markup",
        "Lemmatisation",
        "Morphological analyser",
        "Tokenization",
        "Language identification",
        "Named entity recognition",
        "Keyword extraction",
        "Sentiment analysis",
        "Summarization",
        "Key phrase extraction",
        "Polarity detection",
        "Categorization",
        "Sentence splitting",
        "NER disambiguation",
        "Information extraction",
        "Textual entailment",
        "Number annotation",
        "Time annotation",
        "Date detection",
        "Proofing tools",
        "Entity linking",
        "Text extraction",
        "Measurement annotation",
        "Negation detection",
        "Relation extraction",
        "Measurement normalisation",
        "Opinion mining",
        "Parsing",
        "Noun phrase extraction",
        "Number normalisation",
        "Intent extraction",
        "Word segmentation",
        "Multiword detection",
        "Prepositional phrase attachment",
        "Tagging",
        "Mention detection",
        "Quantity detection",
        "Transliteration",
        "Language modeling",
        "Coreference resolution",
        "Relationship extraction",
        "Collocation extraction",
        "Semantic reasoning",
        "Anaphora resolution",
        "Semantic role labeling",
        "Constituency parsing",
        "N-grams",
        "Phonetic encoding",
        "Idiom extraction",
        "Word frequencies",
        "Shallow parsing",
        "Word sense disambiguation",
        "Stemming",
        "Noun phrase frequencies",
        "Open information extraction",
        "Machine translation",
        "Text to speech",
        "Web crawler",
        "Text indexing",
        "Pipeline",
    }
)


@dataclass(frozen=True)
class Provenance:
    """Where a record came from: created natively or harvested upstream."""

    type: str = "native"  # "native" | "harvested"
    source_id: str | None = None
    source_record_id: str | None = None
    harvest_time: str | None = None  # RFC 3339

    @staticmethod
    def native() -> "Provenance":
        return Provenance(type="native")

    @staticmethod
    def harvested(source_id: str, source_record_id: str, harvest_time: str | None = None) -> "Provenance":
        return Provenance(
            type="harvested",
            source_id=source_id,
            source_record_id=source_record_id,
            harvest_time=harvest_time,
        )

    @property
    def identity(self) -> tuple[str, str] | None:
        """The catalogue-wide unique (source_id, source_record_id) pair."""
        if self.type == "harvested" and self.source_id and self.source_record_id:
            return (self.source_id, self.source_record_id)
        return None


@dataclass(frozen=True)
class LanguagePair:
    """Directional source->target pair for translation-style services."""

    source: str
    target: str


@dataclass(frozen=True)
class Relation:
    name: str
    target: str  # record id


def _tags(values: Iterable) -> tuple[LanguageTag, ...]:
    out = []
    for v in values:
        out.append(v if isinstance(v, LanguageTag) else LanguageTag(code=str(v)))
    return tuple(out)


@dataclass(frozen=True)
class MetadataRecord:
    """One catalogue entry. Immutable; copy-and-replace to modify."""

    kind: EntityKind
    resource_name: str
    id: str | None = None
    description: str = ""
    languages: tuple[LanguageTag, ...] = ()
    language_pairs: tuple[LanguagePair, ...] = ()
    function: str | None = None
    service_class: ServiceClass | None = None
    licence_ref: str | None = None
    source: Provenance = field(default_factory=Provenance.native)
    status: Status = Status.ingested
    owner: str | None = None
    version: int = 1
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        # Coerce convenience inputs (lists, bare code strings) into the
        # canonical immutable shape so equality and hashing behave.
        object.__setattr__(self, "languages", _tags(self.languages))
        object.__setattr__(self, "language_pairs", tuple(self.language_pairs))
        object.__setattr__(self, "relations", tuple(self.relations))

    def is_functional_service(self) -> bool:
        """A tool/service meant to run behind the grid's execution API.

        Functional means the record declares an executable ``function``; a
        bare ToolService without one describes downloadable software.
        """
        return self.kind is EntityKind.ToolService and self.function is not None

    def with_fields(self, **changes) -> "MetadataRecord":
        return replace(self, **changes)


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    field_path: str
    message: str

    def to_doc(self) -> dict:
        return {"severity": self.severity, "field_path": self.field_path, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @property
    def valid(self) -> bool:
        return all(i.severity != "error" for i in self.issues)

    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    def to_doc(self) -> dict:
        return {"valid": self.valid, "issues": [i.to_doc() for i in self.issues]}


def validate_record(record: MetadataRecord) -> ValidationReport:
    """Check a structurally parsed record against the mandatory subset.

    Validation failures are report content, not exceptions: the report lists
    every violated mandatory constraint with its field path, plus warnings
    for recommended-but-missing fields.
    """
    issues: list[Issue] = []

    def err(path: str, msg: str):
        issues.append(Issue("error", path, msg))

    def warn(path: str, msg: str):
        issues.append(Issue("warning", path, msg))

    if not record.resource_name.strip():
        err("resource_name", "resource_name must be non-empty")

    for i, tag in enumerate(record.languages):
        if not tag.well_formed():
            err(f"languages[{i}].code", f"malformed language code {tag.code!r}")
        elif not is_listed(tag.code):
            warn(
                f"languages[{i}].code",
                f"language {tag.code!r} is not in the bundled category table; treated as category D",
            )

    if record.kind in DATA_RESOURCE_KINDS and not record.languages:
        err("languages", f"{record.kind.value} records need at least one language")

    if record.function is not None:
        if record.kind is not EntityKind.ToolService:
            err("function", "function applies to ToolService records only")
        elif record.function not in FUNCTION_VOCABULARY:
            err("function", f"unknown function {record.function!r}")

    if record.service_class is not None and record.kind is not EntityKind.ToolService:
        err("service_class", "service_class applies to ToolService records only")

    if record.is_functional_service() and record.service_class is None:
        err("service_class", "functional services must declare a service_class for routing")

    if record.language_pairs and record.kind is not EntityKind.ToolService:
        err("language_pairs", "language_pairs apply to ToolService records only")
    for i, pair in enumerate(record.language_pairs):
        for side in ("source", "target"):
            code = getattr(pair, side)
            if not LanguageTag(code).well_formed():
                err(f"language_pairs[{i}].{side}", f"malformed language code {code!r}")

    if record.source.type == "harvested":
        if not record.source.source_id:
            err("source.source_id", "harvested records must name their source")
        if not record.source.source_record_id:
            err("source.source_record_id", "harvested records must carry the source record id")
    elif record.source.type != "native":
        err("source.type", f"unknown provenance type {record.source.type!r}")

    if record.version < 1:
        err("version", "version starts at 1")

    if record.licence_ref is None:
        warn("licence_ref", "no licence or terms of use given")
    if not record.description.strip():
        warn("description", "description is recommended for discoverability")

    return ValidationReport(issues=tuple(issues))


def classify_record_languages(record: MetadataRecord) -> set[str]:
    """Category letters (A-D) covered by the record's well-formed tags."""
    out = set()
    for tag in record.languages:
        if tag.well_formed():
            out.add(classify_language(tag).value)
    return out
