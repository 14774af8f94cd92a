"""Cross-checks the indexed search engine against a brute-force scan.

The oracle in oracles.py re-derives facet values straight from each record
and filters with plain loops, sharing no code with the engine. Random
catalogues and random queries must agree on totals, ordering, pagination
and every facet count.
"""

import random

import pytest

from ltgrid.catalogue import Catalogue, SearchQuery
from ltgrid.model import EntityKind, MetadataRecord, ServiceClass, Status

from gen import CODES, FUNCTIONS, WORDS, populate_catalogue
from oracles import brute_force_search

KINDS = [k.value for k in EntityKind]
CLASSES = [c.value for c in ServiceClass]
STATUSES = [s.value for s in Status]
CATEGORIES = ["A", "B", "C", "D"]

FACET_POOLS = {
    "kind": KINDS,
    "service_class": CLASSES,
    "language": CODES,
    "language_category": CATEGORIES,
    "status": STATUSES,
    "function": FUNCTIONS,
    "source": CODES,
    "target": CODES,
}


def random_query_doc(rng: random.Random) -> dict:
    doc: dict = {}
    if rng.random() < 0.45:
        term = rng.choice(WORDS)
        # exercise case folding on both sides
        doc["text"] = term.upper() if rng.random() < 0.3 else term
    facets = {}
    for name in rng.sample(list(FACET_POOLS), rng.randint(0, 3)):
        pool = FACET_POOLS[name]
        facets[name] = rng.sample(pool, min(len(pool), rng.randint(1, 2)))
    if facets:
        doc["facets"] = facets
    if rng.random() < 0.3:
        doc["offset"] = rng.randint(0, 40)
    if rng.random() < 0.5:
        doc["limit"] = rng.choice([5, 10, 50, 100])
    return doc


def assert_engine_matches_oracle(cat: Catalogue, doc: dict):
    query = SearchQuery.parse(doc)
    got = cat.search(query)
    want = brute_force_search(
        cat.list_records(),
        text=query.text,
        facets=dict(query.facets),
        offset=query.offset,
        limit=query.limit,
    )
    assert got.total == want["total"], f"total mismatch for {doc}"
    assert [h["id"] for h in got.hits] == want["hit_ids"], f"ordering mismatch for {doc}"
    assert got.facet_counts == want["facet_counts"], f"facet counts mismatch for {doc}"


def test_engine_agrees_with_brute_force_on_random_queries():
    rng = random.Random(20260816)
    cat = Catalogue(publish_gate=lambda r: (True, None))
    populate_catalogue(cat, rng, 800)
    for _ in range(80):
        assert_engine_matches_oracle(cat, random_query_doc(rng))


def test_engine_agrees_after_updates_and_transitions():
    rng = random.Random(99)
    cat = Catalogue(publish_gate=lambda r: (True, None))
    populate_catalogue(cat, rng, 150)
    # churn: claims, updates and transitions must keep the index honest
    ids = [r.id for r in cat.list_records()]
    for rid in rng.sample(ids, 40):
        rec = cat.get_record(rid)
        try:
            cat.update_record(
                rid,
                rec.with_fields(description=rec.description + " updated"),
                expected_version=rec.version,
            )
        except Exception:
            pass
    for rid in rng.sample(ids, 30):
        try:
            cat.transition_status(rid)
        except Exception:
            pass
    for _ in range(40):
        assert_engine_matches_oracle(cat, random_query_doc(rng))


def test_empty_catalogue():
    cat = Catalogue()
    result = cat.search(SearchQuery.parse({"text": "anything"}))
    assert result.total == 0
    assert result.hits == []
    assert result.facet_counts == {}


class TestHandBuiltSemantics:
    """A tiny fixed catalogue where every expected number is computed by hand."""

    @pytest.fixture()
    def cat(self):
        cat = Catalogue()
        cat.create_record(
            MetadataRecord(
                kind=EntityKind.Corpus,
                resource_name="Weather corpus",
                description="Broadcast weather reports in Latvian.",
                languages=("lv",),
                licence_ref="CC0-1.0",
            )
        )
        cat.create_record(
            MetadataRecord(
                kind=EntityKind.Corpus,
                resource_name="Parliament corpus",
                description="Weather never comes up, oddly.",
                languages=("en", "de"),
                licence_ref="CC0-1.0",
            )
        )
        cat.create_record(
            MetadataRecord(
                kind=EntityKind.ToolService,
                resource_name="Weather tagger",
                description="Tags weather phenomena.",
                languages=("en",),
                function="Named entity recognition",
                service_class=ServiceClass.IE,
                licence_ref="CC0-1.0",
            )
        )
        return cat

    def test_text_scoring_name_before_description(self, cat):
        result = cat.search(SearchQuery.parse({"text": "weather"}))
        assert result.total == 3
        # name matches first (by id), then the description-only match
        assert [h["id"] for h in result.hits] == ["rec-000001", "rec-000003", "rec-000002"]

    def test_facet_counts_ignore_their_own_filter(self, cat):
        result = cat.search(SearchQuery.parse({"facets": {"kind": ["Corpus"]}}))
        assert result.total == 2
        # kind counts are computed without the kind filter itself
        assert result.facet_counts["kind"] == {"Corpus": 2, "ToolService": 1}
        # other facets are narrowed by the kind filter
        assert result.facet_counts["language"] == {"de": 1, "en": 1, "lv": 1}
        assert "service_class" not in result.facet_counts

    def test_multi_value_facet_is_a_union(self, cat):
        result = cat.search(
            SearchQuery.parse({"facets": {"language": ["lv", "de"]}})
        )
        assert result.total == 2

    def test_facets_and_text_combine(self, cat):
        result = cat.search(
            SearchQuery.parse({"text": "weather", "facets": {"kind": ["ToolService"]}})
        )
        assert result.total == 1
        assert result.hits[0]["id"] == "rec-000003"
        assert result.facet_counts["kind"] == {"Corpus": 2, "ToolService": 1}

    def test_language_category_facet(self, cat):
        # all three records carry only EU-official languages
        assert cat.search(SearchQuery.parse({"facets": {"language_category": ["A"]}})).total == 3
        assert cat.search(SearchQuery.parse({"facets": {"language_category": ["D"]}})).total == 0
