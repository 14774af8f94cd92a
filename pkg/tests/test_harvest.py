import json
import shutil
import threading
from pathlib import Path

import pytest

from ltgrid.catalogue import Catalogue, SearchQuery
from ltgrid.errors import Conflict, InputError, NotFound, TransportError
from ltgrid.fixture_server import FixtureRepoServer, bundled_fixture_dir, file_source
from ltgrid.harvest import (
    ConversionError,
    Harvester,
    HarvestCursor,
    HarvestSource,
    convert_legacy,
    get_source_record,
    list_identifiers,
)
from ltgrid.model import EntityKind, Status

XML_CORPUS = """
<record id="X-1" datestamp="2019-01-01T00:00:00Z">
  <resourceType>corpus</resourceType>
  <resourceName>Weather bulletins</resourceName>
  <description>Short-form weather reports.</description>
  <licence>CC0-1.0</licence>
  <language>de</language>
</record>
"""


def check_conservation(report):
    assert report.added + report.updated + report.unchanged + len(report.failed) \
        == report.enumerated


def facet_count(cat, facet, value):
    result = cat.search(SearchQuery.parse({"limit": 1}))
    return result.facet_counts[facet].get(value, 0)


class TestConverters:
    def test_xml_corpus_maps_to_corpus(self):
        record = convert_legacy("legacy_xml", XML_CORPUS, source_id="elra")
        assert record.kind is EntityKind.Corpus
        assert record.resource_name == "Weather bulletins"
        assert record.source.type == "harvested"
        assert record.source.identity == ("elra", "X-1")
        assert [t.code for t in record.languages] == ["de"]
        assert record.licence_ref == "CC0-1.0"

    def test_json_model_maps_to_language_description(self):
        record = convert_legacy(
            "legacy_json",
            {"id": "m-9", "resourceType": "model", "resourceName": "Tagger model",
             "languages": ["fi"]},
            source_id="metashare",
        )
        assert record.kind is EntityKind.LanguageDescription

    def test_json_tool_maps_to_tool_service(self):
        record = convert_legacy(
            "legacy_json",
            {"id": "t-1", "resourceType": "tool", "resourceName": "Old tagger",
             "languages": ["et"], "function": "Tokenization", "serviceClass": "IE"},
            source_id="legacy",
        )
        assert record.kind is EntityKind.ToolService
        assert record.function == "Tokenization"
        assert record.service_class is not None

    def test_missing_name_is_a_conversion_error(self):
        doc = {"id": "n-1", "resourceType": "corpus", "languages": ["de"]}
        with pytest.raises(ConversionError, match="resourceName"):
            convert_legacy("legacy_json", doc, source_id="s")

    def test_unmappable_resource_type(self):
        doc = {"id": "u-1", "resourceType": "hologram", "resourceName": "X",
               "languages": ["de"]}
        with pytest.raises(ConversionError, match="hologram"):
            convert_legacy("legacy_json", doc, source_id="s")

    def test_malformed_xml(self):
        with pytest.raises(ConversionError, match="malformed XML"):
            convert_legacy("legacy_xml", "<record id='a'>", source_id="s")

    def test_unknown_format(self):
        with pytest.raises(InputError):
            convert_legacy("legacy_yaml", {}, source_id="s")

    def test_invalid_converted_record_is_reported(self):
        # corpora need at least one language, so conversion must refuse this
        doc = {"id": "e-1", "resourceType": "corpus", "resourceName": "No languages"}
        with pytest.raises(ConversionError, match="languages"):
            convert_legacy("legacy_json", doc, source_id="s")

    def test_native_wraps_record_doc(self):
        doc = {
            "id": "svc-55",
            "datestamp": "2020-01-01T00:00:00Z",
            "record": {"kind": "ToolService", "resource_name": "Wrapped service",
                       "languages": ["en"], "function": "Tokenization",
                       "service_class": "IE"},
        }
        record = convert_legacy("native", doc, source_id="release1alpha")
        assert record.source.identity == ("release1alpha", "svc-55")
        assert record.id is None

    def test_every_bundled_document_converts(self):
        for name in ("elra", "elrc_share", "metashare", "release1alpha"):
            source = file_source(name)
            for rid, _stamp in list_identifiers(source):
                document = get_source_record(source, rid)
                record = convert_legacy(source.format, document, source_id=name)
                assert record.source.identity == (name, rid)


class TestListGet:
    def test_metashare_enumerates_71(self):
        assert len(list_identifiers(file_source("metashare"))) == 71

    def test_order_is_datestamp_then_id(self):
        pairs = list_identifiers(file_source("elrc_share"))
        assert pairs == sorted(pairs, key=lambda p: (p[1], p[0]))

    def test_since_filters_inclusively(self):
        source = file_source("elra")
        pairs = list_identifiers(source)
        cutoff = pairs[10][1]
        later = list_identifiers(source, since=cutoff)
        assert all(stamp >= cutoff for _rid, stamp in later)
        assert (pairs[10][0], cutoff) in later

    def test_since_past_the_end_is_empty(self):
        source = file_source("elra")
        last = list_identifiers(source)[-1][1]
        assert list_identifiers(source, since=last + "z") == []

    def test_get_unknown_record(self):
        with pytest.raises(NotFound):
            get_source_record(file_source("elra"), "ELRA-C9999")

    def test_missing_file_is_a_transport_error(self):
        source = HarvestSource(id="gone", format="legacy_xml", locator="/no/such/file.xml")
        with pytest.raises(TransportError):
            list_identifiers(source)


class TestSourceModel:
    def test_source_doc_round_trip(self):
        source = HarvestSource(id="elra", format="legacy_xml", locator="/tmp/elra.xml",
                               cursor=HarvestCursor("2019-06-01T00:00:00Z"))
        again = HarvestSource.from_doc(source.to_doc())
        assert again.id == source.id
        assert again.cursor == source.cursor

    @pytest.mark.parametrize("doc", [
        {"id": "x", "format": "csv", "locator": "/tmp/x"},
        {"id": "", "format": "native", "locator": "/tmp/x"},
        {"id": "x", "format": "native", "locator": "/tmp/x", "mode": "fast"},
        {"id": "x", "format": "native"},
    ])
    def test_bad_source_docs_rejected(self, doc):
        with pytest.raises(InputError):
            HarvestSource.from_doc(doc)

    def test_cursor_never_moves_backward(self):
        cursor = HarvestCursor("2020-01-01T00:00:00Z")
        assert cursor.advanced_to("2019-01-01T00:00:00Z") == cursor
        assert cursor.advanced_to(None) == cursor
        assert cursor.advanced_to("2021-01-01T00:00:00Z").last_datestamp \
            == "2021-01-01T00:00:00Z"


class TestRunHarvest:
    def test_elra_counts(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("elra"))
        report = harvester.run("elra")
        check_conservation(report)
        assert report.added == 22
        assert report.failed == ()
        assert facet_count(cat, "kind", "Corpus") == 20
        assert facet_count(cat, "kind", "LexicalConceptualResource") == 2

    def test_elrc_share_counts_and_rerun(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("elrc_share"))
        first = harvester.run("elrc_share")
        check_conservation(first)
        assert first.added == 187
        assert facet_count(cat, "kind", "Corpus") == 180
        assert facet_count(cat, "kind", "LexicalConceptualResource") == 7
        second = harvester.run("elrc_share")
        check_conservation(second)
        assert (second.added, second.updated, second.unchanged) == (0, 0, 187)
        assert len(cat) == 187

    def test_metashare_counts(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("metashare"))
        report = harvester.run("metashare")
        assert report.added == 71
        assert facet_count(cat, "kind", "Corpus") == 52
        assert facet_count(cat, "kind", "LexicalConceptualResource") == 12
        assert facet_count(cat, "kind", "LanguageDescription") == 7

    def test_release1alpha_service_facets(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("release1alpha"))
        report = harvester.run("release1alpha")
        assert report.added == 172
        counts = cat.search(SearchQuery.parse({"limit": 1})).facet_counts["service_class"]
        assert counts == {"ASR": 9, "Classification": 2, "IE": 133, "MT": 24, "TTS": 4}

    def test_release1alpha_mt_pairs(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("release1alpha"))
        harvester.run("release1alpha")
        for source, target, expected in (("en", "lv", 3), ("no", "en", 2), ("en", "hi", 1)):
            result = cat.search(SearchQuery.parse(
                {"facets": {"source": source, "target": target}}
            ))
            assert result.total == expected, (source, target)

    def test_cursor_tracks_max_datestamp(self):
        harvester = Harvester(Catalogue())
        source = file_source("elra")
        harvester.add_source(source)
        harvester.run("elra")
        stamps = [s for _i, s in list_identifiers(file_source("elra"))]
        assert source.cursor.last_datestamp == max(stamps)
        harvester.run("elra")
        assert source.cursor.last_datestamp == max(stamps)

    def test_provenance_resolves_back_to_source(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("elra"))
        harvester.run("elra")
        source = file_source("elra")
        for record in cat.list_records():
            sid, rid = record.source.identity
            assert sid == "elra"
            assert get_source_record(source, rid) is not None

    def test_unknown_source(self):
        with pytest.raises(NotFound):
            Harvester(Catalogue()).run("nope")

    def test_duplicate_source_rejected(self):
        harvester = Harvester(Catalogue())
        harvester.add_source(file_source("elra"))
        with pytest.raises(Conflict):
            harvester.add_source(file_source("elra"))

    def test_reports_history_kept(self):
        harvester = Harvester(Catalogue())
        harvester.add_source(file_source("elra"))
        harvester.run("elra")
        harvester.run("elra")
        reports = harvester.reports_for("elra")
        assert [r.added for r in reports] == [22, 0]


class TestChangeDetection:
    def make_mutable_copy(self, tmp_path):
        rows = json.loads(
            (bundled_fixture_dir() / "elrc_share.json").read_text(encoding="utf-8")
        )
        path = tmp_path / "repo.json"
        path.write_text(json.dumps(rows), encoding="utf-8")
        return path, rows

    def test_changed_document_updates_in_place(self, tmp_path):
        path, rows = self.make_mutable_copy(tmp_path)
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(HarvestSource(id="elrc", format="legacy_json",
                                           locator=str(path)))
        harvester.run("elrc")
        before = cat.find_by_identity("elrc", rows[0]["id"])

        rows[0]["description"] = "Rewritten upstream description."
        path.write_text(json.dumps(rows), encoding="utf-8")
        report = harvester.run("elrc")
        check_conservation(report)
        assert (report.added, report.updated, report.unchanged) == (0, 1, 186)

        after = cat.find_by_identity("elrc", rows[0]["id"])
        assert after.id == before.id  # same catalogue record, new content
        assert after.version == before.version + 1
        assert after.description == "Rewritten upstream description."
        assert len(cat) == 187

    def test_update_survives_lifecycle_progress(self, tmp_path):
        path, rows = self.make_mutable_copy(tmp_path)
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(HarvestSource(id="elrc", format="legacy_json",
                                           locator=str(path)))
        harvester.run("elrc")
        record = cat.find_by_identity("elrc", rows[0]["id"])
        cat.transition_status(record.id, admin=True)
        cat.claim_record("curator-1", record.id)

        rows[0]["resourceName"] = "Renamed upstream"
        path.write_text(json.dumps(rows), encoding="utf-8")
        report = harvester.run("elrc")
        assert report.updated == 1
        after = cat.get_record(record.id)
        assert after.resource_name == "Renamed upstream"
        assert after.status is Status.curated  # lifecycle is catalogue-owned
        assert after.owner == "curator-1"

    def test_per_record_failures_do_not_abort(self, tmp_path):
        path, rows = self.make_mutable_copy(tmp_path)
        del rows[3]["resourceName"]
        rows[7]["resourceType"] = "hologram"
        path.write_text(json.dumps(rows), encoding="utf-8")
        harvester = Harvester(Catalogue())
        harvester.add_source(HarvestSource(id="elrc", format="legacy_json",
                                           locator=str(path)))
        report = harvester.run("elrc")
        check_conservation(report)
        assert report.added == 185
        assert len(report.failed) == 2
        reasons = {rid: reason for rid, reason in report.failed}
        assert rows[3]["id"] in reasons and "resourceName" in reasons[rows[3]["id"]]
        assert rows[7]["id"] in reasons and "hologram" in reasons[rows[7]["id"]]

    def test_transport_failure_leaves_cursor_alone(self, tmp_path):
        path, _rows = self.make_mutable_copy(tmp_path)
        harvester = Harvester(Catalogue())
        source = HarvestSource(id="elrc", format="legacy_json", locator=str(path))
        harvester.add_source(source)
        harvester.run("elrc")
        cursor_before = source.cursor
        path.write_text("{corrupt", encoding="utf-8")
        with pytest.raises(TransportError):
            harvester.run("elrc")
        assert source.cursor == cursor_before

    def test_new_record_with_old_datestamp_still_added(self, tmp_path):
        path, rows = self.make_mutable_copy(tmp_path)
        harvester = Harvester(Catalogue())
        source = HarvestSource(id="elrc", format="legacy_json", locator=str(path))
        harvester.add_source(source)
        harvester.run("elrc")
        cursor_before = source.cursor.last_datestamp

        rows.append({"id": "elrc-backfill", "datestamp": "2018-01-01T00:00:00Z",
                     "resourceType": "corpus", "resourceName": "Backfilled corpus",
                     "languages": ["de"], "licence": "CC0-1.0"})
        path.write_text(json.dumps(rows), encoding="utf-8")
        report = harvester.run("elrc")
        assert report.added == 1  # full enumeration catches backfills
        assert source.cursor.last_datestamp == cursor_before


class TestConcurrency:
    def test_same_source_runs_serialize(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("elra"))
        reports = []

        def work():
            reports.append(harvester.run("elra"))

        threads = [threading.Thread(target=work) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(cat) == 22
        assert sorted(r.added for r in reports) == [0, 22]
        assert sorted(r.unchanged for r in reports) == [0, 22]

    def test_distinct_sources_run_concurrently(self):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(file_source("elra"))
        harvester.add_source(file_source("metashare"))
        reports = {}

        def work(name):
            reports[name] = harvester.run(name)

        threads = [threading.Thread(target=work, args=(n,))
                   for n in ("elra", "metashare")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert reports["elra"].added == 22
        assert reports["metashare"].added == 71
        assert len(cat) == 93


@pytest.fixture(scope="module")
def server():
    with FixtureRepoServer() as srv:
        yield srv


class TestHttpTransport:
    def test_elra_over_http(self, server):
        cat = Catalogue()
        harvester = Harvester(cat)
        harvester.add_source(server.source("elra"))
        report = harvester.run("elra")
        check_conservation(report)
        assert report.added == 22
        assert harvester.run("elra").unchanged == 22

    def test_http_list_honors_since(self, server):
        source = server.source("elra")
        pairs = list_identifiers(source)
        assert len(pairs) == 22
        cutoff = pairs[-1][1]
        assert list_identifiers(source, since=cutoff) == [pairs[-1]]

    def test_http_get_record(self, server):
        source = server.source("elrc_share")
        rid = list_identifiers(source)[0][0]
        document = get_source_record(source, rid)
        assert document["id"] == rid

    def test_http_unknown_record_is_not_found(self, server):
        with pytest.raises(NotFound):
            get_source_record(server.source("elra"), "ELRA-C9999")

    def test_http_unknown_repo_is_not_found(self, server):
        bogus = HarvestSource(id="x", format="legacy_xml",
                              locator=f"{server.base}/nothere")
        with pytest.raises(TransportError):
            list_identifiers(bogus)

    def test_unreachable_host_is_a_transport_error(self):
        source = HarvestSource(id="x", format="legacy_json",
                               locator="http://127.0.0.1:9/repo")
        harvester = Harvester(Catalogue())
        harvester.add_source(source)
        with pytest.raises(TransportError):
            harvester.run("x")
        assert source.cursor.last_datestamp is None
