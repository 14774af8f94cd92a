#!/usr/bin/env python3
"""Export golden fixtures for the browser console's test suite.

Two files land in frontend/tests/fixtures/:

- ner_goldens.json: inputs run through sample.ner with the expected
  highlight slices computed by code-point slicing (Python string slicing),
  which is what the console must reproduce via Array.from.
- facet_selections.json: scripted search selections with the exact query
  string a well-behaved client sends and the gateway's recorded answer
  (total, facet_counts, page of record ids).

Run from the repository root: python3 scripts/export_console_goldens.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from urllib.parse import urlencode

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ltgrid.catalogue import FACET_NAMES
from ltgrid.config import GridConfig
from ltgrid.envelopes import LTRequest
from ltgrid.gateway import Gateway
from ltgrid.grid import Grid

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

# Non-BMP characters (clef, emoji) sit before several spans on purpose:
# UTF-16 .slice() would land one short per astral char, code points stay true.
NER_TEXTS = [
    "Meeting on 2020-03-05",
    "Call 911 now",
    "\U0001f3bc tuning at 440 hz",
    "Invoices 12 and 94 due 2021-12-31",
    "\U0001d11e clef marks bar 7",
    "From 2019-01-01 to 2019-12-31",
    "Päivä 2020-05-17 Tampereella",
    "\U0001f600\U0001f600\U0001f600 3 smileys",
    "no entities here at all",
    "mix \U0001d11e 2022-02-22 and 42 \U0001f388",
]

SELECTIONS = [
    {"name": "no selection"},
    {"name": "MT class", "facets": {"service_class": ["MT"]}},
    {"name": "en to lv", "facets": {"service_class": ["MT"], "source": ["en"], "target": ["lv"]}},
    {"name": "no to en", "facets": {"source": ["no"], "target": ["en"]}},
    {"name": "en to hi", "facets": {"source": ["en"], "target": ["hi"]}},
    {"name": "corpora", "facets": {"kind": ["Corpus"]}},
    {"name": "corpora or lexicons", "facets": {"kind": ["Corpus", "LexicalConceptualResource"]}},
    {"name": "IE class", "facets": {"service_class": ["IE"]}},
    {"name": "speech classes", "facets": {"service_class": ["TTS", "ASR"]}},
    {"name": "text: translation", "q": "translation"},
    {"name": "text + class", "q": "translation", "facets": {"service_class": ["MT"]}},
    {"name": "latvian", "facets": {"language": ["lv"]}},
    {"name": "english or german", "facets": {"language": ["en", "de"]}},
    {"name": "category A", "facets": {"language_category": ["A"]}},
    {"name": "ingested only", "facets": {"status": ["ingested"]}},
    {"name": "mt function", "facets": {"function": ["Machine translation"]}},
    {"name": "english tools", "facets": {"kind": ["ToolService"], "language": ["en"]}},
    {"name": "text: speech", "q": "speech"},
    {"name": "small page", "facets": {"service_class": ["Classification"]}, "limit": 5},
    {"name": "offset window", "facets": {"kind": ["Corpus"]}, "offset": 10, "limit": 10},
]


def query_string(selection: dict) -> str:
    """Build the canonical query string; the console's client mirrors this
    order exactly (q, facets in sidebar order, offset, limit)."""
    pairs: list[tuple[str, str]] = []
    if selection.get("q"):
        pairs.append(("q", selection["q"]))
    facets = selection.get("facets", {})
    for name in FACET_NAMES:
        for value in facets.get(name, []):
            pairs.append((name, value))
    if selection.get("offset") is not None:
        pairs.append(("offset", str(selection["offset"])))
    if selection.get("limit") is not None:
        pairs.append(("limit", str(selection["limit"])))
    return urlencode(pairs)


def export_ner_goldens() -> dict:
    grid = Grid(GridConfig(with_samples=True))
    cases = []
    for content in NER_TEXTS:
        ticket = grid.orchestrator.process("sample.ner", LTRequest.text(content))
        assert ticket.outcome == "success", (content, ticket.outcome)
        doc = ticket.response.to_doc()
        expected = []
        for layer in sorted(doc["annotations"]):
            for ann in sorted(doc["annotations"][layer], key=lambda a: a["start"]):
                expected.append(
                    {
                        "layer": layer,
                        "start": ann["start"],
                        "end": ann["end"],
                        "text": content[ann["start"]:ann["end"]],
                    }
                )
        cases.append({"content": content, "response": doc, "expected": expected})
    spanned = sum(1 for c in cases if c["expected"])
    assert spanned >= 8, f"only {spanned} golden cases carry spans"
    return {"cases": cases}


def export_facet_selections() -> dict:
    grid = Grid(GridConfig())
    for source in ("elra", "elrc_share", "release1alpha"):
        report = grid.harvester.run(source)
        assert report.failed == (), report.failed
    gateway = Gateway(grid)
    cases = []
    for selection in SELECTIONS:
        qs = query_string(selection)
        target = "/api/catalogue/search" + ("?" + qs if qs else "")
        response = gateway.dispatch("GET", target)
        assert response.status == 200, (selection["name"], response.json())
        doc = response.json()
        cases.append(
            {
                "name": selection["name"],
                "selection": {
                    "q": selection.get("q", ""),
                    "facets": selection.get("facets", {}),
                    "offset": selection.get("offset"),
                    "limit": selection.get("limit"),
                },
                "query_string": qs,
                "total": doc["total"],
                "facet_counts": doc["facet_counts"],
                "record_ids": [r["id"] for r in doc["hits"]],
            }
        )
    return {"cases": cases}


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, doc in (
        ("ner_goldens.json", export_ner_goldens()),
        ("facet_selections.json", export_facet_selections()),
    ):
        path = OUT_DIR / name
        path.write_text(
            json.dumps(doc, indent=1, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"wrote {path} ({len(doc['cases'])} cases)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
