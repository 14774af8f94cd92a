#!/usr/bin/env python3
"""Regenerate the bundled harvest fixture repositories.

The output is deterministic (fixed seed, fixed clock) so re-running the
script never churns the committed files. Every generated document is fed
back through the production converter as a self-check before writing.

Run from the repository root:  python3 scripts/gen_fixtures.py
"""

from __future__ import annotations

import json
import random
import sys
import xml.etree.ElementTree as ET
from datetime import datetime, timedelta, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ltgrid.harvest import convert_legacy  # noqa: E402

OUT_DIR = ROOT / "src" / "ltgrid" / "fixtures" / "harvest"

EU_CODES = [
    "bg", "cs", "da", "de", "el", "en", "es", "et", "fi", "fr", "ga", "hr",
    "hu", "it", "lt", "lv", "mt", "nl", "pl", "pt", "ro", "sk", "sl", "sv",
]

DOMAINS = [
    "news", "parliament", "legal", "medical", "weather", "finance", "tourism",
    "subtitles", "broadcast", "administrative", "scientific", "social media",
]

CORPUS_SHAPES = ["monolingual corpus", "parallel corpus", "speech corpus",
                 "web corpus", "annotated corpus"]
LEXICON_SHAPES = ["terminology lexicon", "bilingual glossary", "wordnet",
                  "named-entity gazetteer"]
MODEL_SHAPES = ["acoustic model", "language model", "morphological grammar",
                "dependency treebank model"]

PROVIDERS = [
    "LinguaWorks", "TextMill", "ParseFab", "VoxLabs", "SyntagmaSoft",
    "LexiCore", "PolyGlotta", "AnnotateIt", "SpeechForge", "TermBase",
]

IE_FUNCTIONS = [
    "Named entity recognition", "Tokenization", "Part of speech tagging",
    "Dependency parsing", "Sentiment analysis", "Summarization",
    "Keyword extraction", "Lemmatisation", "Coreference resolution",
    "Relation extraction", "Entity linking", "Date detection",
    "Sentence splitting", "Term recognition",
]

# One directed pair per translation service; the three pairs checked by the
# facet fixtures (en>lv x3, no>en x2, en>hi x1) come first.
MT_PAIRS = (
    [("en", "lv")] * 3
    + [("no", "en")] * 2
    + [("en", "hi")] * 1
    + [("de", "en")] * 4
    + [("en", "et")] * 3
    + [("en", "de")] * 2
    + [("fr", "en")] * 2
    + [("en", "fr")] * 2
    + [("lv", "en")] * 3
    + [("ru", "en")] * 2
)

ASR_LANGS = ["en", "de", "fr", "es", "fi", "lv", "lt", "pt", "el"]
TTS_LANGS = ["en", "de", "fr", "lv"]

LANG_NAMES = {
    "bg": "Bulgarian", "cs": "Czech", "da": "Danish", "de": "German",
    "el": "Greek", "en": "English", "es": "Spanish", "et": "Estonian",
    "fi": "Finnish", "fr": "French", "ga": "Irish", "hr": "Croatian",
    "hu": "Hungarian", "it": "Italian", "lt": "Lithuanian", "lv": "Latvian",
    "mt": "Maltese", "nl": "Dutch", "pl": "Polish", "pt": "Portuguese",
    "ro": "Romanian", "sk": "Slovak", "sl": "Slovenian", "sv": "Swedish",
    "no": "Norwegian", "ru": "Russian", "hi": "Hindi",
}


def stamp(base: datetime, index: int) -> str:
    t = base + timedelta(hours=7 * index, minutes=11 * (index % 13))
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def lang_name(code: str) -> str:
    return LANG_NAMES.get(code, code)


def resource_row(rng: random.Random, rid: str, datestamp: str, resource_type: str,
                 shapes: list[str], licence: str) -> dict:
    codes = rng.sample(EU_CODES, rng.choice([1, 1, 1, 2]))
    shape = rng.choice(shapes)
    domain = rng.choice(DOMAINS)
    name = f"{'/'.join(lang_name(c) for c in codes)} {domain} {shape}"
    description = (
        f"A {shape} covering the {domain} domain in "
        f"{' and '.join(lang_name(c) for c in codes)}. "
        f"Collected and curated by {rng.choice(PROVIDERS)}."
    )
    return {
        "id": rid,
        "datestamp": datestamp,
        "resourceType": resource_type,
        "resourceName": name,
        "description": description,
        "languages": codes,
        "licence": licence,
    }


def row_to_xml(row: dict) -> ET.Element:
    element = ET.Element("record", id=row["id"], datestamp=row["datestamp"])
    for tag, key in (("resourceType", "resourceType"), ("resourceName", "resourceName"),
                     ("description", "description"), ("licence", "licence")):
        child = ET.SubElement(element, tag)
        child.text = row[key]
    for code in row["languages"]:
        lang = ET.SubElement(element, "language")
        lang.text = code
    return element


def write_xml_repo(path: Path, rows: list[dict]):
    root = ET.Element("repository")
    for row in rows:
        root.append(row_to_xml(row))
    ET.indent(root)
    path.write_bytes(ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n")


def write_json_repo(path: Path, rows: list[dict]):
    path.write_text(json.dumps(rows, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def gen_elra() -> list[dict]:
    rng = random.Random(1201)
    base = datetime(2019, 6, 3, 9, 0, tzinfo=timezone.utc)
    rows = []
    for i in range(20):
        rows.append(resource_row(rng, f"ELRA-C{i + 1:04d}", stamp(base, i),
                                 "corpus", CORPUS_SHAPES, "ELRA-EUA"))
    for i in range(2):
        rows.append(resource_row(rng, f"ELRA-L{i + 1:04d}", stamp(base, 20 + i),
                                 "lexicalConceptualResource", LEXICON_SHAPES, "ELRA-EUA"))
    return rows


def gen_elrc_share() -> list[dict]:
    rng = random.Random(1202)
    base = datetime(2019, 7, 15, 6, 30, tzinfo=timezone.utc)
    rows = []
    for i in range(180):
        rows.append(resource_row(rng, f"elrc-{i + 1:05d}", stamp(base, i),
                                 "corpus", CORPUS_SHAPES, rng.choice(["CC-BY-4.0", "PSI-open"])))
    for i in range(7):
        rows.append(resource_row(rng, f"elrc-lex-{i + 1:03d}", stamp(base, 180 + i),
                                 "lexicalConceptualResource", LEXICON_SHAPES, "CC-BY-4.0"))
    return rows


def gen_metashare() -> list[dict]:
    rng = random.Random(1203)
    base = datetime(2019, 9, 2, 12, 0, tzinfo=timezone.utc)
    rows = []
    for i in range(52):
        rows.append(resource_row(rng, f"ms-c-{i + 1:03d}", stamp(base, i),
                                 "corpus", CORPUS_SHAPES, "CC-BY-NC-4.0"))
    for i in range(12):
        rows.append(resource_row(rng, f"ms-l-{i + 1:03d}", stamp(base, 52 + i),
                                 "lexicalConceptualResource", LEXICON_SHAPES, "CC-BY-NC-4.0"))
    for i in range(7):
        rows.append(resource_row(rng, f"ms-m-{i + 1:03d}", stamp(base, 64 + i),
                                 "model", MODEL_SHAPES, "CC-BY-4.0"))
    return rows


def service_row(rng: random.Random, rid: str, datestamp: str, *, name: str,
                description: str, languages: list[str], function: str,
                service_class: str, pairs: list[dict] | None = None) -> dict:
    record = {
        "kind": "ToolService",
        "resource_name": name,
        "description": description,
        "languages": languages,
        "function": function,
        "service_class": service_class,
        "licence_ref": rng.choice(["CC-BY-4.0", "proprietary", "Apache-2.0"]),
    }
    if pairs:
        record["language_pairs"] = pairs
    return {"id": rid, "datestamp": datestamp, "record": record}


def gen_release1alpha() -> list[dict]:
    rng = random.Random(1204)
    base = datetime(2020, 3, 2, 8, 0, tzinfo=timezone.utc)
    rows = []
    index = 0

    for i in range(133):
        function = IE_FUNCTIONS[i % len(IE_FUNCTIONS)]
        codes = rng.sample(EU_CODES, rng.choice([1, 1, 2, 3]))
        provider = rng.choice(PROVIDERS)
        rows.append(service_row(
            rng, f"r1a-ie-{i + 1:03d}", stamp(base, index),
            name=f"{provider} {function.lower()} ({', '.join(codes)})",
            description=(
                f"{function} for {' and '.join(lang_name(c) for c in codes)}, "
                f"provided by {provider}."
            ),
            languages=codes, function=function, service_class="IE",
        ))
        index += 1

    for i, (src, tgt) in enumerate(MT_PAIRS):
        provider = rng.choice(PROVIDERS)
        rows.append(service_row(
            rng, f"r1a-mt-{i + 1:03d}", stamp(base, index),
            name=f"{provider} translation {lang_name(src)} to {lang_name(tgt)}",
            description=(
                f"Machine translation from {lang_name(src)} into {lang_name(tgt)}, "
                f"provided by {provider}."
            ),
            languages=[src, tgt], function="Machine translation", service_class="MT",
            pairs=[{"source": src, "target": tgt}],
        ))
        index += 1

    for i, code in enumerate(ASR_LANGS):
        provider = rng.choice(PROVIDERS)
        rows.append(service_row(
            rng, f"r1a-asr-{i + 1:03d}", stamp(base, index),
            name=f"{provider} {lang_name(code)} speech recognition",
            description=f"Speech-to-text for {lang_name(code)}, provided by {provider}.",
            languages=[code], function="Speech recognition", service_class="ASR",
        ))
        index += 1

    for i, code in enumerate(TTS_LANGS):
        provider = rng.choice(PROVIDERS)
        rows.append(service_row(
            rng, f"r1a-tts-{i + 1:03d}", stamp(base, index),
            name=f"{provider} {lang_name(code)} speech synthesis",
            description=f"Text-to-speech for {lang_name(code)}, provided by {provider}.",
            languages=[code], function="Text to speech", service_class="TTS",
        ))
        index += 1

    for i in range(2):
        provider = rng.choice(PROVIDERS)
        codes = rng.sample(EU_CODES, 2)
        rows.append(service_row(
            rng, f"r1a-cls-{i + 1:03d}", stamp(base, index),
            name=f"{provider} text categorization",
            description=(
                f"Document categorization for {' and '.join(lang_name(c) for c in codes)}, "
                f"provided by {provider}."
            ),
            languages=codes, function="Categorization", service_class="Classification",
        ))
        index += 1

    return rows


def self_check(format: str, rows: list[dict], source_id: str):
    for row in rows:
        if format == "legacy_xml":
            convert_legacy(format, ET.tostring(row_to_xml(row), encoding="unicode"),
                           source_id=source_id)
        else:
            convert_legacy(format, row, source_id=source_id)


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    elra = gen_elra()
    self_check("legacy_xml", elra, "elra")
    write_xml_repo(OUT_DIR / "elra.xml", elra)

    elrc = gen_elrc_share()
    self_check("legacy_json", elrc, "elrc_share")
    write_json_repo(OUT_DIR / "elrc_share.json", elrc)

    metashare = gen_metashare()
    self_check("legacy_xml", metashare, "metashare")
    write_xml_repo(OUT_DIR / "metashare.xml", metashare)

    release = gen_release1alpha()
    self_check("native", release, "release1alpha")
    write_json_repo(OUT_DIR / "release1alpha.json", release)

    for name, rows in (("elra.xml", elra), ("elrc_share.json", elrc),
                       ("metashare.xml", metashare), ("release1alpha.json", release)):
        print(f"{name}: {len(rows)} records")


if __name__ == "__main__":
    main()
