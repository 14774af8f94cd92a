"""Dictionary machine translation over bundled word lists."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from ..errors import InputError


@lru_cache(maxsize=None)
def _load_dictionaries() -> dict[tuple[str, str], dict[str, str]]:
    out = {}
    root = resources.files("ltgrid.fixtures").joinpath("mt")
    for entry in root.iterdir():
        if not entry.name.endswith(".json"):
            continue
        doc = json.loads(entry.read_text("utf-8"))
        out[(doc["source_lang"], doc["target_lang"])] = doc["entries"]
    return out


def supported_pairs() -> list[tuple[str, str]]:
    return sorted(_load_dictionaries())


def translate(text: str, source_lang: str, target_lang: str) -> str:
    """Token-by-token lookup; unknown tokens pass through unchanged."""
    entries = _load_dictionaries().get((source_lang, target_lang))
    if entries is None:
        raise InputError(
            f"no bundled dictionary for {source_lang}->{target_lang}; "
            f"supported: {', '.join(f'{s}->{t}' for s, t in supported_pairs())}"
        )
    out = []
    for token in text.split():
        out.append(entries.get(token.casefold(), token))
    return " ".join(out)
