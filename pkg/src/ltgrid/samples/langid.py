"""Character-trigram language guesser over four bundled seed texts.

Profiles are trigram frequency vectors built from fixtures/langid/*.txt;
similarity is the cosine between the input's vector and each profile.
Scores land in [0, 1] because all counts are non-negative.
"""

from __future__ import annotations

import math
import re
from functools import lru_cache
from importlib import resources

PROFILE_LANGUAGES = ("de", "en", "fr", "lv")

_LETTERS = re.compile(r"[^\W\d_]+", re.UNICODE)

MIN_TEXT_LENGTH = 3


def _normalize(text: str) -> str:
    words = _LETTERS.findall(text.casefold())
    return " " + " ".join(words) + " " if words else ""


def trigram_counts(text: str) -> dict[str, int]:
    normalized = _normalize(text)
    counts: dict[str, int] = {}
    for i in range(len(normalized) - 2):
        gram = normalized[i : i + 3]
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def cosine(a: dict[str, int], b: dict[str, int]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(count * b.get(gram, 0) for gram, count in a.items())
    norm = math.sqrt(sum(c * c for c in a.values())) * math.sqrt(sum(c * c for c in b.values()))
    return dot / norm if norm else 0.0


@lru_cache(maxsize=1)
def _profiles() -> dict[str, dict[str, int]]:
    out = {}
    for lang in PROFILE_LANGUAGES:
        seed = resources.files("ltgrid.fixtures").joinpath(f"langid/{lang}.txt").read_text("utf-8")
        out[lang] = trigram_counts(seed)
    return out


def detect_language(text: str) -> list[tuple[str, float]]:
    """Scores for every profile language, best first (ties by label).

    Caller is responsible for the minimum-length precondition; texts with
    no letters at all score 0 everywhere.
    """
    grams = trigram_counts(text)
    scored = [
        (lang, round(cosine(grams, profile), 6)) for lang, profile in _profiles().items()
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored
