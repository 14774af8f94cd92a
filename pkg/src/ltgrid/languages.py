"""Language tags and the A/B/C/D coverage-category classifier.

Categories group languages by how central they are to the grid's mission:

* ``A`` - official EU languages (24 codes),
* ``B`` - other EU languages without official status, candidate-country and
  free-trade-partner languages,
* ``C`` - languages of immigrant communities and important trade or political
  partners,
* ``D`` - everything else.

The bundled table lists only the memberships the platform commits to; any
syntactically valid tag not in the table classifies to ``D`` (callers that
care can tell explicit membership from the fallback via `is_listed`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import InputError

_CODE_RE = re.compile(r"^[a-z]{2,8}$")


class LanguageCategory(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


@dataclass(frozen=True)
class LanguageTag:
    """A BCP-47-style primary subtag plus an optional display name."""

    code: str
    display_name: str | None = None

    def well_formed(self) -> bool:
        return bool(_CODE_RE.match(self.code))


#: The 24 official EU languages.
EU_OFFICIAL = frozenset(
    {
        "bg", "hr", "cs", "da", "nl", "en", "et", "fi", "fr", "de", "el",
        "hu", "ga", "it", "lv", "lt", "mt", "pl", "pt", "ro", "sk", "sl",
        "es", "sv",
    }
)

_CATEGORY_B = frozenset({"no", "is"})
_CATEGORY_C = frozenset({"ar", "zh", "ru", "tr"})


def is_listed(code: str) -> bool:
    """True when the code has an explicit entry in the bundled table."""
    return code in EU_OFFICIAL or code in _CATEGORY_B or code in _CATEGORY_C


def classify_language(tag: LanguageTag | str) -> LanguageCategory:
    """Classify a language tag into its coverage category.

    Deterministic lookup in the bundled table; unlisted codes fall back to
    category ``D``. Malformed codes are rejected rather than classified.
    """
    code = tag.code if isinstance(tag, LanguageTag) else tag
    if not _CODE_RE.match(code):
        raise InputError(
            f"malformed language code {code!r}: expected 2-8 lowercase letters",
            field_path="code",
        )
    if code in EU_OFFICIAL:
        return LanguageCategory.A
    if code in _CATEGORY_B:
        return LanguageCategory.B
    if code in _CATEGORY_C:
        return LanguageCategory.C
    return LanguageCategory.D
