"""Rule-based tokenization, sentence splitting and date/number spotting.

All spans are half-open [start, end) offsets in Unicode scalar values over
the input string. Quality is not the point; these exist so the annotation
pipeline can be exercised end to end with predictable output.
"""

from __future__ import annotations

import re

SENTENCE_END = ".?!"

_NONSPACE = re.compile(r"\S+")
_DATE = re.compile(r"(?<!\d)\d{4}-\d{2}-\d{2}(?!\d)")
_DIGITS = re.compile(r"\d+")


def token_spans(text: str) -> list[tuple[int, int]]:
    """Maximal non-whitespace runs; trailing .?! split into 1-char tokens."""
    spans: list[tuple[int, int]] = []
    for m in _NONSPACE.finditer(text):
        start, end = m.span()
        core_end = end
        while core_end > start and text[core_end - 1] in SENTENCE_END:
            core_end -= 1
        if core_end > start:
            spans.append((start, core_end))
        for i in range(core_end, end):
            spans.append((i, i + 1))
    return spans


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Sentences run from the first non-space character to a .?! that is
    followed by whitespace or end of text; a trailing fragment without a
    terminator still counts as a sentence."""
    spans: list[tuple[int, int]] = []
    i, n = 0, len(text)
    while i < n:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        start = i
        end = None
        while i < n:
            if text[i] in SENTENCE_END and (i + 1 >= n or text[i + 1].isspace()):
                end = i + 1
                break
            i += 1
        if end is None:
            end = n
        spans.append((start, end))
        i = end
    return spans


def date_number_spans(text: str) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """ISO dates (YYYY-MM-DD), then maximal digit runs outside those dates."""
    dates = [m.span() for m in _DATE.finditer(text)]
    numbers = []
    for m in _DIGITS.finditer(text):
        start, end = m.span()
        if any(ds <= start and end <= de for ds, de in dates):
            continue
        numbers.append((start, end))
    return dates, numbers
