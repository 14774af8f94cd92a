import pytest
from hypothesis import given
from hypothesis import strategies as st

from ltgrid.errors import InputError
from ltgrid.languages import (
    EU_OFFICIAL,
    LanguageCategory,
    LanguageTag,
    classify_language,
)


def test_eu_official_is_the_full_set_of_24():
    assert len(EU_OFFICIAL) == 24
    for code in EU_OFFICIAL:
        assert classify_language(code) is LanguageCategory.A


@pytest.mark.parametrize(
    "code,category",
    [
        ("de", LanguageCategory.A),
        ("no", LanguageCategory.B),
        ("is", LanguageCategory.B),
        ("ru", LanguageCategory.C),
        ("ar", LanguageCategory.C),
        ("zh", LanguageCategory.C),
        ("tr", LanguageCategory.C),
        ("hi", LanguageCategory.D),
    ],
)
def test_known_assignments(code, category):
    assert classify_language(LanguageTag(code)) is category


def test_unlisted_defaults_to_d():
    assert classify_language("uk") is LanguageCategory.D
    assert classify_language("grc") is LanguageCategory.D


@pytest.mark.parametrize("bad", ["", "e", "EN", "en-US", "toolongcode", "d3"])
def test_malformed_rejected(bad):
    with pytest.raises(InputError):
        classify_language(bad)


@given(st.from_regex(r"\A[a-z]{2,8}\Z"))
def test_classifier_total_over_wellformed_tags(code):
    assert classify_language(code) in LanguageCategory
