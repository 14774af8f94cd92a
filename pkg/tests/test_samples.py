import math
import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltgrid.envelopes import (
    LTRequest,
    serialize_response,
    validate_request,
    validate_response,
)
from ltgrid.samples import BUILTIN_SERVICES
from ltgrid.samples.text import date_number_spans, sentence_spans, token_spans
from ltgrid.samples.tonecodec import (
    ALPHABET,
    FRAME_SAMPLES,
    SAMPLE_RATE,
    ToneDecodeError,
    char_frequency,
    decode,
    encode,
)

from oracles import langid_reference_top


def run(name: str, req: LTRequest):
    service = BUILTIN_SERVICES[name]
    assert validate_request(service.service_class, req).valid
    resp = service.handler(req)
    report = validate_response(service.service_class, req, resp)
    assert report.valid, [i.to_doc() for i in report.issues]
    return resp


class TestTokenizer:
    def test_hello_world_spans(self):
        text = "Hello world"
        expected = [(text.index("Hello"), text.index("Hello") + 5), (text.index("world"), text.index("world") + 5)]
        assert token_spans(text) == expected == [(0, 5), (6, 11)]

    def test_empty_text(self):
        resp = run("sample.tokenizer", LTRequest.text(""))
        assert resp.annotations == {"tokens": ()}

    def test_trailing_punctuation_split(self):
        spans = token_spans("Wait... really?!")
        text = "Wait... really?!"
        surfaces = [text[a:b] for a, b in spans]
        assert surfaces == ["Wait", ".", ".", ".", "really", "?", "!"]

    def test_punctuation_only_token(self):
        assert [(a, b) for a, b in token_spans("!!")] == [(0, 1), (1, 2)]

    @given(st.text(max_size=80))
    @settings(max_examples=200, deadline=None)
    def test_token_coverage_reconstructs_input(self, text):
        spans = token_spans(text)
        # non-overlapping, ordered, and everything outside tokens is whitespace
        prev_end = 0
        covered = [False] * len(text)
        for start, end in spans:
            assert 0 <= start < end <= len(text)
            assert start >= prev_end
            prev_end = end
            for i in range(start, end):
                covered[i] = True
        for i, c in enumerate(text):
            if not covered[i]:
                assert c.isspace()
            else:
                assert not c.isspace()  # tokens never contain whitespace

    @given(st.text(max_size=80))
    @settings(max_examples=100, deadline=None)
    def test_tokenizer_output_always_validates(self, text):
        run("sample.tokenizer", LTRequest.text(text))


class TestSentenceSplitter:
    def test_two_short_sentences(self):
        assert sentence_spans("A. B!") == [(0, 2), (3, 5)]

    def test_terminator_mid_word_does_not_split(self):
        text = "See e.g. the report"
        spans = sentence_spans(text)
        # "e.g." ends with '.' followed by space, so the rule does split there;
        # what it must never do is split inside "e.g"
        assert all(text[a:b].strip() == text[a:b] for a, b in spans)

    def test_trailing_fragment_counts(self):
        assert sentence_spans("Done. And then") == [(0, 5), (6, 14)]

    def test_empty(self):
        assert sentence_spans("") == []
        assert sentence_spans("   ") == []

    @given(st.text(max_size=80))
    @settings(max_examples=100, deadline=None)
    def test_splitter_output_always_validates(self, text):
        run("sample.splitter", LTRequest.text(text))


class TestNer:
    def test_spec_sentence(self):
        text = "Meeting on 2020-03-05 at 10"
        dates, numbers = date_number_spans(text)
        d = text.index("2020-03-05")
        assert dates == [(d, d + 10)] == [(11, 21)]
        n = text.index("10", d + 10)
        assert numbers == [(n, n + 2)] == [(25, 27)]

    def test_no_digits(self):
        resp = run("sample.ner", LTRequest.text("nothing numeric here"))
        assert resp.annotations == {"dates": (), "numbers": ()}

    def test_bare_date_is_not_also_numbers(self):
        dates, numbers = date_number_spans("2020-03-05")
        assert len(dates) == 1
        assert numbers == []

    def test_date_embedded_in_digits_is_no_date(self):
        dates, numbers = date_number_spans("42020-03-05")
        assert dates == []
        assert [(a, b) for a, b in numbers] == [(0, 5), (6, 8), (9, 11)]

    def test_feature_carries_matched_string(self):
        resp = run("sample.ner", LTRequest.text("pay 250 by 2021-12-31"))
        dates = resp.annotations["dates"]
        numbers = resp.annotations["numbers"]
        assert dates[0].features["value"] == "2021-12-31"
        assert numbers[0].features["value"] == "250"

    @given(st.text(max_size=80))
    @settings(max_examples=100, deadline=None)
    def test_ner_output_always_validates(self, text):
        run("sample.ner", LTRequest.text(text))


class TestLangId:
    def test_english_sentence_tops_en(self):
        resp = run("sample.langid", LTRequest.text("the quick brown fox jumps"))
        assert resp.classes[0].label == "en"
        assert resp.classes[0].label == langid_reference_top("the quick brown fox jumps")

    def test_german_sentence_tops_de(self):
        resp = run("sample.langid", LTRequest.text("der schnelle braune Fuchs"))
        assert resp.classes[0].label == "de"
        assert resp.classes[0].label == langid_reference_top("der schnelle braune Fuchs")

    def test_agrees_with_reference_on_seed_snippets(self):
        snippets = [
            "people read the news every morning with coffee",
            "die Arbeit mit Wörtern und Sätzen braucht Zeit",
            "les outils de traduction reposent sur des décennies de travail",
            "valodas tehnoloģijām ir sena vēsture Eiropā",
        ]
        for snippet in snippets:
            resp = run("sample.langid", LTRequest.text(snippet))
            assert resp.classes[0].label == langid_reference_top(snippet)

    def test_short_text_fails_cleanly(self):
        service = BUILTIN_SERVICES["sample.langid"]
        resp = service.handler(LTRequest.text("ab"))
        assert resp.kind == "failure"
        assert resp.failure[0].code == "lt.invalid_request"

    def test_scores_sorted_and_cover_all_profiles(self):
        resp = run("sample.langid", LTRequest.text("the weather report was fine"))
        labels = [c.label for c in resp.classes]
        assert sorted(labels) == ["de", "en", "fr", "lv"]
        scores = [c.score for c in resp.classes]
        assert scores == sorted(scores, reverse=True)


class TestDictMt:
    def test_hello_world(self):
        resp = run("sample.mt-en-de", LTRequest.text("hello world", target_lang="de"))
        assert resp.texts[0].content == "hallo welt"
        assert resp.texts[0].role == "translation"

    def test_unknown_token_passes_through(self):
        resp = run("sample.mt-en-de", LTRequest.text("hello qqq", target_lang="de"))
        assert resp.texts[0].content == "hallo qqq"

    def test_unsupported_pair_fails(self):
        service = BUILTIN_SERVICES["sample.mt-en-de"]
        resp = service.handler(LTRequest.text("hello", target_lang="xx"))
        assert resp.kind == "failure"
        assert resp.failure[0].code == "lt.invalid_request"

    def test_case_folds_on_lookup(self):
        resp = run("sample.mt-en-de", LTRequest.text("Hello World", target_lang="de"))
        assert resp.texts[0].content == "hallo welt"


class TestToneCodec:
    def test_frequency_map_is_injective(self):
        freqs = [char_frequency(c) for c in ALPHABET]
        assert len(set(freqs)) == len(ALPHABET)
        assert freqs[0] == 400.0
        assert freqs[1] - freqs[0] == 25.0

    def test_round_trip_spec_example(self):
        assert decode(encode("GRID 42")) == "GRID 42"

    def test_empty_text_zero_length_audio(self):
        assert encode("") == b""
        assert decode(b"") == ""

    def test_full_alphabet_round_trip(self):
        assert decode(encode(ALPHABET)) == ALPHABET

    def test_random_round_trips(self):
        rng = random.Random(4242)
        for _ in range(200):
            s = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 64)))
            assert decode(encode(s)) == s

    def test_non_alphabet_character_rejected(self):
        with pytest.raises(ValueError, match="alphabet"):
            encode("naïve")

    def test_out_of_map_tone_fails_with_frame_index(self):
        # independent synthesis: a plain-math 10 kHz tone in frame 1
        good = encode("A")
        bad_frame = bytearray()
        for n in range(FRAME_SAMPLES):
            v = 0.8 * math.sin(2 * math.pi * 10000.0 * n / SAMPLE_RATE)
            bad_frame += struct.pack("<h", int(v * 32767))
        with pytest.raises(ToneDecodeError) as exc:
            decode(good + bytes(bad_frame))
        assert exc.value.frame_index == 1
        assert "frame 1" in str(exc.value)

    def test_truncated_frame_fails(self):
        with pytest.raises(ToneDecodeError, match="truncated"):
            decode(encode("AB") + b"\x00\x00" * 100)

    def test_asr_failure_is_in_band(self):
        service = BUILTIN_SERVICES["sample.asr"]
        req = LTRequest.audio_request(b"\x00\x00" * FRAME_SAMPLES)  # pure silence
        resp = service.handler(req)
        assert resp.kind == "failure"
        assert resp.failure[0].code == "lt.internal"

    def test_tts_rejects_non_alphabet_in_band(self):
        service = BUILTIN_SERVICES["sample.tts"]
        resp = service.handler(LTRequest.text("schön"))
        assert resp.kind == "failure"
        assert resp.failure[0].code == "lt.invalid_request"

    def test_tts_asr_envelope_round_trip(self):
        tts_resp = run("sample.tts", LTRequest.text("GRID 42"))
        asr_resp = run("sample.asr", LTRequest.audio_request(tts_resp.audio.data))
        assert asr_resp.texts[0].content == "GRID 42"


class TestDeterminism:
    CASES = [
        ("sample.tokenizer", LTRequest.text("Hello world.")),
        ("sample.splitter", LTRequest.text("A. B!")),
        ("sample.ner", LTRequest.text("Meeting on 2020-03-05 at 10")),
        ("sample.langid", LTRequest.text("the quick brown fox")),
        ("sample.mt-en-de", LTRequest.text("hello world", target_lang="de")),
        ("sample.tts", LTRequest.text("GRID")),
    ]

    @pytest.mark.parametrize("name,req", CASES, ids=[c[0] for c in CASES])
    def test_byte_identical_output(self, name, req):
        first = serialize_response(BUILTIN_SERVICES[name].handler(req))
        second = serialize_response(BUILTIN_SERVICES[name].handler(req))
        assert first == second

    def test_asr_byte_identical(self):
        data = encode("GRID")
        req = LTRequest.audio_request(data)
        handler = BUILTIN_SERVICES["sample.asr"].handler
        assert serialize_response(handler(req)) == serialize_response(handler(req))


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet=ALPHABET, max_size=32))
def test_asr_output_validates_on_any_encoded_text(s):
    req = LTRequest.audio_request(encode(s))
    resp = run("sample.asr", req)
    assert resp.texts[0].content == s
