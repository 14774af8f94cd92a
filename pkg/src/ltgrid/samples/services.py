"""The built-in sample services, as envelope handlers plus catalogue metadata.

A handler takes a validated LTRequest and returns an LTResponse; the builtin
runner (runners.py) does the parse/validate/serialize framing around it.
Handlers stay pure and deterministic so identical requests always produce
byte-identical responses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..envelopes import Annotation, ClassScore, LTRequest, LTResponse, TextItem
from ..errors import InputError
from ..model import ServiceClass
from . import langid, mt, text, tonecodec


def _span_annotations(content: str, spans) -> list[Annotation]:
    return [Annotation(start, end, {"text": content[start:end]}) for start, end in spans]


def handle_tokenizer(req: LTRequest) -> LTResponse:
    return LTResponse.annotations_response(
        {"tokens": _span_annotations(req.content, text.token_spans(req.content))}
    )


def handle_splitter(req: LTRequest) -> LTResponse:
    return LTResponse.annotations_response(
        {"sentences": _span_annotations(req.content, text.sentence_spans(req.content))}
    )


def handle_ner(req: LTRequest) -> LTResponse:
    dates, numbers = text.date_number_spans(req.content)
    return LTResponse.annotations_response(
        {
            "dates": [Annotation(s, e, {"value": req.content[s:e]}) for s, e in dates],
            "numbers": [Annotation(s, e, {"value": req.content[s:e]}) for s, e in numbers],
        }
    )


def handle_langid(req: LTRequest) -> LTResponse:
    if len(req.content) < langid.MIN_TEXT_LENGTH:
        return LTResponse.failure_response(
            "lt.invalid_request",
            f"need at least {langid.MIN_TEXT_LENGTH} characters to guess a language",
        )
    scores = langid.detect_language(req.content)
    return LTResponse.classification_response(
        [ClassScore(label, score) for label, score in scores]
    )


def handle_mt(req: LTRequest) -> LTResponse:
    source = req.params.get("source_lang", "en")
    target = req.params["target_lang"]
    try:
        translated = mt.translate(req.content, str(source), str(target))
    except InputError as e:
        return LTResponse.failure_response("lt.invalid_request", e.message)
    return LTResponse.texts_response([TextItem(translated, role="translation")])


def handle_tts(req: LTRequest) -> LTResponse:
    try:
        data = tonecodec.encode(req.content)
    except ValueError as e:
        return LTResponse.failure_response("lt.invalid_request", str(e))
    return LTResponse.audio_response(data)


def handle_asr(req: LTRequest) -> LTResponse:
    try:
        transcript = tonecodec.decode(req.audio.data)
    except tonecodec.ToneDecodeError as e:
        return LTResponse.failure_response("lt.internal", str(e))
    return LTResponse.texts_response([TextItem(transcript, role="transcript")])


@dataclass(frozen=True)
class BuiltinService:
    name: str
    service_class: ServiceClass
    function: str
    description: str
    handler: Callable[[LTRequest], LTResponse]
    languages: tuple[str, ...] = ()
    language_pairs: tuple[tuple[str, str], ...] = ()


BUILTIN_SERVICES: dict[str, BuiltinService] = {
    s.name: s
    for s in (
        BuiltinService(
            name="sample.tokenizer",
            service_class=ServiceClass.IE,
            function="Tokenization",
            description="Whitespace tokenizer that splits trailing sentence punctuation.",
            handler=handle_tokenizer,
            languages=("en", "de", "fr", "lv"),
        ),
        BuiltinService(
            name="sample.splitter",
            service_class=ServiceClass.IE,
            function="Sentence splitting",
            description="Rule-based sentence splitter over terminal punctuation.",
            handler=handle_splitter,
            languages=("en", "de", "fr", "lv"),
        ),
        BuiltinService(
            name="sample.ner",
            service_class=ServiceClass.IE,
            function="Named entity recognition",
            description="Spots ISO dates and digit runs, nothing more.",
            handler=handle_ner,
            languages=("en",),
        ),
        BuiltinService(
            name="sample.langid",
            service_class=ServiceClass.Classification,
            function="Language identification",
            description="Trigram-cosine guesser over bundled en/de/fr/lv seed texts.",
            handler=handle_langid,
            languages=("en", "de", "fr", "lv"),
        ),
        BuiltinService(
            name="sample.mt-en-de",
            service_class=ServiceClass.MT,
            function="Machine translation",
            description="Word-by-word English to German dictionary translation.",
            handler=handle_mt,
            languages=("en", "de"),
            language_pairs=(("en", "de"),),
        ),
        BuiltinService(
            name="sample.tts",
            service_class=ServiceClass.TTS,
            function="Text to speech",
            description="Encodes printable ASCII as one sine tone per character.",
            handler=handle_tts,
            languages=("en",),
        ),
        BuiltinService(
            name="sample.asr",
            service_class=ServiceClass.ASR,
            function="Speech recognition",
            description="Decodes the tone codec back to text.",
            handler=handle_asr,
            languages=("en",),
        ),
    )
}
