"""Generic request/response envelopes for language-technology services.

Every service, whatever it does, speaks the same small protocol: a request
is either text or audio, a response is one of five kinds, and the service
class pins down which combinations are legal (see CLASS_TABLE below). The
wire form is canonical JSON: UTF-8, sorted keys, compact separators, binary
audio as base64. Identical envelopes serialize to identical bytes.

Parsing is structural only; validate_request/validate_response carry the
semantic rules (class table, offsets, scores, supported audio formats) and
return reports instead of raising, because the caller usually wants the
full issue list.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass, field

from .errors import InputError
from .model import Issue, ServiceClass, ValidationReport

Scalar = str | int | float | bool

REQUEST_KINDS = ("text", "audio")
RESPONSE_KINDS = ("texts", "annotations", "classification", "audio", "failure")

# Per class: the request kind it accepts and the non-failure response kinds
# it may produce. kind=failure is legal for every class.
CLASS_TABLE: dict[ServiceClass, tuple[str, frozenset[str]]] = {
    ServiceClass.MT: ("text", frozenset({"texts"})),
    ServiceClass.IE: ("text", frozenset({"annotations"})),
    ServiceClass.ASR: ("audio", frozenset({"texts", "annotations"})),
    ServiceClass.TTS: ("text", frozenset({"audio"})),
    ServiceClass.Classification: ("text", frozenset({"classification"})),
}

FAILURE_CODES = frozenset({
    "lt.timeout",
    "lt.invalid_request",
    "lt.internal",
    "lt.overloaded",
})


@dataclass(frozen=True)
class AudioFormat:
    encoding: str = "pcm16"
    sample_rate: int = 16000
    channels: int = 1

    def is_supported(self) -> bool:
        return self.encoding == "pcm16" and self.sample_rate == 16000 and self.channels == 1

    def to_doc(self) -> dict:
        return {"encoding": self.encoding, "sample_rate": self.sample_rate, "channels": self.channels}


@dataclass(frozen=True)
class AudioPayload:
    data: bytes
    format: AudioFormat = AudioFormat()

    def to_doc(self) -> dict:
        return {
            "format": self.format.to_doc(),
            "payload": base64.b64encode(self.data).decode("ascii"),
        }


@dataclass(frozen=True)
class Annotation:
    start: int
    end: int
    features: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        doc = {"start": self.start, "end": self.end}
        if self.features:
            doc["features"] = dict(self.features)
        return doc


@dataclass(frozen=True)
class TextItem:
    content: str
    role: str | None = None
    score: float | None = None

    def to_doc(self) -> dict:
        doc: dict = {"content": self.content}
        if self.role is not None:
            doc["role"] = self.role
        if self.score is not None:
            doc["score"] = self.score
        return doc


@dataclass(frozen=True)
class ClassScore:
    label: str
    score: float

    def to_doc(self) -> dict:
        return {"label": self.label, "score": self.score}


@dataclass(frozen=True)
class FailureItem:
    code: str
    message: str

    def to_doc(self) -> dict:
        return {"code": self.code, "message": self.message}


@dataclass(frozen=True)
class LTRequest:
    kind: str
    content: str | None = None
    audio: AudioPayload | None = None
    params: dict = field(default_factory=dict)

    @staticmethod
    def text(content: str, **params: Scalar) -> "LTRequest":
        return LTRequest(kind="text", content=content, params=params)

    @staticmethod
    def audio_request(data: bytes, fmt: AudioFormat | None = None, **params: Scalar) -> "LTRequest":
        return LTRequest(kind="audio", audio=AudioPayload(data, fmt or AudioFormat()), params=params)

    def to_doc(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.content is not None:
            doc["content"] = self.content
        if self.audio is not None:
            doc["audio"] = self.audio.to_doc()
        if self.params:
            doc["params"] = dict(self.params)
        return doc


@dataclass(frozen=True)
class LTResponse:
    kind: str
    texts: tuple = ()
    annotations: dict = field(default_factory=dict)  # layer name -> tuple[Annotation]
    classes: tuple = ()
    audio: AudioPayload | None = None
    failure: tuple = ()

    @staticmethod
    def texts_response(items) -> "LTResponse":
        items = tuple(i if isinstance(i, TextItem) else TextItem(i) for i in items)
        return LTResponse(kind="texts", texts=items)

    @staticmethod
    def annotations_response(layers: dict) -> "LTResponse":
        fixed = {name: tuple(anns) for name, anns in layers.items()}
        return LTResponse(kind="annotations", annotations=fixed)

    @staticmethod
    def classification_response(classes) -> "LTResponse":
        return LTResponse(kind="classification", classes=tuple(classes))

    @staticmethod
    def audio_response(data: bytes, fmt: AudioFormat | None = None) -> "LTResponse":
        return LTResponse(kind="audio", audio=AudioPayload(data, fmt or AudioFormat()))

    @staticmethod
    def failure_response(code: str, message: str) -> "LTResponse":
        return LTResponse(kind="failure", failure=(FailureItem(code, message),))

    def to_doc(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "texts":
            doc["texts"] = [t.to_doc() for t in self.texts]
        elif self.kind == "annotations":
            doc["annotations"] = {
                layer: [a.to_doc() for a in anns] for layer, anns in sorted(self.annotations.items())
            }
        elif self.kind == "classification":
            doc["classes"] = [c.to_doc() for c in self.classes]
        elif self.kind == "audio" and self.audio is not None:
            doc["audio"] = self.audio.to_doc()
        elif self.kind == "failure":
            doc["failure"] = [f.to_doc() for f in self.failure]
        return doc


# ----------------------------------------------------------------- wire form

def _canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def serialize_request(req: LTRequest) -> bytes:
    return _canonical_bytes(req.to_doc())


def serialize_response(resp: LTResponse) -> bytes:
    return _canonical_bytes(resp.to_doc())


def _load_doc(data: bytes | str, what: str) -> dict:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InputError(f"{what} is not valid UTF-8: {e}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise InputError(f"{what} is not valid JSON: {e.msg} at line {e.lineno} column {e.colno}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{what} must be a JSON object", field_path="$")
    return doc


def _require_str(doc: dict, key: str, path: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str):
        raise InputError(f"{key} must be a string", field_path=f"{path}.{key}")
    return value


def _check_scalar_map(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise InputError("must be an object", field_path=path)
    for k, v in value.items():
        if not isinstance(k, str):
            raise InputError("keys must be strings", field_path=path)
        if not isinstance(v, (str, int, float, bool)):
            raise InputError(f"value of {k!r} must be a scalar", field_path=f"{path}.{k}")
    return dict(value)


def _parse_audio(doc, path: str) -> AudioPayload:
    if not isinstance(doc, dict):
        raise InputError("audio must be an object", field_path=path)
    unknown = set(doc) - {"payload", "format"}
    if unknown:
        raise InputError(f"unknown audio field(s): {', '.join(sorted(unknown))}", field_path=path)
    payload = _require_str(doc, "payload", path)
    try:
        data = base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as e:
        raise InputError(f"payload is not valid base64: {e}", field_path=f"{path}.payload") from None
    fmt_doc = doc.get("format")
    if not isinstance(fmt_doc, dict):
        raise InputError("format must be an object", field_path=f"{path}.format")
    unknown = set(fmt_doc) - {"encoding", "sample_rate", "channels"}
    if unknown:
        raise InputError(
            f"unknown format field(s): {', '.join(sorted(unknown))}", field_path=f"{path}.format"
        )
    encoding = _require_str(fmt_doc, "encoding", f"{path}.format")
    rate = fmt_doc.get("sample_rate")
    channels = fmt_doc.get("channels")
    if not isinstance(rate, int) or isinstance(rate, bool) or rate <= 0:
        raise InputError("sample_rate must be a positive integer", field_path=f"{path}.format.sample_rate")
    if not isinstance(channels, int) or isinstance(channels, bool) or channels <= 0:
        raise InputError("channels must be a positive integer", field_path=f"{path}.format.channels")
    return AudioPayload(data, AudioFormat(encoding, rate, channels))


def parse_request(data: bytes | str) -> LTRequest:
    doc = _load_doc(data, "request")
    unknown = set(doc) - {"kind", "content", "audio", "params"}
    if unknown:
        raise InputError(f"unknown request field(s): {', '.join(sorted(unknown))}", field_path="$")
    kind = doc.get("kind")
    if kind not in REQUEST_KINDS:
        raise InputError(
            f"request kind must be one of {', '.join(REQUEST_KINDS)}", field_path="$.kind"
        )
    params = _check_scalar_map(doc.get("params", {}), "$.params")
    if kind == "text":
        if "audio" in doc:
            raise InputError("text request may not carry audio", field_path="$.audio")
        content = _require_str(doc, "content", "$")
        return LTRequest(kind="text", content=content, params=params)
    if "content" in doc:
        raise InputError("audio request may not carry content", field_path="$.content")
    if "audio" not in doc:
        raise InputError("audio request requires an audio object", field_path="$.audio")
    return LTRequest(kind="audio", audio=_parse_audio(doc["audio"], "$.audio"), params=params)


def _parse_annotation(doc, path: str) -> Annotation:
    if not isinstance(doc, dict):
        raise InputError("annotation must be an object", field_path=path)
    unknown = set(doc) - {"start", "end", "features"}
    if unknown:
        raise InputError(f"unknown annotation field(s): {', '.join(sorted(unknown))}", field_path=path)
    start, end = doc.get("start"), doc.get("end")
    for name, value in (("start", start), ("end", end)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise InputError(f"{name} must be an integer", field_path=f"{path}.{name}")
    features = _check_scalar_map(doc.get("features", {}), f"{path}.features")
    return Annotation(start=start, end=end, features=features)


def parse_response(data: bytes | str) -> LTResponse:
    doc = _load_doc(data, "response")
    kind = doc.get("kind")
    if kind not in RESPONSE_KINDS:
        raise InputError(
            f"response kind must be one of {', '.join(RESPONSE_KINDS)}", field_path="$.kind"
        )
    variant_key = {"classification": "classes"}.get(kind, kind)
    unknown = set(doc) - {"kind", variant_key}
    if unknown:
        raise InputError(
            f"response of kind {kind} allows only field {variant_key!r}, got: "
            f"{', '.join(sorted(unknown))}",
            field_path="$",
        )
    if variant_key not in doc:
        raise InputError(f"response of kind {kind} requires field {variant_key!r}", field_path="$")

    if kind == "texts":
        items = doc["texts"]
        if not isinstance(items, list):
            raise InputError("texts must be a list", field_path="$.texts")
        parsed = []
        for i, item in enumerate(items):
            path = f"$.texts[{i}]"
            if not isinstance(item, dict):
                raise InputError("text item must be an object", field_path=path)
            unknown = set(item) - {"content", "role", "score"}
            if unknown:
                raise InputError(
                    f"unknown text item field(s): {', '.join(sorted(unknown))}", field_path=path
                )
            content = _require_str(item, "content", path)
            role = item.get("role")
            if role is not None and not isinstance(role, str):
                raise InputError("role must be a string", field_path=f"{path}.role")
            score = item.get("score")
            if score is not None and (isinstance(score, bool) or not isinstance(score, (int, float))):
                raise InputError("score must be a number", field_path=f"{path}.score")
            parsed.append(TextItem(content=content, role=role, score=score))
        return LTResponse(kind="texts", texts=tuple(parsed))

    if kind == "annotations":
        layers = doc["annotations"]
        if not isinstance(layers, dict):
            raise InputError("annotations must be an object", field_path="$.annotations")
        out = {}
        for layer, anns in layers.items():
            path = f"$.annotations.{layer}"
            if not layer:
                raise InputError("layer name must be non-empty", field_path="$.annotations")
            if not isinstance(anns, list):
                raise InputError("layer must hold a list", field_path=path)
            out[layer] = tuple(_parse_annotation(a, f"{path}[{i}]") for i, a in enumerate(anns))
        return LTResponse(kind="annotations", annotations=out)

    if kind == "classification":
        classes = doc["classes"]
        if not isinstance(classes, list):
            raise InputError("classes must be a list", field_path="$.classes")
        parsed = []
        for i, item in enumerate(classes):
            path = f"$.classes[{i}]"
            if not isinstance(item, dict):
                raise InputError("class entry must be an object", field_path=path)
            unknown = set(item) - {"label", "score"}
            if unknown:
                raise InputError(
                    f"unknown class entry field(s): {', '.join(sorted(unknown))}", field_path=path
                )
            label = _require_str(item, "label", path)
            score = item.get("score")
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise InputError("score must be a number", field_path=f"{path}.score")
            parsed.append(ClassScore(label=label, score=float(score)))
        return LTResponse(kind="classification", classes=tuple(parsed))

    if kind == "audio":
        return LTResponse(kind="audio", audio=_parse_audio(doc["audio"], "$.audio"))

    failures = doc["failure"]
    if not isinstance(failures, list) or not failures:
        raise InputError("failure must be a non-empty list", field_path="$.failure")
    parsed = []
    for i, item in enumerate(failures):
        path = f"$.failure[{i}]"
        if not isinstance(item, dict):
            raise InputError("failure entry must be an object", field_path=path)
        unknown = set(item) - {"code", "message"}
        if unknown:
            raise InputError(
                f"unknown failure entry field(s): {', '.join(sorted(unknown))}", field_path=path
            )
        parsed.append(FailureItem(code=_require_str(item, "code", path), message=_require_str(item, "message", path)))
    return LTResponse(kind="failure", failure=tuple(parsed))


# ---------------------------------------------------------------- validators

def validate_request(service_class: ServiceClass, req: LTRequest) -> ValidationReport:
    """Check a parsed request against a service class's contract."""
    issues: list[Issue] = []

    def err(path, msg):
        issues.append(Issue(severity="error", field_path=path, message=msg))

    accepted_kind, _ = CLASS_TABLE[service_class]
    if req.kind != accepted_kind:
        err("$.kind", f"kind mismatch: {service_class.value} accepts {accepted_kind}, got {req.kind}")
    if req.kind == "text":
        if req.content is None:
            err("$.content", "text request requires content")
    elif req.kind == "audio":
        if req.audio is None:
            err("$.audio", "audio request requires a payload")
        else:
            if not req.audio.format.is_supported():
                err(
                    "$.audio.format",
                    f"unsupported audio format {req.audio.format.to_doc()}; "
                    "supported: pcm16/16000/mono",
                )
            elif len(req.audio.data) % 2 != 0:
                err("$.audio.payload", "pcm16 payload must hold whole 16-bit samples")
    if service_class is ServiceClass.MT:
        target = req.params.get("target_lang")
        if not isinstance(target, str) or not target:
            err("$.params.target_lang", "MT requests require params.target_lang")
    return ValidationReport(issues=tuple(issues))


def validate_response(
    service_class: ServiceClass, req: LTRequest, resp: LTResponse
) -> ValidationReport:
    """Check a parsed response against the class table and the request."""
    issues: list[Issue] = []

    def err(path, msg):
        issues.append(Issue(severity="error", field_path=path, message=msg))

    _, allowed = CLASS_TABLE[service_class]
    if resp.kind != "failure" and resp.kind not in allowed:
        err(
            "$.kind",
            f"{service_class.value} may return {', '.join(sorted(allowed))} or failure, got {resp.kind}",
        )

    populated = {
        "texts": bool(resp.texts),
        "annotations": bool(resp.annotations),
        "classification": bool(resp.classes),
        "audio": resp.audio is not None,
        "failure": bool(resp.failure),
    }
    for variant, present in populated.items():
        if variant == resp.kind:
            continue
        if present:
            err("$", f"response of kind {resp.kind} also populates the {variant} variant")
    # empty texts / annotations / classification lists are legal ("nothing
    # found"); audio and failure must actually be present
    if resp.kind == "audio" and resp.audio is None:
        err("$.audio", "audio response requires a payload")
    if resp.kind == "failure" and not resp.failure:
        err("$.failure", "failure response requires at least one entry")

    if resp.kind == "annotations":
        content_len = len(req.content) if req.kind == "text" and req.content is not None else None
        for layer, anns in sorted(resp.annotations.items()):
            for i, ann in enumerate(anns):
                path = f"$.annotations.{layer}[{i}]"
                if ann.start < 0 or ann.end < ann.start:
                    err(path, f"span [{ann.start},{ann.end}) is not ordered")
                elif content_len is not None and ann.end > content_len:
                    err(path, f"span end {ann.end} exceeds content length {content_len}")
    elif resp.kind == "classification":
        for i, cls in enumerate(resp.classes):
            if not 0.0 <= cls.score <= 1.0:
                err(f"$.classes[{i}].score", f"score {cls.score} outside [0,1]")
    elif resp.kind == "audio" and resp.audio is not None:
        if not resp.audio.format.is_supported():
            err("$.audio.format", f"unsupported audio format {resp.audio.format.to_doc()}")
        elif len(resp.audio.data) % 2 != 0:
            err("$.audio.payload", "pcm16 payload must hold whole 16-bit samples")
    elif resp.kind == "failure":
        for i, item in enumerate(resp.failure):
            if item.code not in FAILURE_CODES:
                err(f"$.failure[{i}].code", f"unknown failure code {item.code!r}")
            if not item.message:
                err(f"$.failure[{i}].message", "failure message must be non-empty")
    return ValidationReport(issues=tuple(issues))
