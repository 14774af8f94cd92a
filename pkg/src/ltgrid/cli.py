"""Operator command line: serve the gateway, or run one-shot grid verbs.

One-shot verbs build an in-process grid from the config file, act, and
exit. Catalogue state survives between invocations only when the config
names a catalogue_log; service manifests and usage metering live for one
process, so registering a service for actual traffic happens against a
running `serve` instance over HTTP.

Exit codes: 0 success, 1 domain error (printed as the structured error
document on stderr), 2 usage error.
"""

import argparse
import io
import json
import sys
import wave
from dataclasses import replace
from pathlib import Path

from .config import GridConfig
from .envelopes import LTRequest, serialize_response
from .errors import GridError, InputError
from .gateway import GatewayServer
from .grid import Grid
from .orchestrator import ServiceManifest

AUDIO_FORMAT_HINT = "pcm16, 16000 Hz, mono"


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True, ensure_ascii=False)
    sys.stdout.write("\n")


def _config(args) -> GridConfig:
    return GridConfig.from_file(args.config) if args.config else GridConfig()


def _grid(args) -> Grid:
    return Grid(_config(args))


def _key_value(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key, value


# ------------------------------------------------------------------- verbs


def cmd_serve(args) -> int:
    config = _config(args)
    overrides = {}
    if args.with_samples:
        overrides["with_samples"] = True
    if args.host is not None:
        overrides["host"] = args.host
    if args.port is not None:
        overrides["port"] = args.port
    if overrides:
        config = replace(config, **overrides)
    server = GatewayServer(Grid(config))
    print(f"grid listening on {server.base_url}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("shutting down", file=sys.stderr)
    return 0


def cmd_harvest_run(args) -> int:
    report = _grid(args).harvester.run(args.source)
    _emit(report.to_doc())
    return 0


def cmd_harvest_sources(args) -> int:
    sources = [s.to_doc() for s in _grid(args).harvester.list_sources()]
    _emit({"sources": sources})
    return 0


def cmd_catalogue_search(args) -> int:
    from .catalogue import SearchQuery

    facets: dict[str, list[str]] = {}
    for key, value in args.facet:
        facets.setdefault(key, []).append(value)
    query: dict = {"facets": facets, "offset": args.offset, "limit": args.limit}
    if args.q is not None:
        query["text"] = args.q
    result = _grid(args).catalogue.search(SearchQuery.parse(query))
    _emit(result.to_doc())
    return 0


def cmd_catalogue_show(args) -> int:
    from .canonical import record_to_doc

    record = _grid(args).catalogue.get_record(args.record_id)
    _emit(record_to_doc(record))
    return 0


def cmd_catalogue_export(args) -> int:
    with open(args.path, "wb") as fh:
        count = _grid(args).catalogue.export_stream(fh)
    _emit({"exported": count, "path": args.path})
    return 0


def cmd_catalogue_import(args) -> int:
    grid = _grid(args)
    try:
        fh = open(args.path, "rb")
    except OSError as e:
        raise InputError(f"cannot read {args.path}: {e.strerror}") from None
    with fh:
        count = grid.catalogue.import_stream(fh)
    _emit({"imported": count, "records": len(grid.catalogue)})
    return 0


def cmd_service_register(args) -> int:
    from .canonical import doc_to_record

    try:
        text = Path(args.manifest_file).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {args.manifest_file}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except ValueError as e:
        raise InputError(f"{args.manifest_file} is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "manifest" not in doc or "record" not in doc:
        raise InputError("manifest file must be an object with 'manifest' and 'record'")
    grid = _grid(args)
    manifest = ServiceManifest.from_doc(doc["manifest"])
    record = doc_to_record(doc["record"])
    service_id = grid.orchestrator.register_service(manifest, record)
    registered = grid.orchestrator.get_manifest(service_id)
    _emit({
        "service_id": service_id,
        "record_id": registered.catalogue_record_id,
        "conformance": "unknown",
    })
    return 0


def cmd_service_list(args) -> int:
    grid = _grid(args)
    services = [{
        "service_id": m.service_id,
        "service_class": m.service_class.value,
        "record_id": m.catalogue_record_id,
        "conformance": grid.orchestrator.conformance_status(m.service_id),
    } for m in grid.orchestrator.list_services()]
    _emit({"services": services})
    return 0


def cmd_conformance(args) -> int:
    report = _grid(args).orchestrator.run_service_conformance(args.service)
    doc = report.to_doc()
    doc["service_id"] = args.service
    _emit(doc)
    return 0 if report.passed else 1


def _load_audio(path: str) -> bytes:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    if raw[:4] != b"RIFF":
        return raw  # raw little-endian pcm16 samples
    try:
        with wave.open(io.BytesIO(raw)) as wav:
            shape = (wav.getnchannels(), wav.getsampwidth(), wav.getframerate())
            if shape != (1, 2, 16000):
                raise InputError(
                    f"wav input must be {AUDIO_FORMAT_HINT}; "
                    f"got {shape[0]} channel(s), {shape[1] * 8} bit, {shape[2]} Hz"
                )
            return wav.readframes(wav.getnframes())
    except wave.Error as e:
        raise InputError(f"cannot parse {path} as wav: {e}") from None


def cmd_process(args) -> int:
    params = dict(args.param)
    if args.text is not None:
        request = LTRequest.text(args.text, **params)
    else:
        request = LTRequest.audio_request(_load_audio(args.audio), **params)
    grid = _grid(args)
    ticket = grid.orchestrator.process(args.service, request, principal="cli")
    sys.stdout.write(serialize_response(ticket.response).decode("utf-8") + "\n")
    return 0 if ticket.response.kind != "failure" else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltgrid",
        description="Desk-scale language technology grid",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    sub = parser.add_subparsers(dest="verb", required=True)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--with-samples", action="store_true",
                       help="install and publish the bundled sample services")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.set_defaults(func=cmd_serve)

    harvest = sub.add_parser("harvest", help="metadata harvesting")
    harvest_sub = harvest.add_subparsers(dest="harvest_verb", required=True)
    run = harvest_sub.add_parser("run", help="run one harvest pass")
    run.add_argument("--source", required=True, metavar="ID")
    run.set_defaults(func=cmd_harvest_run)
    harvest_sub.add_parser("sources", help="list harvest sources") \
        .set_defaults(func=cmd_harvest_sources)

    catalogue = sub.add_parser("catalogue", help="catalogue queries and transfer")
    cat_sub = catalogue.add_subparsers(dest="catalogue_verb", required=True)
    search = cat_sub.add_parser("search", help="faceted search")
    search.add_argument("--q", metavar="TEXT", help="free text query")
    search.add_argument("--facet", action="append", default=[], type=_key_value,
                        metavar="NAME=VALUE", help="facet filter, repeatable")
    search.add_argument("--offset", type=int, default=0)
    search.add_argument("--limit", type=int, default=20)
    search.set_defaults(func=cmd_catalogue_search)
    show = cat_sub.add_parser("show", help="print one record")
    show.add_argument("record_id")
    show.set_defaults(func=cmd_catalogue_show)
    export = cat_sub.add_parser("export", help="write all records as a stream file")
    export.add_argument("path")
    export.set_defaults(func=cmd_catalogue_export)
    imp = cat_sub.add_parser("import", help="load records from a stream file")
    imp.add_argument("path")
    imp.set_defaults(func=cmd_catalogue_import)

    service = sub.add_parser("service", help="service registration")
    svc_sub = service.add_subparsers(dest="service_verb", required=True)
    register = svc_sub.add_parser("register",
                                  help="register from a file with 'manifest' and 'record'")
    register.add_argument("manifest_file")
    register.set_defaults(func=cmd_service_register)
    svc_sub.add_parser("list", help="list registered services") \
        .set_defaults(func=cmd_service_list)

    conformance = sub.add_parser("conformance", help="run the conformance battery")
    conformance.add_argument("--service", required=True, metavar="ID")
    conformance.set_defaults(func=cmd_conformance)

    process = sub.add_parser("process", help="send one request to a published service")
    process.add_argument("--service", required=True, metavar="ID")
    payload = process.add_mutually_exclusive_group(required=True)
    payload.add_argument("--text", metavar="TEXT")
    payload.add_argument("--audio", metavar="FILE",
                         help=f"wav or raw samples, {AUDIO_FORMAT_HINT}")
    process.add_argument("--param", action="append", default=[], type=_key_value,
                         metavar="KEY=VALUE", help="request parameter, repeatable")
    process.set_defaults(func=cmd_process)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except GridError as e:
        json.dump(e.to_doc(), sys.stderr, indent=2, sort_keys=True, ensure_ascii=False)
        sys.stderr.write("\n")
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
