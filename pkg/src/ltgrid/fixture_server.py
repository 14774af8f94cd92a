"""HTTP server for the bundled fixture repositories.

Exposes each repository under its own prefix using the harvest list/get
protocol: GET /{name}/list?since=... and GET /{name}/record/{id}. Used by
the harvest tests and demos to exercise the HTTP transport offline.
"""

from __future__ import annotations

import json
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

from .errors import NotFound
from .harvest import HarvestSource, _FileReader

#: name -> (format, fixture filename)
FIXTURE_REPOS = {
    "elra": ("legacy_xml", "elra.xml"),
    "elrc_share": ("legacy_json", "elrc_share.json"),
    "metashare": ("legacy_xml", "metashare.xml"),
    "release1alpha": ("native", "release1alpha.json"),
}


def bundled_fixture_dir() -> Path:
    return Path(str(resources.files("ltgrid").joinpath("fixtures/harvest")))


class _Handler(BaseHTTPRequestHandler):
    server_version = "ltgrid-fixtures/1"

    def log_message(self, format, *args):  # keep test output quiet
        pass

    def _send(self, status: int, body: bytes, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc):
        self._send(status, json.dumps(doc).encode("utf-8"), "application/json")

    def do_GET(self):
        parsed = urllib.parse.urlsplit(self.path)
        parts = [p for p in parsed.path.split("/") if p]
        readers = self.server.readers  # type: ignore[attr-defined]
        if len(parts) >= 2 and parts[0] in readers:
            name, action = parts[0], parts[1]
            reader, format = readers[name]
            if action == "list" and len(parts) == 2:
                query = urllib.parse.parse_qs(parsed.query)
                since = query.get("since", [None])[0]
                pairs = reader.list(since)
                self._send_json(200, [{"id": i, "datestamp": d} for i, d in pairs])
                return
            if action == "record" and len(parts) == 3:
                record_id = urllib.parse.unquote(parts[2])
                try:
                    document = reader.fetch(record_id)
                except NotFound:
                    self._send_json(404, {"code": "not_found", "message": record_id})
                    return
                if format == "legacy_xml":
                    self._send(200, document.encode("utf-8"), "text/xml; charset=utf-8")
                else:
                    self._send_json(200, document)
                return
        self._send_json(404, {"code": "not_found", "message": parsed.path})


class FixtureRepoServer:
    """Serves the bundled repositories on an ephemeral port.

    Usable as a context manager:

        with FixtureRepoServer() as server:
            source = server.source("elra")
    """

    def __init__(self, repo_dir: Path | None = None, host: str = "127.0.0.1", port: int = 0):
        self.repo_dir = Path(repo_dir) if repo_dir else bundled_fixture_dir()
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.readers = {}  # type: ignore[attr-defined]
        for name, (format, filename) in FIXTURE_REPOS.items():
            path = self.repo_dir / filename
            if not path.exists():
                continue
            probe = HarvestSource(id=name, format=format, locator=str(path))
            self._httpd.readers[name] = (_FileReader(probe), format)  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def base(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def base_url(self, name: str) -> str:
        if name not in FIXTURE_REPOS:
            raise NotFound(f"no fixture repository {name!r}")
        return f"{self.base}/{name}"

    def source(self, name: str) -> HarvestSource:
        """A ready-made HTTP HarvestSource for one bundled repository."""
        format, _ = FIXTURE_REPOS[name]
        return HarvestSource(id=name, format=format, locator=self.base_url(name))

    def start(self) -> "FixtureRepoServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "FixtureRepoServer":
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def file_source(name: str, repo_dir: Path | None = None) -> HarvestSource:
    """A file-backed HarvestSource for one bundled repository."""
    if name not in FIXTURE_REPOS:
        raise NotFound(f"no fixture repository {name!r}")
    format, filename = FIXTURE_REPOS[name]
    directory = Path(repo_dir) if repo_dir else bundled_fixture_dir()
    return HarvestSource(id=name, format=format, locator=str(directory / filename))
