"""Deployment configuration, loaded from one JSON document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError
from .orchestrator import DEFAULT_PROBE_TIMEOUT, DEFAULT_QUEUE_CAPACITY, ScalingPolicy

_KNOWN_KEYS = {
    "host",
    "port",
    "token_secret",
    "dev_token_issuer",
    "with_samples",
    "queue_capacity",
    "probe_timeout",
    "scaling",
    "fixture_dir",
    "catalogue_log",
}


@dataclass(frozen=True)
class GridConfig:
    host: str = "127.0.0.1"
    port: int = 8571
    token_secret: str = "dev-secret-change-me"
    dev_token_issuer: bool = True
    with_samples: bool = False
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY
    probe_timeout: float = DEFAULT_PROBE_TIMEOUT
    #: default scaling for sample installs and manifests that omit a policy
    scaling: ScalingPolicy = field(default_factory=ScalingPolicy)
    #: directory holding the harvest fixture repositories (None = bundled)
    fixture_dir: str | None = None
    #: append-log path for catalogue persistence (None = in-memory only)
    catalogue_log: str | None = None

    def to_doc(self) -> dict:
        return {
            "host": self.host,
            "port": self.port,
            "token_secret": self.token_secret,
            "dev_token_issuer": self.dev_token_issuer,
            "with_samples": self.with_samples,
            "queue_capacity": self.queue_capacity,
            "probe_timeout": self.probe_timeout,
            "scaling": self.scaling.to_doc(),
            "fixture_dir": self.fixture_dir,
            "catalogue_log": self.catalogue_log,
        }

    @staticmethod
    def from_doc(doc) -> "GridConfig":
        if not isinstance(doc, dict):
            raise InputError("config must be a JSON object", field_path="$")
        unknown = set(doc) - _KNOWN_KEYS
        if unknown:
            raise InputError(
                f"unknown config key(s): {', '.join(sorted(unknown))}", field_path="$"
            )
        defaults = GridConfig()

        def _str(key, default, allow_none=False):
            value = doc.get(key, default)
            if value is None and allow_none:
                return None
            if not isinstance(value, str) or (not value and not allow_none):
                raise InputError(f"{key} must be a non-empty string", field_path=key)
            return value

        def _bool(key, default):
            value = doc.get(key, default)
            if not isinstance(value, bool):
                raise InputError(f"{key} must be a boolean", field_path=key)
            return value

        port = doc.get("port", defaults.port)
        if isinstance(port, bool) or not isinstance(port, int) or not 0 <= port <= 65535:
            raise InputError("port must be an integer in 0..65535", field_path="port")
        capacity = doc.get("queue_capacity", defaults.queue_capacity)
        if isinstance(capacity, bool) or not isinstance(capacity, int) or capacity < 1:
            raise InputError("queue_capacity must be a positive integer",
                             field_path="queue_capacity")
        probe = doc.get("probe_timeout", defaults.probe_timeout)
        if isinstance(probe, bool) or not isinstance(probe, (int, float)) or probe <= 0:
            raise InputError("probe_timeout must be positive", field_path="probe_timeout")

        return GridConfig(
            host=_str("host", defaults.host),
            port=port,
            token_secret=_str("token_secret", defaults.token_secret),
            dev_token_issuer=_bool("dev_token_issuer", defaults.dev_token_issuer),
            with_samples=_bool("with_samples", defaults.with_samples),
            queue_capacity=capacity,
            probe_timeout=float(probe),
            scaling=ScalingPolicy.from_doc(doc.get("scaling", {})),
            fixture_dir=_str("fixture_dir", None, allow_none=True),
            catalogue_log=_str("catalogue_log", None, allow_none=True),
        )

    @staticmethod
    def from_file(path) -> "GridConfig":
        p = Path(path)
        if not p.exists():
            raise InputError(f"config file {path} does not exist")
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise InputError(f"config file is not valid JSON: {e}") from None
        return GridConfig.from_doc(doc)
