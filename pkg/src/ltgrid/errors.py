"""Shared error taxonomy.

Every fault a caller can act on maps to one of these types; the gateway
translates them to HTTP statuses (see docs/http-api.md). Each error carries a
stable machine-readable ``code`` and, where it helps, a ``field_path``.
"""

from __future__ import annotations


class GridError(Exception):
    """Base class for all domain errors."""

    code = "grid.error"

    def __init__(self, message: str, *, field_path: str | None = None):
        super().__init__(message)
        self.message = message
        self.field_path = field_path

    def to_doc(self) -> dict:
        doc = {"code": self.code, "message": self.message}
        if self.field_path is not None:
            doc["field_path"] = self.field_path
        return doc


class InputError(GridError):
    """Malformed or semantically invalid caller input."""

    code = "grid.invalid_input"


class ValidationFailed(InputError):
    """A record failed metadata validation; carries the full report."""

    code = "grid.validation_failed"

    def __init__(self, report, message: str = "record failed validation"):
        first = next((i for i in report.issues if i.severity == "error"), None)
        super().__init__(message, field_path=first.field_path if first else None)
        self.report = report

    def to_doc(self) -> dict:
        doc = super().to_doc()
        doc["issues"] = [i.to_doc() for i in self.report.issues]
        return doc


class NotFound(GridError):
    code = "grid.not_found"


class Conflict(GridError):
    """Duplicate identity, stale version, or an already-taken claim."""

    code = "grid.conflict"


class StaleVersion(Conflict):
    code = "grid.stale_version"

    def __init__(self, message: str, *, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class AuthenticationError(GridError):
    """Missing, expired or otherwise unverifiable credentials (HTTP 401)."""

    code = "grid.unauthenticated"


class AuthorizationError(GridError):
    """Authenticated but not allowed to perform the operation (HTTP 403)."""

    code = "grid.forbidden"


class TransportError(GridError):
    """A remote endpoint (harvest source, runner) could not be reached."""

    code = "grid.transport"
