"""Bearer-token authentication: compact JWTs signed with HMAC-SHA256.

Tokens are standard three-part JWTs (header.payload.signature, base64url)
carrying subject, roles and expiry. Verification is strict: unknown
algorithms, missing claims, unknown role names and expired tokens are all
rejected rather than coerced.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import hmac
import json
import time
from dataclasses import dataclass, field

from .errors import AuthenticationError, AuthorizationError, InputError

ROLES = ("provider", "consumer", "admin")

_HEADER = {"alg": "HS256", "typ": "JWT"}


def _b64url(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def _unb64url(text: str) -> bytes:
    pad = "=" * (-len(text) % 4)
    try:
        return base64.urlsafe_b64decode(text + pad)
    except (binascii.Error, ValueError):
        raise AuthenticationError("token is not valid base64url") from None


def _sign(secret: str, signing_input: bytes) -> bytes:
    return hmac.new(secret.encode("utf-8"), signing_input, hashlib.sha256).digest()


@dataclass(frozen=True)
class Principal:
    """An authenticated caller: who they are and what they may do."""

    subject: str
    roles: frozenset = field(default_factory=frozenset)
    token_expiry: float | None = None  # unix seconds

    @property
    def is_admin(self) -> bool:
        return "admin" in self.roles

    @property
    def is_anonymous(self) -> bool:
        return not self.roles and self.subject == "anonymous"

    def has_role(self, *wanted: str) -> bool:
        """True when the principal holds any wanted role; admin implies all."""
        return self.is_admin or bool(self.roles.intersection(wanted))


ANONYMOUS = Principal(subject="anonymous")


def issue_token(
    secret: str,
    subject: str,
    roles,
    ttl: float = 3600.0,
    now: float | None = None,
) -> str:
    """Mint a signed token for `subject` carrying `roles`, valid for `ttl` seconds."""
    if not subject:
        raise InputError("token subject must be non-empty", field_path="subject")
    roles = sorted(set(roles))
    unknown = [r for r in roles if r not in ROLES]
    if unknown:
        raise InputError(f"unknown role(s): {', '.join(unknown)}", field_path="roles")
    if ttl <= 0:
        raise InputError("token ttl must be positive", field_path="ttl")
    issued = time.time() if now is None else now
    payload = {"sub": subject, "roles": roles, "iat": int(issued), "exp": int(issued + ttl)}
    head = _b64url(json.dumps(_HEADER, separators=(",", ":")).encode("utf-8"))
    body = _b64url(json.dumps(payload, separators=(",", ":")).encode("utf-8"))
    signing_input = f"{head}.{body}".encode("ascii")
    return f"{head}.{body}." + _b64url(_sign(secret, signing_input))


def authenticate(token: str, secret: str, now: float | None = None) -> Principal:
    """Verify signature, expiry and claims; return the caller's Principal."""
    if not token:
        raise AuthenticationError("missing bearer token")
    parts = token.split(".")
    if len(parts) != 3:
        raise AuthenticationError("token must have three dot-separated parts")
    head_b64, body_b64, sig_b64 = parts
    signing_input = f"{head_b64}.{body_b64}".encode("ascii")
    expected = _sign(secret, signing_input)
    if not hmac.compare_digest(expected, _unb64url(sig_b64)):
        raise AuthenticationError("token signature does not verify")

    try:
        header = json.loads(_unb64url(head_b64))
        payload = json.loads(_unb64url(body_b64))
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise AuthenticationError("token header/payload is not valid JSON") from None
    if not isinstance(header, dict) or header.get("alg") != "HS256":
        raise AuthenticationError(f"unsupported token algorithm {header.get('alg')!r}"
                                  if isinstance(header, dict) else "malformed token header")
    if not isinstance(payload, dict):
        raise AuthenticationError("malformed token payload")

    subject = payload.get("sub")
    if not isinstance(subject, str) or not subject:
        raise AuthenticationError("token lacks a subject claim")
    roles_claim = payload.get("roles", [])
    if not isinstance(roles_claim, list) or not all(isinstance(r, str) for r in roles_claim):
        raise AuthenticationError("token roles claim must be a list of strings")
    unknown = [r for r in roles_claim if r not in ROLES]
    if unknown:
        raise AuthenticationError(f"token carries unknown role(s): {', '.join(sorted(unknown))}")

    expiry = payload.get("exp")
    if not isinstance(expiry, (int, float)) or isinstance(expiry, bool):
        raise AuthenticationError("token lacks a numeric exp claim")
    current = time.time() if now is None else now
    if current >= expiry:
        raise AuthenticationError("token has expired")

    return Principal(subject=subject, roles=frozenset(roles_claim), token_expiry=float(expiry))


def require_role(principal: Principal, *roles: str):
    """Raise unless the principal holds one of `roles` (admin always passes)."""
    if principal.is_anonymous:
        raise AuthenticationError("this operation requires authentication")
    if not principal.has_role(*roles):
        need = " or ".join(roles)
        raise AuthorizationError(f"requires role {need}; token carries "
                                 + (", ".join(sorted(principal.roles)) or "none"))
