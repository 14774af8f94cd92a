"""Deterministic built-in sample services, one or more per service class."""

from .services import BUILTIN_SERVICES, BuiltinService

__all__ = ["BUILTIN_SERVICES", "BuiltinService"]
