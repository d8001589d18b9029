"""Shared error hierarchy. Every error carries a stable machine-readable code."""

from __future__ import annotations


class PictoforgeError(Exception):
    """Base class for all tool errors; `code` is a stable identifier."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ModelError(PictoforgeError):
    """Structural model violation (duplicate names, broken ordinals)."""


class RepoError(PictoforgeError):
    """Store-level failure (NOT_EMPTY, NOT_LOCKED, NO_SUCH_REVISION, ...)."""


class GenError(PictoforgeError):
    """Generator precondition failure (SCHEMA_NOT_FOUND, NO_KEY, ...)."""


class SessionError(PictoforgeError):
    """Prototype session failure (MODEL_HAS_ERRORS, SESSION_NOT_RUNNING, ...)."""


class BusError(PictoforgeError):
    """Event log failure (LOG_IO)."""
