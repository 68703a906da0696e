"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "OnlpError",
    "DomainError",
    "SingularMatrix",
    "BasisFailure",
    "RestorationFailed",
    "ParseError",
    "ProtocolError",
    "ConnectError",
    "RemoteError",
]


class OnlpError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OnlpError, ValueError):
    """Input violates a documented precondition (shape, range, or value)."""


class SingularMatrix(OnlpError):
    """A linear system's pivot fell below the singularity tolerance."""


class BasisFailure(OnlpError):
    """No nonsingular basic column set exists at the current point."""


class RestorationFailed(OnlpError):
    """Feasibility restoration did not converge within its iteration budget."""


class ParseError(OnlpError):
    """A document or key file could not be decoded.

    ``offset`` is the byte offset of the failure when the underlying JSON
    was malformed; ``path`` is the field path when the structure was wrong.
    """

    def __init__(self, message: str, *, offset: int | None = None, path: str | None = None):
        detail = message
        if offset is not None:
            detail += f" (byte offset {offset})"
        if path is not None:
            detail += f" (field {path})"
        super().__init__(detail)
        self.offset = offset
        self.path = path


class ProtocolError(OnlpError):
    """A wire frame violated the framing rules (bad type byte, bad length)."""


class ConnectError(OnlpError, ConnectionError):
    """The solve server could not be reached."""


class RemoteError(OnlpError):
    """The solve server replied with an error document."""
