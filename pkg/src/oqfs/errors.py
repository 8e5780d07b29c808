"""Errors shared by the remote-service clients."""

from __future__ import annotations


class TransportError(RuntimeError):
    """The remote service could not be reached (after bounded retries).

    ``kind`` is ``"timeout"`` or ``"connection"``.
    """

    def __init__(self, message: str, kind: str):
        super().__init__(message)
        self.kind = kind


class ProtocolError(RuntimeError):
    """The remote service replied, but not with a valid protocol message."""

    def __init__(self, message: str, body: str = ""):
        super().__init__(message)
        self.body = body
