"""Length-prefixed TCP framing.

A frame is a 4-byte big-endian body length, one message-type byte, then the
UTF-8 document body. Unknown type bytes and short reads raise ProtocolError.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

from .errors import ProtocolError

__all__ = [
    "MSG_SUBMIT_PROBLEM",
    "MSG_SOLUTION",
    "MSG_ERROR",
    "MAX_BODY_BYTES",
    "write_frame",
    "read_frame",
]

MSG_SUBMIT_PROBLEM = 0x01
MSG_SOLUTION = 0x02
MSG_ERROR = 0x03
_KNOWN_TYPES = frozenset({MSG_SUBMIT_PROBLEM, MSG_SOLUTION, MSG_ERROR})

MAX_BODY_BYTES = 1 << 31  # sanity cap; anything larger is a framing error


def write_frame(stream: BinaryIO, msg_type: int, body: bytes) -> None:
    if msg_type not in _KNOWN_TYPES:
        raise ProtocolError(f"unknown message type 0x{msg_type:02x}")
    if len(body) > MAX_BODY_BYTES:
        raise ProtocolError(f"body of {len(body)} bytes exceeds the frame limit")
    stream.write(struct.pack(">I", len(body)) + bytes([msg_type]) + body)
    stream.flush()


def _read_exact(stream: BinaryIO, count: int, what: str) -> bytes:
    buf = bytearray()
    while len(buf) < count:
        chunk = stream.read(count - len(buf))
        if not chunk:
            raise ProtocolError(f"stream ended after {len(buf)} of {count} {what} bytes")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(stream: BinaryIO) -> tuple[int, bytes]:
    """Read one frame, returning (message type, body bytes)."""
    header = _read_exact(stream, 5, "header")
    (length,) = struct.unpack(">I", header[:4])
    msg_type = header[4]
    if msg_type not in _KNOWN_TYPES:
        raise ProtocolError(f"unknown message type 0x{msg_type:02x}")
    if length > MAX_BODY_BYTES:
        raise ProtocolError(f"frame announces {length} bytes, above the limit")
    return msg_type, _read_exact(stream, length, "body")
