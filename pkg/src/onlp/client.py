"""Thin client for the TCP solve server."""

from __future__ import annotations

import socket
import time

from .documents import (
    ProblemDocument,
    SolutionDocument,
    canonical_bytes,
    parse_error_document,
    parse_solution_document,
)
from .errors import ConnectError, ProtocolError, RemoteError
from .wire import MSG_ERROR, MSG_SOLUTION, MSG_SUBMIT_PROBLEM, read_frame, write_frame

__all__ = ["submit"]


def submit(
    address: tuple[str, int],
    doc: ProblemDocument,
    timeout: float | None = None,
) -> tuple[SolutionDocument, float]:
    """Send one problem, wait for the reply.

    Returns (solution, round_trip_seconds); the round trip is measured here
    and is independent of the server-reported solve time. Raises ConnectError
    when the server is unreachable, TimeoutError on expiry, RemoteError when
    the server answers with an error document.
    """
    body = canonical_bytes(doc)
    t0 = time.perf_counter()
    try:
        with socket.create_connection(address, timeout=timeout) as sock:
            sock.settimeout(timeout)
            stream = sock.makefile("rwb")
            write_frame(stream, MSG_SUBMIT_PROBLEM, body)
            msg_type, reply = read_frame(stream)
    except (ConnectionRefusedError, socket.gaierror, ConnectionResetError) as exc:
        raise ConnectError(f"cannot reach solve server at {address[0]}:{address[1]}: {exc}") from exc
    round_trip = time.perf_counter() - t0
    if msg_type == MSG_ERROR:
        raise RemoteError(parse_error_document(reply).message)
    if msg_type != MSG_SOLUTION:
        raise ProtocolError(f"unexpected reply type 0x{msg_type:02x}")
    return parse_solution_document(reply), round_trip
