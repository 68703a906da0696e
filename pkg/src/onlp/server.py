"""The untrusted solve server: accepts masked problems, returns solutions.

This module never touches key material or decryption; it depends only on the
problem model, the solver, and the document/wire codecs. One thread serves
each TCP connection; a connection carries one submit frame and receives one
solution or error frame.
"""

from __future__ import annotations

import logging
import os
import socketserver
import threading

from .documents import (
    ErrorDocument,
    ProblemDocument,
    SolutionDocument,
    canonical_bytes,
    document_to_problem,
    parse_problem_document,
)
from .errors import DomainError, OnlpError, ProtocolError
from .solver import SolverConfig, augment, grg_solve
from .wire import MSG_ERROR, MSG_SOLUTION, MSG_SUBMIT_PROBLEM, read_frame, write_frame

__all__ = ["solve_document", "SolveServer", "serve", "parse_bind", "configure_logging"]

logger = logging.getLogger("onlp.server")


def configure_logging() -> None:
    """Set log verbosity from the ONLP_LOG environment variable."""
    level = os.environ.get("ONLP_LOG", "").upper()
    if level:
        logging.basicConfig(level=getattr(logging, level, logging.INFO))


def solve_document(doc: ProblemDocument, config: SolverConfig | None = None) -> SolutionDocument:
    """Solve one problem document; requires a start_point in the document."""
    problem, z0 = document_to_problem(doc)
    if z0 is None:
        raise DomainError("problem document carries no start_point")
    a = augment(problem)
    run = grg_solve(a, a.initial_point(z0), config)
    return SolutionDocument(
        status="solved" if run.solved else "failed",
        z_star=[float(v) for v in run.y_star[: a.n]],
        objective_value=float(run.objective_value),
        iterations=run.outer_iterations,
        solver_wall_time_ms=run.wall_time_s * 1000.0,
        termination=run.termination.value,
    )


class _RequestHandler(socketserver.StreamRequestHandler):
    def handle(self):
        try:
            msg_type, body = read_frame(self.rfile)
        except ProtocolError as exc:
            self._reply_error(str(exc))
            return
        if msg_type != MSG_SUBMIT_PROBLEM:
            self._reply_error(f"expected a submit frame, got type 0x{msg_type:02x}")
            return
        try:
            doc = parse_problem_document(body)
            logger.info(
                "request from %s: kind=%s n=%d m=%d l=%d",
                self.client_address,
                doc.kind,
                doc.dims.n,
                doc.dims.m,
                doc.dims.l,
            )
            reply = solve_document(doc, self.server.solver_config)
        except OnlpError as exc:
            self._reply_error(str(exc))
            return
        except Exception as exc:  # a bad request must never take the server down
            logger.exception("request failed unexpectedly")
            self._reply_error(f"internal error: {exc}")
            return
        logger.info(
            "reply to %s: status=%s iterations=%d wall=%.1fms",
            self.client_address,
            reply.status,
            reply.iterations,
            reply.solver_wall_time_ms,
        )
        try:
            write_frame(self.wfile, MSG_SOLUTION, canonical_bytes(reply))
        except OSError:
            logger.warning("client %s vanished before the reply", self.client_address)

    def _reply_error(self, message: str) -> None:
        logger.warning("rejected request from %s: %s", self.client_address, message)
        try:
            write_frame(self.wfile, MSG_ERROR, canonical_bytes(ErrorDocument(message=message)))
        except OSError:
            pass


class SolveServer(socketserver.ThreadingTCPServer):
    """Threaded TCP server; one worker thread per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], solver_config: SolverConfig | None = None):
        super().__init__(address, _RequestHandler)
        self.solver_config = solver_config or SolverConfig()

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def parse_bind(spec: str) -> tuple[str, int]:
    host, sep, port = spec.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise DomainError(f"bind address must look like HOST:PORT, got {spec!r}")
    return host, int(port)


def serve(bind: str, solver_config: SolverConfig | None = None) -> None:
    """Run the TCP solve server until interrupted (graceful on Ctrl-C)."""
    configure_logging()
    with SolveServer(parse_bind(bind), solver_config) as server:
        host, port = server.server_address[:2]
        logger.info("listening on %s:%d", host, port)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("shutting down")
