"""HTTP facade over the solve core.

Exposes the same documents as the TCP protocol through a FastAPI app:
POST /v1/solve takes a ProblemDocument and returns a SolutionDocument.
Run with ``uvicorn onlp.service:app`` or ``onlp serve-http``.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .documents import ProblemDocument, SolutionDocument
from .errors import DomainError, OnlpError, ParseError
from .server import solve_document
from .solver import SolverConfig

__all__ = ["create_app", "app"]


def create_app(config: SolverConfig | None = None) -> FastAPI:
    cfg = config or SolverConfig()
    application = FastAPI(title="onlp solve service", version="0.1.0")

    @application.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @application.post("/v1/solve", response_model=SolutionDocument, response_model_exclude_none=True)
    def solve(document: ProblemDocument) -> SolutionDocument:
        try:
            return solve_document(document, cfg)
        except (DomainError, ParseError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except OnlpError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    return application


app = create_app()
