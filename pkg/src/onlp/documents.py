"""Problem and solution documents with a canonical JSON byte encoding.

The models are the request/response schemas of the solve service; the
canonical encoder fixes the field order and uses shortest round-trip float
literals, so identical documents always serialize to identical bytes.
Infinite bounds travel as the sentinels "+inf" and "-inf".
"""

from __future__ import annotations

import json
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ValidationError

from .errors import ParseError
from .model import NlpProblem, QuadraticForm

__all__ = [
    "DimsBlock",
    "QuadraticPayload",
    "InequalityPayload",
    "EqualityBlock",
    "BoundsBlock",
    "ProblemDocument",
    "SolutionDocument",
    "ErrorDocument",
    "canonical_bytes",
    "problem_to_document",
    "document_to_problem",
    "parse_problem_document",
    "parse_solution_document",
    "parse_error_document",
]

DOCUMENT_VERSION = 1

Bound = Literal["+inf", "-inf"] | float


class DimsBlock(BaseModel):
    n: int
    m: int
    l: int


class QuadraticPayload(BaseModel):
    # A nested list is the dense matrix; a flat list is its diagonal.
    quad: list[list[float]] | list[float]
    lin: list[float]
    const: float = 0.0


class InequalityPayload(BaseModel):
    quad: list[list[float]] | list[float]
    lin: list[float]
    rhs: float


class EqualityBlock(BaseModel):
    matrix: list[list[float]]
    rhs: list[float]


class BoundsBlock(BaseModel):
    lower: list[Bound]
    upper: list[Bound]


class ProblemDocument(BaseModel):
    version: int = DOCUMENT_VERSION
    kind: Literal["plain", "encrypted"]
    dims: DimsBlock
    objective: QuadraticPayload
    equalities: EqualityBlock
    inequalities: list[InequalityPayload]
    bounds: BoundsBlock
    start_point: list[float] | None = None


class SolutionDocument(BaseModel):
    version: int = DOCUMENT_VERSION
    status: Literal["solved", "failed"]
    z_star: list[float] | None = None
    objective_value: float | None = None
    iterations: int = 0
    solver_wall_time_ms: float = 0.0
    termination: str = ""


class ErrorDocument(BaseModel):
    version: int = DOCUMENT_VERSION
    message: str


def canonical_bytes(model: BaseModel) -> bytes:
    """Serialize with fixed field order, compact separators, no NaN/inf."""
    payload = model.model_dump(exclude_none=True)
    return json.dumps(payload, separators=(",", ":"), allow_nan=False).encode()


def _reject_constant(token: str):
    raise ParseError(f"non-finite JSON literal {token!r} is not allowed")


def _loads(data: bytes):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("document is not valid UTF-8", offset=exc.start) from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, offset=exc.pos) from exc


def _validate(model_cls, obj):
    try:
        return model_cls.model_validate(obj)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(part) for part in first["loc"]) or "$"
        raise ParseError(first["msg"], path=path) from exc


def parse_problem_document(data: bytes) -> ProblemDocument:
    return _validate(ProblemDocument, _loads(data))


def parse_solution_document(data: bytes) -> SolutionDocument:
    return _validate(SolutionDocument, _loads(data))


def parse_error_document(data: bytes) -> ErrorDocument:
    return _validate(ErrorDocument, _loads(data))


def _quad_payload(q: np.ndarray) -> list:
    return q.tolist()


def _bound_out(v: float) -> float | str:
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return float(v)


def _bound_in(v: float | str) -> float:
    if v == "+inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


def problem_to_document(
    problem: NlpProblem,
    kind: Literal["plain", "encrypted"],
    start_point: np.ndarray | None = None,
) -> ProblemDocument:
    """Render a problem as a document; inequality constants fold into rhs."""
    ineqs = [
        InequalityPayload(
            quad=_quad_payload(form.quad),
            lin=form.lin.tolist(),
            rhs=float(problem.ineq_rhs[j] - form.const),
        )
        for j, form in enumerate(problem.ineqs)
    ]
    return ProblemDocument(
        kind=kind,
        dims=DimsBlock(n=problem.n, m=problem.m, l=problem.l),
        objective=QuadraticPayload(
            quad=_quad_payload(problem.objective.quad),
            lin=problem.objective.lin.tolist(),
            const=float(problem.objective.const),
        ),
        equalities=EqualityBlock(
            matrix=[row.tolist() for row in problem.eq_matrix],
            rhs=problem.eq_rhs.tolist(),
        ),
        inequalities=ineqs,
        bounds=BoundsBlock(
            lower=[_bound_out(v) for v in problem.lower],
            upper=[_bound_out(v) for v in problem.upper],
        ),
        start_point=None if start_point is None else [float(v) for v in start_point],
    )


def _quad_array(payload, n: int, path: str) -> np.ndarray:
    try:
        q = np.asarray(payload, dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"quad is ragged: {exc}", path=path) from exc
    if q.ndim == 1:
        if q.shape[0] != n:
            raise ParseError(f"diagonal quad has length {q.shape[0]}, expected {n}", path=path)
    elif q.ndim == 2:
        if q.shape != (n, n):
            raise ParseError(f"quad has shape {q.shape}, expected ({n}, {n})", path=path)
    else:
        raise ParseError("quad must be a matrix or a diagonal", path=path)
    return q


def document_to_problem(doc: ProblemDocument) -> tuple[NlpProblem, np.ndarray | None]:
    """Reconstruct the problem and optional start point from a document."""
    n, m, l = doc.dims.n, doc.dims.m, doc.dims.l
    if n < 1 or m < 0 or l < 0:
        raise ParseError(f"invalid dims ({n}, {m}, {l})", path="dims")
    if len(doc.objective.lin) != n:
        raise ParseError(f"objective lin has length {len(doc.objective.lin)}, expected {n}", path="objective.lin")
    objective = QuadraticForm(
        quad=_quad_array(doc.objective.quad, n, "objective.quad"),
        lin=np.asarray(doc.objective.lin, dtype=np.float64),
        const=doc.objective.const,
    )
    if m:
        if len(doc.equalities.matrix) != m or any(len(row) != n for row in doc.equalities.matrix):
            raise ParseError("equality matrix shape does not match dims", path="equalities.matrix")
        matrix = np.asarray(doc.equalities.matrix, dtype=np.float64)
    else:
        matrix = np.zeros((0, n))
    rhs = np.asarray(doc.equalities.rhs, dtype=np.float64)
    if rhs.shape[0] != m:
        raise ParseError(f"equality rhs has length {rhs.shape[0]}, expected {m}", path="equalities.rhs")
    if len(doc.inequalities) != l:
        raise ParseError(f"{len(doc.inequalities)} inequalities, dims say {l}", path="inequalities")
    forms = []
    ineq_rhs = np.empty(l)
    for j, entry in enumerate(doc.inequalities):
        if len(entry.lin) != n:
            raise ParseError(f"inequality {j} lin has wrong length", path=f"inequalities.{j}.lin")
        forms.append(
            QuadraticForm(
                quad=_quad_array(entry.quad, n, f"inequalities.{j}.quad"),
                lin=np.asarray(entry.lin, dtype=np.float64),
            )
        )
        ineq_rhs[j] = entry.rhs
    if len(doc.bounds.lower) != n or len(doc.bounds.upper) != n:
        raise ParseError("bounds length does not match dims", path="bounds")
    lower = np.array([_bound_in(v) for v in doc.bounds.lower])
    upper = np.array([_bound_in(v) for v in doc.bounds.upper])
    start = None
    if doc.start_point is not None:
        if len(doc.start_point) != n:
            raise ParseError("start_point length does not match dims", path="start_point")
        start = np.asarray(doc.start_point, dtype=np.float64)
    problem = NlpProblem(
        objective=objective,
        eq_matrix=matrix,
        eq_rhs=rhs,
        ineqs=tuple(forms),
        ineq_rhs=ineq_rhs,
        lower=lower,
        upper=upper,
    )
    return problem, start
