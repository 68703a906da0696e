"""First-order optimality verification for the client.

Given a candidate point, the verifier measures feasibility, solves a least
squares system for the multipliers of the equalities and the active
inequalities/bounds, and accepts only if the stationarity residual and the
multiplier signs pass at the requested tolerance. A cheating server that
returns a non-optimal point fails at least one of the three checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError
from .model import NlpProblem, as_vector

__all__ = ["VerificationReport", "verify_kkt", "feasibility_residual"]


@dataclass(frozen=True, eq=False)
class VerificationReport:
    accepted: bool
    feasibility_residual: float
    stationarity_residual: float
    complementarity_residual: float
    min_ineq_multiplier: float
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray
    lower_multipliers: np.ndarray
    upper_multipliers: np.ndarray
    tol: float = field(default=1e-6)


def feasibility_residual(problem: NlpProblem, x: np.ndarray) -> float:
    """Worst constraint violation at x (equalities, inequalities, bounds)."""
    x = as_vector(x, problem.n, name="point")
    worst = 0.0
    if problem.m:
        worst = float(np.abs(problem.eq_matrix @ x - problem.eq_rhs).max())
    for j, form in enumerate(problem.ineqs):
        worst = max(worst, form.value(x) - float(problem.ineq_rhs[j]))
    finite_lo = np.isfinite(problem.lower)
    finite_up = np.isfinite(problem.upper)
    if finite_lo.any():
        worst = max(worst, float((problem.lower[finite_lo] - x[finite_lo]).max()))
    if finite_up.any():
        worst = max(worst, float((x[finite_up] - problem.upper[finite_up]).max()))
    return worst


def verify_kkt(problem: NlpProblem, x_star: np.ndarray, tol: float = 1e-6) -> VerificationReport:
    """Check first-order optimality of ``x_star`` at tolerance ``tol``.

    Constraints within ``tol`` of their boundary count as active. Multipliers
    come from a least-squares stationarity solve; inactive constraints carry
    zero multipliers. Acceptance requires feasibility <= tol, stationarity
    residual <= tol * (1 + ||grad f||_inf), and every inequality and bound
    multiplier >= -tol.
    """
    if not (tol > 0 and np.isfinite(tol)):
        raise DomainError("tol must be positive and finite")
    x = as_vector(x_star, problem.n, name="x_star")
    n, m, l = problem.n, problem.m, problem.l

    feas = feasibility_residual(problem, x)
    grad = problem.objective.gradient(x)

    ineq_vals = np.array([form.value(x) for form in problem.ineqs], dtype=np.float64)
    active_ineq = (
        np.nonzero(ineq_vals >= problem.ineq_rhs - tol)[0] if l else np.zeros(0, dtype=np.int64)
    )
    lo, up = problem.lower, problem.upper
    active_lo = np.nonzero(np.isfinite(lo) & (x <= lo + tol))[0]
    active_up = np.nonzero(np.isfinite(up) & (x >= up - tol))[0]

    # Stationarity: grad f + G^T lam + sum mu_j grad h_j - nu + xi = 0, with
    # mu, nu, xi >= 0 for the active inequalities and bounds.
    cols: list[np.ndarray] = []
    if m:
        cols.append(problem.eq_matrix.T)
    for j in active_ineq:
        cols.append(problem.ineqs[j].gradient(x)[:, None])
    for k in active_lo:
        e = np.zeros((n, 1))
        e[k, 0] = -1.0
        cols.append(e)
    for k in active_up:
        e = np.zeros((n, 1))
        e[k, 0] = 1.0
        cols.append(e)

    if cols:
        a = np.hstack(cols)
        mult = scipy.linalg.lstsq(a, -grad, lapack_driver="gelsy", check_finite=False)[0]
        stationarity = float(np.abs(grad + a @ mult).max())
    else:
        mult = np.zeros(0)
        stationarity = float(np.abs(grad).max()) if n else 0.0

    eq_mult = mult[:m]
    pos = m
    ineq_mult = np.zeros(l)
    for j in active_ineq:
        ineq_mult[j] = mult[pos]
        pos += 1
    lo_mult = np.zeros(n)
    for k in active_lo:
        lo_mult[k] = mult[pos]
        pos += 1
    up_mult = np.zeros(n)
    for k in active_up:
        up_mult[k] = mult[pos]
        pos += 1

    comp = 0.0
    signed = []
    for j in active_ineq:
        comp = max(comp, abs(ineq_mult[j] * (ineq_vals[j] - problem.ineq_rhs[j])))
        signed.append(ineq_mult[j])
    for k in active_lo:
        comp = max(comp, abs(lo_mult[k] * (lo[k] - x[k])))
        signed.append(lo_mult[k])
    for k in active_up:
        comp = max(comp, abs(up_mult[k] * (x[k] - up[k])))
        signed.append(up_mult[k])
    min_mult = float(min(signed)) if signed else 0.0

    grad_scale = float(np.abs(grad).max()) if n else 0.0
    accepted = (
        feas <= tol
        and stationarity <= tol * (1.0 + grad_scale)
        and min_mult >= -tol
    )
    return VerificationReport(
        accepted=bool(accepted),
        feasibility_residual=feas,
        stationarity_residual=stationarity,
        complementarity_residual=comp,
        min_ineq_multiplier=min_mult,
        eq_multipliers=eq_mult,
        ineq_multipliers=ineq_mult,
        lower_multipliers=lo_mult,
        upper_multipliers=up_mult,
        tol=tol,
    )
