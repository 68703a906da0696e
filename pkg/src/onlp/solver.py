"""Reduced-gradient solver over slack-augmented problems.

The inequality block is converted to equalities with nonnegative slacks, the
variable set is split into a basic part (square, nonsingular Jacobian block)
and a nonbasic part, and each iteration moves the nonbasic variables along
the clamped negative reduced gradient, restoring the basic variables with a
chord Newton iteration. A step is accepted only if it stays inside the bounds
and strictly decreases the objective.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import BasisFailure, DomainError, RestorationFailed, SingularMatrix
from .linalg import LuFactors, factor_square
from .model import NlpProblem, QuadraticForm, as_vector

__all__ = [
    "SolverConfig",
    "Termination",
    "IterateRecord",
    "SolverRun",
    "AugmentedProblem",
    "augment",
    "BasisPartition",
    "select_basis",
    "reduced_gradient",
    "nonbasic_direction",
    "basic_direction",
    "newton_restore",
    "grg_solve",
    "gradient_descent",
]

# Rank/pivot tolerance for basis selection, relative to the largest pivot.
RANK_TOL = 1e-10
# A variable this close to a bound (relative) counts as sitting on it.
BOUND_SNAP = 1e-12
DEGENERACY_TOL = 1e-9
# Relative distance-to-bound below which a column is demoted during basis
# selection; inside the band the demotion ramps linearly down to 1e-6.
NEAR_BOUND_BAND = 1e-2
# Safety multiple on the per-step noise estimate (rounding of the objective
# difference plus multiplier-weighted manifold residual). A computed decrease
# below the resulting floor could mask a true increase and does not count as
# strict descent; accepting such steps lets the iteration coast on rounding
# luck for hundreds of iterations near the optimum.
DECREASE_FLOOR = 8.0
# Sufficient-decrease fraction for step acceptance. Accepting on any strict
# decrease lets a unit step whose direction aligns with curvature mu in
# (1, 2) bounce across the valley with contraction |1 - mu| per iteration;
# requiring a fixed fraction of the first-order prediction forces one
# halving instead, which lands near the exact line minimum.
ARMIJO_C1 = 0.1
# Pivot priority for interior slack columns. Basic slacks absorb their
# inequality rows without moving any structural variable, which keeps the
# reduced Hessian's conditioning at the objective's own; leaving a live
# slack nonbasic injects a near-flat direction instead.
SLACK_TIER = 4.0
# A direction computed with reused (stale) factors must still sit in the
# constraint null space well below the 1e-9 working invariant; once the
# refined residual crosses this gate the factors get rebuilt.
CHORD_RESIDUAL_GATE = 1e-10


def _l1(v: np.ndarray) -> float:
    return float(np.abs(v).sum()) if v.size else 0.0


class Termination(str, Enum):
    DIRECTION_BELOW_EPS = "direction_below_eps"
    MAX_ITERATIONS = "max_iterations"
    RESTORATION_FAILED = "restoration_failed"
    BASIS_FAILURE = "basis_failure"


@dataclass(frozen=True)
class SolverConfig:
    """Iteration tolerances and budgets.

    ``max_outer=None`` resolves to 10 * (n + l) for the problem being solved.
    """

    eps_direction: float = 1e-6
    eps_feas: float = 1e-8
    lambda_init: float = 1.0
    halving: float = 0.5
    max_outer: int | None = None
    max_newton: int = 50
    max_halvings: int = 40

    def __post_init__(self):
        if not (self.eps_direction > 0 and self.eps_feas > 0 and self.lambda_init > 0):
            raise DomainError("tolerances and lambda_init must be positive")
        if not (0.0 < self.halving < 1.0):
            raise DomainError("halving factor must lie in (0, 1)")
        if self.max_outer is not None and self.max_outer < 1:
            raise DomainError("max_outer must be positive when given")
        if self.max_newton < 1 or self.max_halvings < 1:
            raise DomainError("iteration budgets must be positive")


@dataclass(frozen=True)
class IterateRecord:
    """Diagnostics for one accepted outer iterate.

    ``decrease`` is the objective drop achieved by the step, computed in
    difference form; it is strictly positive on every accepted iterate even
    when the two recorded objective values round to the same float.
    """

    index: int
    objective: float
    feasibility_norm1: float
    direction_norm1: float
    jd_residual_inf: float
    grad_dot_dir: float
    step_lambda: float
    halvings: int
    newton_iterations: int
    decrease: float = 0.0


@dataclass(frozen=True, eq=False)
class SolverRun:
    y_star: np.ndarray
    objective_value: float
    outer_iterations: int
    newton_iterations_total: int
    termination: Termination
    wall_time_s: float
    trace: tuple[IterateRecord, ...] = field(default=())

    @property
    def solved(self) -> bool:
        return self.termination is Termination.DIRECTION_BELOW_EPS


@dataclass(frozen=True, eq=False)
class AugmentedProblem:
    """A problem in y = (z, s): equalities G z = b and h_j(z) + s_j = rhs_j
    with bounds on z and s >= 0. The objective ignores the slacks."""

    base: NlpProblem
    lower: np.ndarray
    upper: np.ndarray
    _diag_stack: np.ndarray | None
    _lin_stack: np.ndarray | None
    _const_stack: np.ndarray | None

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def l(self) -> int:
        return self.base.l

    @property
    def dim(self) -> int:
        return self.base.n + self.base.l

    def objective_value(self, y: np.ndarray) -> float:
        return self.base.objective.value(y[: self.n])

    def objective_gradient(self, y: np.ndarray) -> np.ndarray:
        g = np.zeros(self.dim)
        g[: self.n] = self.base.objective.gradient(y[: self.n])
        return g

    def objective_change(self, y_from: np.ndarray, y_to: np.ndarray) -> float:
        """f(y_to) - f(y_from) in difference form.

        Subtracting two nearby objective values cancels; expanding the
        quadratic along the step keeps the change accurate down to the
        last decimals, which the line search needs near the optimum.
        """
        dz = y_to[: self.n] - y_from[: self.n]
        form = self.base.objective
        lin_term = float(form.gradient(y_from[: self.n]) @ dz)
        return lin_term + 0.5 * float(dz @ form.quad_matvec(dz))

    def ineq_values(self, z: np.ndarray) -> np.ndarray:
        """Values h_j(z) of the inequality forms (without slack or rhs)."""
        if self.l == 0:
            return np.zeros(0)
        if self._diag_stack is not None:
            return (
                0.5 * (self._diag_stack @ (z * z))
                + self._lin_stack @ z
                + self._const_stack
            )
        return np.array([f.value(z) for f in self.base.ineqs], dtype=np.float64)

    def constraint_values(self, y: np.ndarray) -> np.ndarray:
        z, s = y[: self.n], y[self.n :]
        vals = np.empty(self.m + self.l)
        vals[: self.m] = self.base.eq_matrix @ z - self.base.eq_rhs
        if self.l:
            vals[self.m :] = self.ineq_values(z) + s - self.base.ineq_rhs
        return vals

    def jacobian(self, y: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Constraint Jacobian at y; pass a previous result as ``out`` to
        rewrite only the state-dependent block."""
        z = y[: self.n]
        if out is None:
            out = np.zeros((self.m + self.l, self.dim))
            out[: self.m, : self.n] = self.base.eq_matrix
            if self.l:
                out[self.m :, self.n :] = np.eye(self.l)
        if self.l:
            if self._diag_stack is not None:
                np.multiply(self._diag_stack, z[None, :], out=out[self.m :, : self.n])
                out[self.m :, : self.n] += self._lin_stack
            else:
                for j, form in enumerate(self.base.ineqs):
                    out[self.m + j, : self.n] = form.gradient(z)
        return out

    def slack_for(self, z: np.ndarray) -> np.ndarray:
        """Slack values that make the inequality rows exact at z."""
        z = as_vector(z, self.n, name="point")
        return self.base.ineq_rhs - self.ineq_values(z)

    def initial_point(self, z0: np.ndarray) -> np.ndarray:
        """Assemble y0 = (z0, slack_for(z0)); z0 must be feasible."""
        z0 = as_vector(z0, self.n, name="start point")
        return np.concatenate([z0, self.slack_for(z0)])


def augment(problem: NlpProblem) -> AugmentedProblem:
    """Attach one nonnegative slack per inequality, yielding equalities only."""
    l = problem.l
    lower = np.concatenate([problem.lower, np.zeros(l)])
    upper = np.concatenate([problem.upper, np.full(l, np.inf)])
    diag_stack = lin_stack = const_stack = None
    if l and all(f.is_diagonal for f in problem.ineqs):
        diag_stack = np.vstack([f.quad for f in problem.ineqs])
        lin_stack = np.vstack([f.lin for f in problem.ineqs])
        const_stack = np.array([f.const for f in problem.ineqs], dtype=np.float64)
    return AugmentedProblem(
        base=problem,
        lower=lower,
        upper=upper,
        _diag_stack=diag_stack,
        _lin_stack=lin_stack,
        _const_stack=const_stack,
    )


@dataclass(frozen=True, eq=False)
class BasisPartition:
    """Index split of y into basic (square nonsingular block) and nonbasic."""

    basic: np.ndarray
    nonbasic: np.ndarray

    def __post_init__(self):
        basic = np.asarray(self.basic, dtype=np.int64)
        nonbasic = np.asarray(self.nonbasic, dtype=np.int64)
        total = basic.size + nonbasic.size
        combined = np.concatenate([basic, nonbasic])
        if np.unique(combined).size != total:
            raise DomainError("basis partition indices must be disjoint")
        if total and (combined.min() < 0 or combined.max() >= total):
            raise DomainError("basis partition must cover 0..dim-1")
        object.__setattr__(self, "basic", basic)
        object.__setattr__(self, "nonbasic", nonbasic)


def _interior_distance(y: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.minimum(y - lower, upper - y)


def select_basis(a: AugmentedProblem, y: np.ndarray, jac: np.ndarray | None = None) -> BasisPartition:
    """Choose m+l basic variables at y.

    Jacobian rows are equilibrated (so constraint scaling cannot sway the
    choice), columns normalized, then run through column-pivoted QR so the
    pivot order tracks conditioning of the basic block. Variables at or
    near a bound are demoted (they would go degenerate immediately),
    strictly interior slacks rank first, and a small boost prefers the more
    interior column among otherwise equal ones. Raises BasisFailure when no
    nonsingular basic block exists.
    """
    y = as_vector(y, a.dim, name="point", allow_inf=False)
    k = a.m + a.l
    if k == 0:
        return BasisPartition(basic=np.zeros(0, dtype=np.int64), nonbasic=np.arange(a.dim))
    j = a.jacobian(y) if jac is None else jac
    row_norms = np.linalg.norm(j, axis=1)
    jw = j / np.maximum(row_norms, 1e-300)[:, None]
    norms = np.linalg.norm(jw, axis=0)
    dist = _interior_distance(y, a.lower, a.upper)
    band = NEAR_BOUND_BAND * (1.0 + np.abs(y))
    ramp = np.where(np.isfinite(dist), np.minimum(dist / band, 1.0), 1.0)
    ramp = np.maximum(ramp, 1e-6)
    capped = np.where(np.isfinite(dist), dist, 1e6)
    tiebreak = 1.0 + 1e-3 * capped / (1.0 + capped)
    weight = ramp * tiebreak
    weight[a.n :] *= SLACK_TIER
    scale = np.divide(weight, norms, out=np.zeros_like(weight), where=norms > 0)
    r, jpvt = scipy.linalg.qr(jw * scale[None, :], mode="r", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(r))
    if diag.size < k or diag[:k].min() <= RANK_TOL * diag[0]:
        raise BasisFailure(f"Jacobian row rank below {k} at the current point")
    basic = np.sort(jpvt[:k])
    mask = np.ones(a.dim, dtype=bool)
    mask[basic] = False
    return BasisPartition(basic=basic, nonbasic=np.nonzero(mask)[0])


def _reduced_gradient(
    j: np.ndarray, grad: np.ndarray, part: BasisPartition, factors: LuFactors | None
) -> np.ndarray:
    gn = grad[part.nonbasic]
    if part.basic.size == 0:
        return gn.copy()
    pi = factors.solve(grad[part.basic], trans=1)
    return gn - (pi @ j)[part.nonbasic]


def reduced_gradient(a: AugmentedProblem, y: np.ndarray, part: BasisPartition) -> np.ndarray:
    """Gradient of the objective along the nonbasic variables, holding the
    constraints to first order: r = grad_N f - grad_B f (E_B^-1 E_N)."""
    j = a.jacobian(y)
    grad = a.objective_gradient(y)
    factors = factor_square(j[:, part.basic]) if part.basic.size else None
    return _reduced_gradient(j, grad, part, factors)


def nonbasic_direction(
    a: AugmentedProblem, r: np.ndarray, y: np.ndarray, part: BasisPartition
) -> np.ndarray:
    """Clamped steepest-descent direction: d_i = -r_i, zeroed where the
    variable sits on the bound the step would cross."""
    yn = y[part.nonbasic]
    lo = a.lower[part.nonbasic]
    up = a.upper[part.nonbasic]
    d = -np.asarray(r, dtype=np.float64)
    lo_tol = np.where(np.isfinite(lo), DEGENERACY_TOL * (1.0 + np.abs(lo)), 0.0)
    up_tol = np.where(np.isfinite(up), DEGENERACY_TOL * (1.0 + np.abs(up)), 0.0)
    at_lo = np.isfinite(lo) & (yn <= lo + lo_tol)
    at_up = np.isfinite(up) & (yn >= up - up_tol)
    d[at_lo & (d < 0)] = 0.0
    d[at_up & (d > 0)] = 0.0
    return d


def basic_direction(
    a: AugmentedProblem, y: np.ndarray, part: BasisPartition, d_n: np.ndarray
) -> np.ndarray:
    """Basic components keeping the linearized constraints: E_B d_B = -E_N d_N."""
    if part.basic.size == 0:
        return np.zeros(0)
    j = a.jacobian(y)
    rhs = -(j[:, part.nonbasic] @ np.asarray(d_n, dtype=np.float64))
    return factor_square(j[:, part.basic]).solve(rhs)


def newton_restore(
    a: AugmentedProblem,
    y_basic: np.ndarray,
    y_nonbasic: np.ndarray,
    part: BasisPartition,
    *,
    eps_feas: float = 1e-8,
    max_newton: int = 50,
    factors: LuFactors | None = None,
) -> tuple[np.ndarray, int]:
    """Newton-iterate the basic variables until ||e(y)||_1 <= eps_feas.

    Reuses one factorization of the basic Jacobian block while each step cuts
    the residual to at most a tenth; otherwise refactors at the current
    iterate. Returns the restored basic block and the iteration count (0 when
    already feasible). Raises RestorationFailed on non-convergence and
    SingularMatrix on a singular basic block.
    """
    y = np.empty(a.dim)
    y[part.nonbasic] = y_nonbasic
    yb = np.asarray(y_basic, dtype=np.float64).copy()
    y[part.basic] = yb
    resid = a.constraint_values(y)
    norm = _l1(resid)
    if norm <= eps_feas:
        return yb, 0
    if part.basic.size == 0:
        raise RestorationFailed("no basic variables to restore with")
    if factors is None:
        factors = factor_square(a.jacobian(y)[:, part.basic])
    for it in range(1, max_newton + 1):
        yb -= factors.solve(resid)
        y[part.basic] = yb
        resid = a.constraint_values(y)
        if not np.isfinite(resid).all():
            raise RestorationFailed("restoration diverged to non-finite values")
        new_norm = _l1(resid)
        if new_norm <= eps_feas:
            return yb, it
        if new_norm > 0.1 * norm:
            factors = factor_square(a.jacobian(y)[:, part.basic])
        norm = new_norm
    raise RestorationFailed(f"residual {norm:.3e} after {max_newton} Newton iterations")


def _floor_steps(
    a: AugmentedProblem,
    y_nonbasic: np.ndarray,
    y_basic: np.ndarray,
    part: BasisPartition,
    factors: LuFactors,
    max_steps: int = 3,
) -> tuple[np.ndarray, int, np.ndarray]:
    """Push the residual of an already-restored point toward machine level.

    A point restored to eps_feas still floats in a tube around the constraint
    manifold; the objective varies across the tube by |grad|*eps_feas, which
    can drown out the true decrease of a short step. A few extra chord steps
    with the existing factorization remove that noise almost for free.
    Returns the refined basic block, the step count, and the final residual
    vector.
    """
    y = np.empty(a.dim)
    y[part.nonbasic] = y_nonbasic
    best = np.asarray(y_basic, dtype=np.float64)
    y[part.basic] = best
    resid = a.constraint_values(y)
    norm = _l1(resid)
    extra = 0
    for _ in range(max_steps):
        if norm == 0.0:
            break
        cand = best - factors.solve(resid)
        y[part.basic] = cand
        cand_resid = a.constraint_values(y)
        cand_norm = _l1(cand_resid)
        if not (np.isfinite(cand_norm) and cand_norm < 0.25 * norm):
            break
        best, resid, norm = cand, cand_resid, cand_norm
        extra += 1
    return best, extra, resid


def _swap_basis(
    a: AugmentedProblem,
    jbuf: np.ndarray,
    part: BasisPartition,
    factors: LuFactors,
    out_local: int,
    y: np.ndarray,
) -> BasisPartition | None:
    """Exchange one basic variable against the best nonbasic pivot column.

    Prices the leaving variable's row through the current factors, then
    picks the interior nonbasic column with the strongest coupling, using
    the same near-bound demotion and slack preference as the full
    selection. A full reselection costs a pivoted QR of the whole
    Jacobian; this costs one triangular solve. Returns None when every
    pivot is negligible, in which case the caller reselects from scratch.
    """
    e = np.zeros(part.basic.size)
    e[out_local] = 1.0
    u = factors.solve(e, trans=1)
    piv = u @ jbuf[:, part.nonbasic]
    yn = y[part.nonbasic]
    dist = _interior_distance(yn, a.lower[part.nonbasic], a.upper[part.nonbasic])
    band = NEAR_BOUND_BAND * (1.0 + np.abs(yn))
    ramp = np.where(np.isfinite(dist), np.minimum(dist / band, 1.0), 1.0)
    ramp = np.maximum(ramp, 1e-6)
    weight = np.where(part.nonbasic >= a.n, SLACK_TIER * ramp, ramp)
    score = np.abs(piv) * weight
    if score.size == 0:
        return None
    j = int(np.argmax(score))
    if abs(piv[j]) <= RANK_TOL * (1.0 + float(np.abs(u).max())):
        return None
    basic = part.basic.copy()
    basic[out_local] = part.nonbasic[j]
    basic.sort()
    mask = np.ones(a.dim, dtype=bool)
    mask[basic] = False
    return BasisPartition(basic=basic, nonbasic=np.nonzero(mask)[0])


def _snap_to_bounds(v: np.ndarray, lo: np.ndarray, up: np.ndarray) -> np.ndarray:
    snap_lo = np.isfinite(lo) & (np.abs(v - lo) <= BOUND_SNAP * (1.0 + np.abs(lo)))
    snap_up = np.isfinite(up) & (np.abs(v - up) <= BOUND_SNAP * (1.0 + np.abs(up)))
    out = np.where(snap_lo, lo, v)
    return np.where(snap_up, up, out)


def _within_bounds(v: np.ndarray, lo: np.ndarray, up: np.ndarray) -> bool:
    return bool((v >= lo).all() and (v <= up).all())


def _polish_feasibility(
    a: AugmentedProblem, y: np.ndarray, part: BasisPartition, steps: int = 3
) -> np.ndarray:
    """Drive the residual toward machine level with bounded full-Newton steps,
    never leaving the bounds and never making the residual worse."""
    best = y
    best_norm = _l1(a.constraint_values(y))
    cur = y.copy()
    for _ in range(steps):
        if best_norm == 0.0:
            break
        try:
            factors = factor_square(a.jacobian(cur)[:, part.basic])
        except SingularMatrix:
            break
        cur[part.basic] -= factors.solve(a.constraint_values(cur))
        np.clip(cur, a.lower, a.upper, out=cur)
        norm = _l1(a.constraint_values(cur))
        if norm < best_norm:
            best, best_norm = cur.copy(), norm
        else:
            break
    return best


def grg_solve(
    a: AugmentedProblem, y0: np.ndarray, config: SolverConfig | None = None
) -> SolverRun:
    """Run the reduced-gradient loop from a feasible start point.

    Every accepted iterate strictly decreases the objective, satisfies the
    bounds, and carries a feasibility residual at most ``eps_feas``. Budget
    exhaustion is reported through the termination reason, not an exception;
    only an infeasible or out-of-bounds start raises DomainError.
    """
    cfg = config or SolverConfig()
    t_start = time.perf_counter()
    y = as_vector(y0, a.dim, name="start point").copy()
    if not _within_bounds(y, a.lower, a.upper):
        raise DomainError("start point violates the bounds")
    resid_cur = a.constraint_values(y)
    if _l1(resid_cur) > cfg.eps_feas:
        raise DomainError("start point violates the constraints")

    max_outer = cfg.max_outer if cfg.max_outer is not None else 10 * a.dim
    jbuf = a.jacobian(y)
    part: BasisPartition | None = None
    need_select = True
    trace: list[IterateRecord] = []
    newton_total = 0
    outer = 0
    f_cur = a.objective_value(y)
    termination = Termination.MAX_ITERATIONS

    fresh = False
    chord: LuFactors | None = None
    force_full = False
    while outer < max_outer:
        a.jacobian(y, out=jbuf)
        if need_select:
            try:
                part = select_basis(a, y, jac=jbuf)
            except BasisFailure:
                termination = Termination.BASIS_FAILURE
                break
            need_select = False
            fresh = True
            chord = None
        factors = None
        jb = None
        chord_fresh = part.basic.size == 0
        if part.basic.size:
            jb = jbuf[:, part.basic]
            if chord is None:
                try:
                    chord = factor_square(jb)
                except SingularMatrix:
                    try:
                        part = select_basis(a, y, jac=jbuf)
                        jb = jbuf[:, part.basic]
                        chord = factor_square(jb)
                        fresh = True
                    except (BasisFailure, SingularMatrix):
                        termination = Termination.BASIS_FAILURE
                        break
                chord_fresh = True
            factors = chord

        grad = a.objective_gradient(y)
        # The basic-block factorization is reused across iterations (the
        # equality rows never change and the inequality gradients drift
        # slowly), with one refinement pass per solve against the current
        # block. A stale-factor direction must still sit in the constraint
        # null space and point downhill; if either gate fails, refactor at
        # the current point and recompute once.
        pi = None
        for _ in range(2):
            if part.basic.size:
                gb = grad[part.basic]
                pi = factors.solve(gb, trans=1)
                pi -= factors.solve(jb.T @ pi - gb, trans=1)
                r = grad[part.nonbasic] - (pi @ jbuf)[part.nonbasic]
            else:
                r = grad[part.nonbasic].copy()
            d_n = nonbasic_direction(a, r, y, part)
            dn_norm = _l1(d_n)
            if part.basic.size:
                rhs_b = -(jbuf[:, part.nonbasic] @ d_n)
                d_b = factors.solve(rhs_b)
                d_b -= factors.solve(jb @ d_b - rhs_b)
            else:
                d_b = np.zeros(0)
            d_full = np.zeros(a.dim)
            d_full[part.nonbasic] = d_n
            d_full[part.basic] = d_b
            jd_residual = float(np.abs(jbuf @ d_full).max()) if jbuf.size else 0.0
            grad_dot_dir = float(grad @ d_full)
            clean = (
                jd_residual <= CHORD_RESIDUAL_GATE
                and grad_dot_dir <= 0.0
                and dn_norm > cfg.eps_direction
            )
            if chord_fresh or clean:
                break
            try:
                chord = factor_square(jb)
            except SingularMatrix:
                chord = None
                break
            factors = chord
            chord_fresh = True
        if chord is None and part.basic.size:
            need_select = True
            continue
        if dn_norm <= cfg.eps_direction:
            termination = Termination.DIRECTION_BELOW_EPS
            break

        lo_n = a.lower[part.nonbasic]
        up_n = a.upper[part.nonbasic]
        yn_cur = y[part.nonbasic]
        yb_cur = y[part.basic]
        # Ratio test on the basic block only: cap the first trial where the
        # linear prediction of a basic variable meets its bound. Restoring
        # past that point keeps rejecting trials, which degenerates into a
        # geometric crawl toward the bound; landing on it instead lets the
        # blocking variable leave the basis right after the step. The
        # nonbasic block needs no cap because the trial is clipped into its
        # box, activating any number of bounds exactly in one step.
        blocker = -1
        lam_cap = np.inf
        if part.basic.size:
            with np.errstate(divide="ignore", invalid="ignore"):
                room_b = np.where(
                    d_b > 0,
                    (a.upper[part.basic] - yb_cur) / d_b,
                    np.where(d_b < 0, (a.lower[part.basic] - yb_cur) / d_b, np.inf),
                )
            blocker = int(np.argmin(room_b))
            lam_cap = max(float(room_b[blocker]), 0.0)
            if not np.isfinite(lam_cap):
                blocker = -1
        # First trial at the exact line minimum of the quadratic objective
        # along d, capped by the ratio test. Starting every search at
        # lambda_init costs several rejected trials per iteration (each one
        # a full restoration) and accepts far from the line minimum, which
        # drags out the zigzag; directions without objective curvature
        # (pure slack moves) run straight to the cap instead.
        d_z = d_full[: a.n]
        curv = float(d_z @ a.base.objective.quad_matvec(d_z))
        lam_try = cfg.lambda_init
        if curv > 0.0 and not force_full:
            lam_exact = -grad_dot_dir / curv
            if lam_exact > 0.0:
                lam_try = lam_exact
        lam0 = min(lam_try, lam_cap)
        lam = lam0
        eps64 = np.finfo(np.float64).eps
        grad_inf = float(np.abs(grad).max())
        accepted = False
        halvings = 0
        y_next = None
        step_drop = 0.0
        resid_next = resid_cur
        newton_used = 0
        for attempt in range(cfg.max_halvings):
            if not lam > 0.0:
                break
            yn_t = np.clip(yn_cur + lam * d_n, lo_n, up_n)
            try:
                # Restoration starts at the linear predictor: the residual
                # there is second order in the step, so a long trial costs
                # the same few chord iterations as a short one.
                yb_t, nits = newton_restore(
                    a,
                    yb_cur + lam * d_b,
                    yn_t,
                    part,
                    eps_feas=cfg.eps_feas,
                    max_newton=cfg.max_newton,
                    factors=factors,
                )
            except (RestorationFailed, SingularMatrix):
                lam *= cfg.halving
                halvings += 1
                continue
            yb_t, extra, resid_t = _floor_steps(a, yn_t, yb_t, part, factors)
            newton_used += nits + extra
            yb_t = _snap_to_bounds(yb_t, a.lower[part.basic], a.upper[part.basic])
            if not _within_bounds(yb_t, a.lower[part.basic], a.upper[part.basic]):
                lam *= cfg.halving
                halvings += 1
                continue
            y_t = np.empty(a.dim)
            y_t[part.nonbasic] = yn_t
            y_t[part.basic] = yb_t
            change = a.objective_change(y, y_t)
            # Both endpoints float a residual's distance off the constraint
            # manifold, shifting the objective by pi.e to first order (the
            # multiplier estimate converts residual units to objective
            # units). Subtract that systematic part so the comparison is
            # between on-manifold values; the floor then only has to cover
            # rounding of the difference form.
            if pi is not None:
                change -= float(pi @ (resid_t - resid_cur))
            floor = DECREASE_FLOOR * eps64 * (1.0 + grad_inf) * _l1(y_t - y)
            if change < -floor and change <= ARMIJO_C1 * lam * grad_dot_dir:
                accepted = True
                y_next = y_t
                step_drop = -change
                resid_next = resid_t
                break
            lam *= cfg.halving
            halvings += 1
        newton_total += newton_used
        if not accepted:
            if lam0 < min(cfg.lambda_init, lam_cap) and not force_full:
                # The informed start skipped the top of the step range;
                # cover it before reading anything into the failure.
                force_full = True
                continue
            # A stale basis can dead-end the line search, e.g. when a basic
            # variable has drifted onto its bound and every restored trial
            # pushes it outside. Reselect once at this point; selection
            # demotes near-bound columns, so the blocker leaves the basis.
            # Only a failure with a freshly chosen basis is terminal.
            if fresh:
                termination = Termination.RESTORATION_FAILED
                break
            need_select = True
            continue

        fresh = False
        force_full = False
        y = y_next
        resid_cur = resid_next
        f_cur -= step_drop
        if f_cur < -1e15:
            raise DomainError("objective fell below -1e15; descent looks unbounded")
        outer += 1
        trace.append(
            IterateRecord(
                index=outer,
                objective=f_cur,
                feasibility_norm1=_l1(a.constraint_values(y)),
                direction_norm1=dn_norm,
                jd_residual_inf=jd_residual,
                grad_dot_dir=grad_dot_dir,
                step_lambda=lam,
                halvings=halvings,
                newton_iterations=newton_used,
                decrease=step_drop,
            )
        )
        # A basic variable parked on (or capped at) its bound cannot move
        # any further, and each retry shaves the step geometrically. Trade
        # it against the strongest interior nonbasic column; once nonbasic
        # it lands on its bound exactly through the clipped trial and stays
        # clamped there.
        swap_out = -1
        dist_b = _interior_distance(y[part.basic], a.lower[part.basic], a.upper[part.basic])
        scale_b = 1.0 + np.abs(y[part.basic])
        if dist_b.size and (dist_b <= DEGENERACY_TOL * scale_b).any():
            swap_out = int(np.argmin(dist_b / scale_b))
        elif blocker >= 0 and lam_cap < lam_try:
            swap_out = blocker
        if swap_out >= 0:
            swapped = _swap_basis(a, jbuf, part, factors, swap_out, y)
            if swapped is None:
                need_select = True
            else:
                part = swapped
                chord = None

    if part is not None and part.basic.size:
        y = _polish_feasibility(a, y, part)

    return SolverRun(
        y_star=y,
        objective_value=a.objective_value(y),
        outer_iterations=outer,
        newton_iterations_total=newton_total,
        termination=termination,
        wall_time_s=time.perf_counter() - t_start,
        trace=tuple(trace),
    )


def gradient_descent(
    form: QuadraticForm, x0: np.ndarray, eps: float = 1e-6, max_iter: int = 10000
) -> tuple[np.ndarray, int]:
    """Unconstrained steepest descent on a quadratic.

    Steps by the exact line-search length g.g / g.Qg while the curvature
    along -g is positive; otherwise backtracks from a unit step until the
    value drops. Stops when ||grad||_inf <= eps; raises DomainError once
    the value falls below -1e15 (the descent is unbounded). Returns
    (point, iterations).
    """
    if not (eps > 0 and max_iter >= 1):
        raise DomainError("eps and max_iter must be positive")
    x = as_vector(x0, form.n, name="start point").copy()
    for k in range(max_iter):
        g = form.gradient(x)
        if g.size == 0 or float(np.abs(g).max()) <= eps:
            return x, k
        gg = float(g @ g)
        curv = float(g @ form.quad_matvec(g))
        if curv > 0:
            x -= (gg / curv) * g
        else:
            fx = form.value(x)
            lam = 1.0
            trial = x - lam * g
            for _ in range(60):
                trial = x - lam * g
                if form.value(trial) < fx:
                    break
                lam *= 0.5
            x = trial
        if form.value(x) < -1e15:
            raise DomainError("objective fell below -1e15; descent looks unbounded")
    return x, max_iter
