"""Random generation of strictly feasible quadratic test problems.

Instances have a convex quadratic objective, random full-row-rank linear
equality constraints, convex diagonal-quadratic inequality constraints, and a
symmetric variable box. Every instance ships with an interior point that is
feasible by construction, with a margin of at least 0.1 on each inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError
from .model import NlpProblem, QuadraticForm

__all__ = ["GeneratorSpec", "generate_feasible"]

# Objective Hessian is I + (CURVATURE_BLEND / n) * A^T A with A standard
# normal, putting its spectrum in roughly [1, 1 + 4 * CURVATURE_BLEND].
# Kept mild so the reduced Hessian stays well conditioned and the solver's
# halving line search converges in a small multiple of the dimension.
CURVATURE_BLEND = 0.3
# The unconstrained minimizer sits this many box half-widths (per coordinate,
# one standard deviation) away from the feasible seed point. Kept moderate:
# every inequality that turns active on the way costs the solver a handful
# of iterations, so the active fraction directly drives solve time.
TARGET_PULL = 0.12
INEQ_CURVATURE_RANGE = (0.2, 2.0)
MARGIN_RANGE = (0.1, 1.0)
# Each inequality gradient is dominated by one dedicated coordinate, with
# dense noise and curvature scaled so they stay subordinate over the box.
# Active inequalities then enter the working basis through near-unit
# columns instead of smearing the reduced space, mirroring EQ_COUPLING.
INEQ_DOMINANT = 2.0
INEQ_SLOPE_NOISE = 0.3
# Largest singular value of the equality coupling block. The equality matrix
# is a row-mixed [I | S] frame with sigma_max(S) capped, which keeps
# E_B^-1 E_N bounded for any decently pivoted basis and the reduced Hessian
# well conditioned regardless of which columns the solver picks. Small
# coupling also makes non-anchor columns nearly dependent on the anchors,
# so column-pivoted selection settles on an anchor basis.
EQ_COUPLING = 0.35

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape, seed, and variable box of one random test problem."""

    n: int
    m: int
    l: int
    seed: int
    bound_half_width: float = 10.0

    def __post_init__(self) -> None:
        for name in ("n", "m", "l", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DomainError(f"{name} must be an integer")
            object.__setattr__(self, name, int(value))
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if self.m < 0 or self.l < 0:
            raise DomainError("m and l must be nonnegative")
        if self.m > self.n:
            raise DomainError(f"m = {self.m} exceeds n = {self.n}")
        if self.m + self.l > self.n:
            raise DomainError(f"m + l = {self.m + self.l} exceeds n = {self.n}")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")
        width = float(self.bound_half_width)
        if not (width > 0 and np.isfinite(width)):
            raise DomainError("bound_half_width must be positive and finite")
        object.__setattr__(self, "bound_half_width", width)


def _deficient_rows(rows: np.ndarray) -> np.ndarray:
    """Indices of rows that do not contribute to full row rank."""
    r, piv = scipy.linalg.qr(rows.T, mode="r", pivoting=True)
    diag = np.abs(np.diag(r))
    scale = float(np.abs(rows).sum(axis=1).max())
    bad = np.flatnonzero(diag <= _RANK_TOL * max(scale, 1e-300))
    return np.sort(piv[bad])


def _equality_rows(rng: np.random.Generator, m: int, n: int, columns: np.ndarray) -> np.ndarray:
    """Dense random equality rows with full row rank and bounded coupling.

    Internally the matrix is [I | S] on the given column split with
    sigma_max(S) <= EQ_COUPLING, mixed by a random rotation on the left, so
    sigma_min is at least 1 and every singular value lies in
    [1, sqrt(1 + EQ_COUPLING^2)].
    """
    if m == 0:
        return np.zeros((0, n))
    coupling = rng.standard_normal((m, n - m))
    if coupling.size:
        top = float(scipy.linalg.svdvals(coupling)[0])
        if top > 0:
            coupling *= EQ_COUPLING / top
    mix, _ = scipy.linalg.qr(rng.standard_normal((m, m)))
    rows = np.zeros((m, n))
    rows[:, columns[:m]] = mix
    rows[:, columns[m:]] = mix @ coupling
    if _deficient_rows(rows).size:
        raise DomainError("failed to draw a full-row-rank equality matrix")
    return rows


def generate_feasible(spec: GeneratorSpec) -> tuple[NlpProblem, np.ndarray]:
    """Build a random problem together with a strictly feasible point.

    The draw order from the single seeded generator is fixed: seed point,
    minimizer displacement, objective Hessian factor, column split,
    equality coupling block, row mix, inequality curvatures, inequality
    slope noise, margins. Equal specs therefore produce identical problems.
    """
    rng = np.random.default_rng(spec.seed)
    n, m, l = spec.n, spec.m, spec.l
    half = spec.bound_half_width

    x0 = rng.uniform(-0.5 * half, 0.5 * half, n)
    target = x0 + rng.standard_normal(n) * (TARGET_PULL * half)
    factor = rng.standard_normal((n, n))
    quad = np.eye(n) + (CURVATURE_BLEND / n) * (factor.T @ factor)
    lin = -(quad @ target)

    # one shared split: m equality anchors, then l inequality dominants
    columns = rng.permutation(n)
    eq_matrix = _equality_rows(rng, m, n, columns)
    eq_rhs = eq_matrix @ x0

    curv = rng.uniform(*INEQ_CURVATURE_RANGE, (l, n)) / (n * half)
    slopes = rng.standard_normal((l, n)) * (INEQ_SLOPE_NOISE / np.sqrt(n))
    slopes[np.arange(l), columns[m : m + l]] += INEQ_DOMINANT
    margins = rng.uniform(*MARGIN_RANGE, l)
    ineq_rhs = 0.5 * curv @ (x0 * x0) + slopes @ x0 + margins
    forms = tuple(QuadraticForm(curv[j], slopes[j]) for j in range(l))

    problem = NlpProblem(
        objective=QuadraticForm(quad, lin),
        eq_matrix=eq_matrix,
        eq_rhs=eq_rhs,
        ineqs=forms,
        ineq_rhs=ineq_rhs,
        lower=np.full(n, -half),
        upper=np.full(n, half),
    )
    return problem, x0
