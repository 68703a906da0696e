"""Dense linear-algebra helpers: pivoted LU solves and rank checks."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, SingularMatrix

__all__ = ["PIVOT_TOL", "LuFactors", "factor_square", "solve_linear", "row_rank_defect"]

# A pivot this far below the largest one marks the matrix singular.
PIVOT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LuFactors:
    """Reusable partially pivoted LU factorization of a square matrix."""

    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def solve(self, rhs: np.ndarray, trans: int = 0) -> np.ndarray:
        """Solve A x = rhs (or A^T x = rhs with ``trans=1``)."""
        if self.n == 0:
            return np.zeros_like(np.asarray(rhs, dtype=np.float64))
        return scipy.linalg.lu_solve((self.lu, self.piv), rhs, trans=trans)


def factor_square(a: np.ndarray) -> LuFactors:
    """Factor a square matrix, raising SingularMatrix on a tiny pivot."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return LuFactors(lu=a.copy(), piv=np.zeros(0, dtype=np.int32))
    if not np.isfinite(a).all():
        raise DomainError("matrix entries must be finite")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on exact zeros; we raise below
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    diag = np.abs(np.diag(lu))
    if diag.min() <= PIVOT_TOL * max(1.0, diag.max()):
        raise SingularMatrix(
            f"pivot {diag.min():.3e} below tolerance for {a.shape[0]}x{a.shape[0]} system"
        )
    return LuFactors(lu=lu, piv=piv)


def solve_linear(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the dense square system A x = rhs.

    Raises DomainError on shape mismatch and SingularMatrix when a pivot of
    the partially pivoted LU factorization falls below tolerance.
    """
    a = np.asarray(a, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0:1] != a.shape[0:1]:
        raise DomainError(f"rhs length {rhs.shape} does not match matrix {a.shape}")
    if not np.isfinite(rhs).all():
        raise DomainError("rhs entries must be finite")
    return factor_square(a).solve(rhs)


def row_rank_defect(g: np.ndarray, tol_scale: float = 1e-10) -> int:
    """Number of dependent rows of ``g`` at tolerance ``tol_scale * ||g||_inf``."""
    g = np.asarray(g, dtype=np.float64)
    m = g.shape[0]
    if m == 0:
        return 0
    norm = np.abs(g).sum(axis=1).max()
    if norm == 0.0:
        return m
    r = scipy.linalg.qr(g.T, mode="r", pivoting=True, check_finite=False)[0]
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > tol_scale * norm))
    return m - rank
