"""Problem data types: permutations, quadratic forms, and the NLP container.

All numeric data is float64 numpy. A quadratic form's ``quad`` field is either
a dense symmetric (n, n) array or a 1-D length-n array holding the diagonal of
an otherwise-zero matrix; the diagonal layout keeps large instances with many
quadratic constraints in memory without a sparse-matrix dependency.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .linalg import row_rank_defect

__all__ = [
    "as_vector",
    "as_matrix",
    "Permutation",
    "permutation_from_sequence",
    "apply_row_perm",
    "apply_col_perm",
    "QuadraticForm",
    "NlpProblem",
    "EncryptedProblem",
]


def as_vector(
    x, size: int | None = None, *, name: str = "vector", allow_inf: bool = False
) -> np.ndarray:
    """Coerce to a 1-D float64 array, validating length and finiteness."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DomainError(f"{name} must be 1-D, got shape {v.shape}")
    if size is not None and v.shape[0] != size:
        raise DomainError(f"{name} must have length {size}, got {v.shape[0]}")
    if np.isnan(v).any():
        raise DomainError(f"{name} contains NaN")
    if not allow_inf and not np.isfinite(v).all():
        raise DomainError(f"{name} contains non-finite entries")
    return v


def as_matrix(x, shape: tuple[int, int] | None = None, *, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array, validating shape and finiteness."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise DomainError(f"{name} must be 2-D, got shape {m.shape}")
    if shape is not None and m.shape != shape:
        raise DomainError(f"{name} must have shape {shape}, got {m.shape}")
    if not np.isfinite(m).all():
        raise DomainError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class Permutation:
    """A permutation of 0..n-1; slot ``i`` of the output takes input ``image[i]``."""

    image: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.int64)
        if img.ndim != 1:
            raise DomainError("permutation image must be 1-D")
        n = img.shape[0]
        seen = np.zeros(n, dtype=bool)
        if n and (img.min() < 0 or img.max() >= n):
            raise DomainError("permutation image entries must lie in 0..n-1")
        seen[img] = True
        if not seen.all():
            raise DomainError("permutation image must be a bijection on 0..n-1")
        object.__setattr__(self, "image", img)

    @property
    def n(self) -> int:
        return self.image.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Permute a vector: result[i] = v[image[i]]."""
        v = np.asarray(v)
        if v.shape[0] != self.n:
            raise DomainError(f"vector length {v.shape[0]} does not match permutation size {self.n}")
        return v[self.image]

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.image] = np.arange(self.n, dtype=np.int64)
        return Permutation(inv)

    def matrix(self) -> np.ndarray:
        """Materialize the 0/1 matrix M with M[i, image[i]] = 1, so M @ v = apply(v)."""
        m = np.zeros((self.n, self.n), dtype=np.float64)
        m[np.arange(self.n), self.image] = 1.0
        return m

    def is_identity(self) -> bool:
        return bool((self.image == np.arange(self.n)).all())


def permutation_from_sequence(seq: Sequence[int]) -> Permutation:
    """Build a permutation from a 1-based image sequence (a bijection on 1..n)."""
    img = np.asarray(seq, dtype=np.int64)
    if img.ndim != 1:
        raise DomainError("permutation sequence must be 1-D")
    if img.size and (img.min() < 1 or img.max() > img.size):
        raise DomainError("permutation sequence entries must lie in 1..n")
    return Permutation(img - 1)


def apply_row_perm(perm: Permutation, m: np.ndarray) -> np.ndarray:
    """Reorder rows: result[i, :] = m[perm.image[i], :]."""
    m = np.asarray(m)
    if m.shape[0] != perm.n:
        raise DomainError(f"row count {m.shape[0]} does not match permutation size {perm.n}")
    return m[perm.image, :]


def apply_col_perm(m: np.ndarray, perm: Permutation) -> np.ndarray:
    """Reorder columns: result[:, j] = m[:, perm.image[j]]."""
    m = np.asarray(m)
    if m.shape[1] != perm.n:
        raise DomainError(f"column count {m.shape[1]} does not match permutation size {perm.n}")
    return m[:, perm.image]


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """The function x -> 0.5 x^T Q x + c^T x + d.

    ``quad`` is symmetrized at construction when dense; a 1-D ``quad`` holds
    the diagonal of Q. ``lin`` is c and ``const`` is d.
    """

    quad: np.ndarray
    lin: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.quad, dtype=np.float64)
        if q.ndim == 2:
            if q.shape[0] != q.shape[1]:
                raise DomainError(f"quadratic matrix must be square, got {q.shape}")
            q = 0.5 * (q + q.T)
        elif q.ndim != 1:
            raise DomainError("quad must be an (n, n) matrix or a length-n diagonal")
        if not np.isfinite(q).all():
            raise DomainError("quad contains non-finite entries")
        lin = as_vector(self.lin, q.shape[0], name="lin")
        c = float(self.const)
        if not np.isfinite(c):
            raise DomainError("const must be finite")
        object.__setattr__(self, "quad", q)
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "const", c)

    @property
    def n(self) -> int:
        return self.lin.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self.quad.ndim == 1

    def dense_quad(self) -> np.ndarray:
        return np.diag(self.quad) if self.is_diagonal else self.quad

    def quad_matvec(self, x: np.ndarray) -> np.ndarray:
        return self.quad * x if self.is_diagonal else self.quad @ x

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DomainError(f"point has shape {x.shape}, form expects ({self.n},)")
        return float(0.5 * x @ self.quad_matvec(x) + self.lin @ x + self.const)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DomainError(f"point has shape {x.shape}, form expects ({self.n},)")
        return self.quad_matvec(x) + self.lin

    def shifted(self, r: np.ndarray) -> "QuadraticForm":
        """The form of w = x + r: same curvature, lin - Q r, const absorbing the rest."""
        r = as_vector(r, self.n, name="shift")
        qr = self.quad_matvec(r)
        return QuadraticForm(
            quad=self.quad,
            lin=self.lin - qr,
            const=self.const + 0.5 * float(r @ qr) - float(self.lin @ r),
        )

    def scaled(self, t: float) -> "QuadraticForm":
        return QuadraticForm(quad=t * self.quad, lin=t * self.lin, const=t * self.const)

    def permuted(self, perm: Permutation) -> "QuadraticForm":
        """Conjugate by a variable permutation: the form of z with z[i] = x[image[i]]."""
        img = perm.image
        if perm.n != self.n:
            raise DomainError("permutation size does not match form dimension")
        quad = self.quad[img] if self.is_diagonal else self.quad[np.ix_(img, img)]
        return QuadraticForm(quad=quad, lin=self.lin[img], const=self.const)


@dataclass(frozen=True, eq=False)
class NlpProblem:
    """Quadratic objective, linear equalities G x = b, quadratic inequalities
    h_j(x) <= rhs_j, and box bounds lower <= x <= upper.

    The equality matrix must have full row rank; bounds may be infinite.
    """

    objective: QuadraticForm
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    ineqs: tuple[QuadraticForm, ...]
    ineq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        n = self.objective.n
        g = as_matrix(self.eq_matrix, name="eq_matrix")
        if g.shape[1] != n:
            raise DomainError(f"eq_matrix has {g.shape[1]} columns, expected {n}")
        b = as_vector(self.eq_rhs, g.shape[0], name="eq_rhs")
        ineqs = tuple(self.ineqs)
        for j, form in enumerate(ineqs):
            if not isinstance(form, QuadraticForm) or form.n != n:
                raise DomainError(f"inequality {j} is not a {n}-variable quadratic form")
        rhs = as_vector(self.ineq_rhs, len(ineqs), name="ineq_rhs")
        lower = as_vector(self.lower, n, name="lower", allow_inf=True)
        upper = as_vector(self.upper, n, name="upper", allow_inf=True)
        if (lower > upper).any():
            raise DomainError("lower bound exceeds upper bound")
        if g.shape[0] > n:
            raise DomainError(f"more equalities ({g.shape[0]}) than variables ({n})")
        if g.shape[0] and row_rank_defect(g) > 0:
            raise DomainError("eq_matrix is row rank deficient")
        object.__setattr__(self, "eq_matrix", g)
        object.__setattr__(self, "eq_rhs", b)
        object.__setattr__(self, "ineqs", ineqs)
        object.__setattr__(self, "ineq_rhs", rhs)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def m(self) -> int:
        return self.eq_matrix.shape[0]

    @property
    def l(self) -> int:
        return len(self.ineqs)

    def replace(self, **kwargs) -> "NlpProblem":
        return dataclasses.replace(self, **kwargs)


# An encrypted problem is structurally an NLP; only its provenance differs.
EncryptedProblem = NlpProblem
