"""Client-side masking: key generation, problem encryption, solution decryption.

A secret key holds an affine shift r, per-row sign-carrying scale factors for
the equality block, positive scale factors for the inequality block, and three
permutations (equality rows, inequality rows, variables). Encryption rewrites
the problem in w = x + r, scales every constraint row, and relabels rows and
variables; decryption inverts the variable relabeling and subtracts the shift.
Feasible sets and objective values are preserved point-for-point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .model import (
    EncryptedProblem,
    NlpProblem,
    Permutation,
    QuadraticForm,
    apply_col_perm,
    apply_row_perm,
    as_vector,
)

__all__ = [
    "DEAD_ZONE_FACTOR",
    "KeyParams",
    "SecretKey",
    "keygen",
    "identity_key",
    "encrypt",
    "encrypt_point",
    "decrypt",
    "key_to_bytes",
    "key_from_bytes",
    "write_key_file",
    "read_key_file",
]

# Equality scales are kept at least this fraction of the mask range away from
# zero so every scaled row stays invertible.
DEAD_ZONE_FACTOR = 1e-6

_KEY_VERSION = 1


@dataclass(frozen=True)
class KeyParams:
    """Masking distribution parameters.

    ``mask_range`` is the half-width of the uniform draws; ``c_eq`` and
    ``c_ineq`` are fixed positive constants folded into the row scales.
    """

    mask_range: float = 10.0
    c_eq: float = 1.0
    c_ineq: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.mask_range > 0 and np.isfinite(self.mask_range)):
            raise DomainError("mask_range must be positive and finite")
        if not (self.c_eq > 0 and np.isfinite(self.c_eq)):
            raise DomainError("c_eq must be positive and finite")
        if not (self.c_ineq > 0 and np.isfinite(self.c_ineq)):
            raise DomainError("c_ineq must be positive and finite")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class SecretKey:
    params: KeyParams
    shift: np.ndarray
    eq_scale: np.ndarray
    ineq_scale: np.ndarray
    row_perm_eq: Permutation
    row_perm_ineq: Permutation
    col_perm: Permutation

    def __post_init__(self):
        n = len(self.shift)
        shift = as_vector(self.shift, name="shift")
        eq_scale = as_vector(self.eq_scale, name="eq_scale")
        ineq_scale = as_vector(self.ineq_scale, name="ineq_scale")
        dead = DEAD_ZONE_FACTOR * self.params.mask_range
        if eq_scale.size and np.abs(eq_scale).min() < dead * (1.0 - 1e-12):
            raise DomainError("eq_scale entry inside the dead zone")
        if ineq_scale.size and ineq_scale.min() < dead * (1.0 - 1e-12):
            raise DomainError("ineq_scale entry not positive enough")
        if self.col_perm.n != n:
            raise DomainError("col_perm size does not match shift length")
        if self.row_perm_eq.n != eq_scale.size:
            raise DomainError("row_perm_eq size does not match eq_scale length")
        if self.row_perm_ineq.n != ineq_scale.size:
            raise DomainError("row_perm_ineq size does not match ineq_scale length")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "eq_scale", eq_scale)
        object.__setattr__(self, "ineq_scale", ineq_scale)

    @property
    def n(self) -> int:
        return self.shift.shape[0]

    @property
    def m(self) -> int:
        return self.eq_scale.shape[0]

    @property
    def l(self) -> int:
        return self.ineq_scale.shape[0]


def _forward_shuffle(rng: np.random.Generator, n: int) -> np.ndarray:
    # Walk positions left to right, swapping each with a uniformly chosen
    # earlier-or-equal position; one integer draw is consumed per position.
    seq = np.arange(n, dtype=np.int64)
    for j in range(n):
        i = int(rng.integers(0, j + 1))
        seq[i], seq[j] = seq[j], seq[i]
    return seq


def keygen(n: int, m: int, l: int, params: KeyParams | None = None) -> SecretKey:
    """Draw a fresh key for an n-variable, m-equality, l-inequality problem.

    All randomness comes from one PCG64 stream seeded by ``params.seed``; the
    draw order is fixed (shift, eq_scale, ineq_scale, then the three row/column
    shuffles) so a seed fully determines the key.
    """
    params = params or KeyParams()
    if n < 1 or m < 0 or l < 0:
        raise DomainError(f"invalid key dimensions ({n}, {m}, {l})")
    rng = np.random.default_rng(params.seed)
    big = params.mask_range
    dead = DEAD_ZONE_FACTOR * big

    shift = rng.uniform(-big, big, size=n)
    eq_scale = np.empty(m, dtype=np.float64)
    for i in range(m):
        v = rng.uniform(-big, big)
        while abs(v) < dead:
            v = rng.uniform(-big, big)
        eq_scale[i] = v
    ineq_scale = rng.uniform(dead, big, size=l)

    return SecretKey(
        params=params,
        shift=shift,
        eq_scale=eq_scale,
        ineq_scale=ineq_scale,
        row_perm_eq=Permutation(_forward_shuffle(rng, m)),
        row_perm_ineq=Permutation(_forward_shuffle(rng, l)),
        col_perm=Permutation(_forward_shuffle(rng, n)),
    )


def identity_key(n: int, m: int, l: int) -> SecretKey:
    """A do-nothing key (zero shift, unit scales, identity permutations)."""
    return SecretKey(
        params=KeyParams(mask_range=1.0, c_eq=1.0, c_ineq=1.0, seed=0),
        shift=np.zeros(n),
        eq_scale=np.ones(m),
        ineq_scale=np.ones(l),
        row_perm_eq=Permutation.identity(m),
        row_perm_ineq=Permutation.identity(l),
        col_perm=Permutation.identity(n),
    )


def _check_dims(problem: NlpProblem, key: SecretKey) -> None:
    if (problem.n, problem.m, problem.l) != (key.n, key.m, key.l):
        raise DomainError(
            f"key dimensions ({key.n}, {key.m}, {key.l}) do not match "
            f"problem dimensions ({problem.n}, {problem.m}, {problem.l})"
        )


def encrypt(problem: NlpProblem, key: SecretKey) -> EncryptedProblem:
    """Mask a problem: shift variables, scale constraint rows, permute labels.

    The output is a structurally valid problem over z = col_perm(x + shift);
    x is feasible for the input exactly when z is feasible for the output, and
    objective values agree at corresponding points.
    """
    _check_dims(problem, key)
    r = key.shift
    col = key.col_perm

    eq_scale = key.params.c_eq * key.eq_scale
    g = problem.eq_matrix * eq_scale[:, None]
    b = eq_scale * (problem.eq_rhs + problem.eq_matrix @ r)
    g = apply_col_perm(apply_row_perm(key.row_perm_eq, g), col)
    b = key.row_perm_eq.apply(b)

    ineq_scale = key.params.c_ineq * key.ineq_scale
    masked_forms: list[QuadraticForm] = []
    masked_rhs = np.empty(problem.l, dtype=np.float64)
    for j, form in enumerate(problem.ineqs):
        shifted = form.shifted(r)
        # Keep the form's constant where it was; the shift's constant lands
        # on the right-hand side instead.
        rhs_j = problem.ineq_rhs[j] - (shifted.const - form.const)
        moved = QuadraticForm(quad=shifted.quad, lin=shifted.lin, const=form.const)
        t = float(ineq_scale[j])
        masked_forms.append(moved.scaled(t).permuted(col))
        masked_rhs[j] = t * rhs_j
    order = key.row_perm_ineq.image
    masked_forms = [masked_forms[k] for k in order]
    masked_rhs = masked_rhs[order]

    return NlpProblem(
        objective=problem.objective.shifted(r).permuted(col),
        eq_matrix=g,
        eq_rhs=b,
        ineqs=tuple(masked_forms),
        ineq_rhs=masked_rhs,
        lower=col.apply(problem.lower + r),
        upper=col.apply(problem.upper + r),
    )


def encrypt_point(x: np.ndarray, key: SecretKey) -> np.ndarray:
    """Map a point of the original problem into encrypted coordinates."""
    x = as_vector(x, key.n, name="point")
    return key.col_perm.apply(x + key.shift)


def decrypt(z_star: np.ndarray, key: SecretKey) -> np.ndarray:
    """Map a solution of the encrypted problem back to original coordinates."""
    z = as_vector(z_star, key.n, name="solution")
    return key.col_perm.inverse().apply(z) - key.shift


def _key_payload(key: SecretKey) -> dict:
    return {
        "version": _KEY_VERSION,
        "n": key.n,
        "m": key.m,
        "l": key.l,
        "params": {
            "N": key.params.mask_range,
            "c_eq": key.params.c_eq,
            "c_ineq": key.params.c_ineq,
            "seed": key.params.seed,
        },
        "shift": key.shift.tolist(),
        "eq_scale": key.eq_scale.tolist(),
        "ineq_scale": key.ineq_scale.tolist(),
        "row_perm_eq": key.row_perm_eq.image.tolist(),
        "row_perm_ineq": key.row_perm_ineq.image.tolist(),
        "col_perm": key.col_perm.image.tolist(),
    }


def key_to_bytes(key: SecretKey) -> bytes:
    """Serialize a key to canonical JSON bytes (fixed field order)."""
    return json.dumps(_key_payload(key), separators=(",", ":"), allow_nan=False).encode()


def key_from_bytes(data: bytes) -> SecretKey:
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid key file: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(obj, dict):
        raise ParseError("key file must hold a JSON object", path="$")
    try:
        version = obj["version"]
        if version != _KEY_VERSION:
            raise ParseError(f"unsupported key version {version!r}", path="version")
        params = obj["params"]
        key_params = KeyParams(
            mask_range=float(params["N"]),
            c_eq=float(params["c_eq"]),
            c_ineq=float(params["c_ineq"]),
            seed=int(params["seed"]),
        )
        n, m, l = int(obj["n"]), int(obj["m"]), int(obj["l"])
        key = SecretKey(
            params=key_params,
            shift=as_vector(obj["shift"], n, name="shift"),
            eq_scale=as_vector(obj["eq_scale"], m, name="eq_scale"),
            ineq_scale=as_vector(obj["ineq_scale"], l, name="ineq_scale"),
            row_perm_eq=Permutation(np.asarray(obj["row_perm_eq"], dtype=np.int64)),
            row_perm_ineq=Permutation(np.asarray(obj["row_perm_ineq"], dtype=np.int64)),
            col_perm=Permutation(np.asarray(obj["col_perm"], dtype=np.int64)),
        )
    except ParseError:
        raise
    except KeyError as exc:
        raise ParseError(f"key file is missing field {exc.args[0]!r}", path=str(exc.args[0])) from exc
    except (TypeError, ValueError, DomainError) as exc:
        raise ParseError(f"invalid key file contents: {exc}") from exc
    return key


def write_key_file(key: SecretKey, path: str | Path) -> None:
    Path(path).write_bytes(key_to_bytes(key))


def read_key_file(path: str | Path) -> SecretKey:
    return key_from_bytes(Path(path).read_bytes())
