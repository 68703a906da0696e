"""Timing harness comparing plain local solves with the masked pipeline.

For each problem size the harness measures three wall-clock times, each a
mean over trials on freshly generated instances:

- ``t_original``: solving the plain problem locally,
- ``t_cloud``: solving the masked problem (server-reported when remote),
- ``t_client``: the client-side work, i.e. key generation, masking,
  unmasking, and optimality verification.

``speedup = t_original / t_client`` and
``cloud_efficiency = t_original / t_cloud``.
"""

from __future__ import annotations

import csv
import dataclasses
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .documents import problem_to_document
from .errors import (
    BasisFailure,
    DomainError,
    RemoteError,
    RestorationFailed,
    SingularMatrix,
)
from .generator import GeneratorSpec, generate_feasible
from .kkt import verify_kkt
from .solver import SolverConfig, augment, grg_solve
from .transform import KeyParams, decrypt, encrypt, encrypt_point, keygen

__all__ = [
    "BENCH_EPS_DIRECTION",
    "CSV_HEADER",
    "LADDER_SIZES",
    "LADDER_RATIO",
    "BenchRecord",
    "ladder_specs",
    "run_bench",
    "write_csv",
]

CSV_HEADER = (
    "n",
    "m",
    "l",
    "t_original",
    "t_cloud",
    "t_client",
    "speedup",
    "cloud_efficiency",
)

LADDER_SIZES = (200, 500, 1000, 2000)
# Constraint counts default to m = l = 0.3 n.
LADDER_RATIO = 0.3

# Default direction tolerance for benchmark solves, one decade under the
# verification tolerance. The stopping rule measures the reduced gradient in
# the augmented variables, where a constraint row is represented by a unit
# slack column; mapping that residual back to the decision variables picks up
# a factor of the row's point gradient, which masking can push past 10. The
# spare decade absorbs the amplification so accepted runs also verify in the
# original variables. Both solves share the config, keeping the ratios honest.
BENCH_EPS_DIRECTION = 1e-7

_TRIAL_ERRORS = (DomainError, SingularMatrix, BasisFailure, RestorationFailed, RemoteError)


@dataclass(frozen=True)
class BenchRecord:
    """Mean timings for one problem size.

    ``failed`` counts trials that produced no accepted solution; their times
    are excluded from the means. A record with ``failed > 0`` is marked bad
    rather than dropped.
    """

    n: int
    m: int
    l: int
    t_original: float
    t_cloud: float
    t_client: float
    speedup: float
    cloud_efficiency: float
    trials: int
    failed: int = 0


def ladder_specs(
    sizes: Iterable[int] = LADDER_SIZES,
    seed: int = 0,
    ratio: float = LADDER_RATIO,
) -> list[GeneratorSpec]:
    """Specs with m = l = ratio * n for each requested size."""
    return [GeneratorSpec(n, round(ratio * n), round(ratio * n), seed) for n in sizes]


def _ratio(num: float, den: float) -> float:
    if not den > 0:
        return float("nan")
    return num / den


def _mean(values: list[float]) -> float:
    if not values:
        return float("nan")
    return float(np.mean(values))


def _run_trial(
    spec: GeneratorSpec,
    trial: int,
    key_params: KeyParams,
    config: SolverConfig | None,
    server: tuple[str, int] | None,
    tol: float,
) -> tuple[float, float, float] | None:
    """One generate/solve/mask/solve/unmask/verify cycle; None on failure."""
    problem, x0 = generate_feasible(dataclasses.replace(spec, seed=spec.seed + trial))

    t0 = time.perf_counter()
    aug = augment(problem)
    run = grg_solve(aug, aug.initial_point(x0), config)
    t_original = time.perf_counter() - t0
    # Quality is judged by the optimality check, not the termination label:
    # a run that stalls once no step clears the numerical decrease floor
    # still ends at a verifiable optimum.
    if not verify_kkt(problem, run.y_star[: problem.n], tol=tol).accepted:
        return None

    params = dataclasses.replace(key_params, seed=key_params.seed + trial)
    t0 = time.perf_counter()
    key = keygen(problem.n, problem.m, problem.l, params)
    masked = encrypt(problem, key)
    z0 = encrypt_point(x0, key)
    t_client = time.perf_counter() - t0

    if server is None:
        t0 = time.perf_counter()
        masked_aug = augment(masked)
        masked_run = grg_solve(masked_aug, masked_aug.initial_point(z0), config)
        t_cloud = time.perf_counter() - t0
        z_star = masked_run.y_star[: problem.n]
    else:
        from .client import submit

        doc = problem_to_document(masked, "encrypted", start_point=z0)
        reply, _rtt = submit(server, doc)
        if reply.status != "solved" or reply.z_star is None:
            return None
        t_cloud = reply.solver_wall_time_ms / 1000.0
        z_star = np.asarray(reply.z_star, dtype=float)

    t0 = time.perf_counter()
    x_star = decrypt(z_star, key)
    report = verify_kkt(problem, x_star, tol=tol)
    t_client += time.perf_counter() - t0
    if not report.accepted:
        return None
    return t_original, t_cloud, t_client


def _bench_one(
    spec: GeneratorSpec,
    trials: int,
    key_params: KeyParams,
    config: SolverConfig | None,
    server: tuple[str, int] | None,
    tol: float,
) -> BenchRecord:
    originals: list[float] = []
    clouds: list[float] = []
    clients: list[float] = []
    failed = 0
    for trial in range(trials):
        try:
            sample = _run_trial(spec, trial, key_params, config, server, tol)
        except _TRIAL_ERRORS:
            sample = None
        if sample is None:
            failed += 1
            continue
        originals.append(sample[0])
        clouds.append(sample[1])
        clients.append(sample[2])
    t_original = _mean(originals)
    t_cloud = _mean(clouds)
    t_client = _mean(clients)
    return BenchRecord(
        n=spec.n,
        m=spec.m,
        l=spec.l,
        t_original=t_original,
        t_cloud=t_cloud,
        t_client=t_client,
        speedup=_ratio(t_original, t_client),
        cloud_efficiency=_ratio(t_original, t_cloud),
        trials=trials,
        failed=failed,
    )


def run_bench(
    specs: Sequence[GeneratorSpec],
    trials: int,
    *,
    key_params: KeyParams | None = None,
    config: SolverConfig | None = None,
    server: tuple[str, int] | None = None,
    tol: float = 1e-6,
    progress: Callable[[BenchRecord], None] | None = None,
) -> list[BenchRecord]:
    """Run the full ladder; trials are sequential so timings do not contend."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    params = key_params if key_params is not None else KeyParams()
    cfg = config if config is not None else SolverConfig(eps_direction=BENCH_EPS_DIRECTION)
    records = []
    for spec in specs:
        record = _bench_one(spec, trials, params, cfg, server, tol)
        records.append(record)
        if progress is not None:
            progress(record)
    return records


def _write_rows(handle: TextIO, records: Iterable[BenchRecord]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        # Floats are written with repr precision so the ratio columns
        # recompute exactly from the time columns after a parse round trip.
        writer.writerow(
            [
                rec.n,
                rec.m,
                rec.l,
                rec.t_original,
                rec.t_cloud,
                rec.t_client,
                rec.speedup,
                rec.cloud_efficiency,
            ]
        )


def write_csv(records: Iterable[BenchRecord], dest: str | TextIO) -> None:
    """Write records as UTF-8 CSV with the fixed header."""
    if hasattr(dest, "write"):
        _write_rows(dest, records)
        return
    with open(dest, "w", encoding="utf-8", newline="") as handle:
        _write_rows(handle, records)
