"""Empirical distribution checks on the masking transforms.

Two checks back the indistinguishability claim at desk scale. The entry
check masks a fixed matrix entry under many independent keys and compares
the result against the uniform law it should follow; the shuffle check
verifies that the row permutation places every row in every slot with equal
frequency.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import DomainError
from .transform import KeyParams, keygen

__all__ = [
    "ALPHA",
    "MaskDistributionReport",
    "ShuffleUniformityReport",
    "check_entry_masking",
    "check_shuffle_uniformity",
]

ALPHA = 0.01
_MIN_TRIALS = 1000
_MIN_KEYS = 100


@dataclass(frozen=True)
class MaskDistributionReport:
    """KS and sign-balance summary for a masked scalar entry."""

    entry_value: float
    trials: int
    width: float
    ks_statistic: float
    ks_pvalue: float
    sign_frequency: float
    sign_tolerance: float
    alpha: float
    passed: bool


@dataclass(frozen=True, eq=False)
class ShuffleUniformityReport:
    """Per-slot frequency summary for the row shuffle."""

    size: int
    keys: int
    expected_frequency: float
    max_deviation: float
    tolerance: float
    passed: bool
    frequency: np.ndarray


def check_entry_masking(
    entry_value: float,
    params: KeyParams | None = None,
    trials: int = 10000,
) -> MaskDistributionReport:
    """Mask one equality-row entry under ``trials`` independent keys.

    The masked entry is c_eq * scale * entry with scale drawn uniformly from
    the mask range, so the samples should follow uniform(-W, W) with
    W = c_eq * mask_range * |entry| (up to the vanishing dead zone around
    zero). Pass requires the KS p-value to clear ``ALPHA`` and the positive
    sign frequency to sit within a four-sigma band around one half.
    """
    params = params if params is not None else KeyParams()
    value = float(entry_value)
    if not np.isfinite(value):
        raise DomainError("entry value must be finite")
    if value == 0.0:
        raise DomainError(
            "a zero entry is a fixed point of row scaling and is never masked"
        )
    if trials < _MIN_TRIALS:
        raise DomainError(f"need at least {_MIN_TRIALS} trials, got {trials}")

    samples = np.empty(trials)
    for t in range(trials):
        key = keygen(1, 1, 0, dataclasses.replace(params, seed=params.seed + t))
        samples[t] = params.c_eq * key.eq_scale[0] * value

    width = params.c_eq * params.mask_range * abs(value)
    law = scipy.stats.uniform(loc=-width, scale=2.0 * width)
    ks = scipy.stats.kstest(samples, law.cdf)
    sign_frequency = float(np.mean(samples > 0))
    sign_tolerance = 4.0 * 0.5 / np.sqrt(trials)
    passed = bool(
        ks.pvalue > ALPHA and abs(sign_frequency - 0.5) <= sign_tolerance
    )
    return MaskDistributionReport(
        entry_value=value,
        trials=trials,
        width=width,
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        sign_frequency=sign_frequency,
        sign_tolerance=sign_tolerance,
        alpha=ALPHA,
        passed=passed,
    )


def check_shuffle_uniformity(
    size: int = 10,
    keys: int = 1000,
    params: KeyParams | None = None,
) -> ShuffleUniformityReport:
    """Count where each equality row lands across ``keys`` independent keys.

    ``frequency[i, s]`` is the fraction of keys whose row permutation puts
    original row i into slot s; under a uniform shuffle every cell should be
    near 1/size.
    """
    params = params if params is not None else KeyParams()
    if size < 2:
        raise DomainError("size must be at least 2")
    if keys < _MIN_KEYS:
        raise DomainError(f"need at least {_MIN_KEYS} keys, got {keys}")

    counts = np.zeros((size, size))
    slots = np.arange(size)
    for k in range(keys):
        key = keygen(size, size, 0, dataclasses.replace(params, seed=params.seed + k))
        counts[key.row_perm_eq.image, slots] += 1.0

    frequency = counts / keys
    expected = 1.0 / size
    max_deviation = float(np.abs(frequency - expected).max())
    # 3.29 sigma per cell keeps the false-alarm rate around 0.1% per cell.
    tolerance = 3.29 * np.sqrt(expected * (1.0 - expected) / keys)
    return ShuffleUniformityReport(
        size=size,
        keys=keys,
        expected_frequency=expected,
        max_deviation=max_deviation,
        tolerance=tolerance,
        passed=bool(max_deviation <= tolerance),
        frequency=frequency,
    )
