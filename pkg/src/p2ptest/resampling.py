"""Admissibility screening and the simple / refined permutation tests.

Under the no-transmission null every reassignment of the observed
(infection status, onset day) pairs across the population has the same
maximized null likelihood, and so does any rearrangement of "interior"
onset days that preserves their sum.  The simple test resamples from the
first family, the refined test additionally draws the interior onsets
uniformly from all sum-preserving arrangements via exact composition
counting.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .likelihood import FitError, LikelihoodEvaluator
from .model import Outbreak

__all__ = [
    "Admissibility",
    "ArrangementSpec",
    "TestResult",
    "check_admissibility",
    "count_arrangements",
    "sample_arrangement",
    "permute_outbreak",
    "refine_onsets",
    "permutation_test",
]

SeedLike = Union[int, np.random.SeedSequence, None]


class Admissibility(Enum):
    """Which of the two nested models can have generated the data."""

    NULL_ONLY = "null_only"
    FULL_ONLY = "full_only"
    BOTH = "both"


def check_admissibility(
    outbreak: Outbreak, close_only: bool = False
) -> Admissibility:
    """Screen a dataset before testing.

    Any onset after day S + latent.max_days cannot have come from the
    common source, so only the full model is admissible.  If no case's
    possible infection days overlap any other case's possible infectious
    days, no infection can be attributed to person-to-person contact and
    only the null model is admissible.  ``close_only`` restricts potential
    infectors to household members (the two-parameter model).
    """
    config = outbreak.config
    d_min, d_max = config.latent.min_days, config.latent.max_days
    onsets = [o for o in outbreak.onsets if o is not None]
    if any(o > config.s_days + d_max for o in onsets):
        return Admissibility.FULL_ONLY
    if len(onsets) < 2:
        return Admissibility.NULL_ONLY

    cases = outbreak.case_indices
    o = np.array([outbreak.onsets[i] for i in cases], dtype=np.int64)
    hh = np.array(
        [outbreak.population.household_of[i] for i in cases], dtype=np.int64
    )
    lo = np.maximum(1, o - d_max)
    hi = o - d_min
    last_lag = config.infectious.support_max - 1
    # pair[i, j]: case j could have infected case i on some admissible day
    pair = (
        (o[None, :] <= hi[:, None])
        & (o[None, :] + last_lag >= lo[:, None])
        & (hi >= lo)[:, None]
    )
    np.fill_diagonal(pair, False)
    if close_only:
        pair &= hh[:, None] == hh[None, :]
    return Admissibility.BOTH if pair.any() else Admissibility.NULL_ONLY


@dataclass(frozen=True)
class ArrangementSpec:
    """n indistinguishable balls into m labeled boxes of capacity v each."""

    n: int
    m: int
    v: int

    def __post_init__(self) -> None:
        if self.m < 0 or self.v < 0:
            raise ValueError("m and v must be nonnegative")
        if not (0 <= self.n <= self.m * self.v):
            raise ValueError(
                f"n must be in [0, m*v] = [0, {self.m * self.v}], got {self.n}"
            )


@lru_cache(maxsize=None)
def _count(n: int, m: int, v: int) -> int:
    if n == 0:
        return 1
    if m == 0:
        return 0
    if m == 1:
        return 1 if n <= v else 0
    return sum(_count(n - k, m - 1, v) for k in range(min(n, v) + 1))


def count_arrangements(spec: ArrangementSpec) -> int:
    """Exact number of sequences (x_1..x_m), 0 <= x_i <= v, summing to n."""
    return _count(spec.n, spec.m, spec.v)


def _randbelow(bits_source: random.Random, bound: int) -> int:
    """Uniform integer in [0, bound) for arbitrary-precision bounds."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    bits = bound.bit_length()
    while True:
        r = bits_source.getrandbits(bits)
        if r < bound:
            return r


def sample_arrangement(
    spec: ArrangementSpec, rng: np.random.Generator
) -> np.ndarray:
    """Draw one arrangement uniformly from all valid ones.

    Sequential over boxes: box i receives k balls with probability
    proportional to the number of completions W(remaining - k, boxes left,
    v); the last box takes the remainder, which the weights guarantee fits.
    """
    total = count_arrangements(spec)
    if total == 0:
        raise ValueError(f"no valid arrangement for {spec}")
    n, m, v = spec.n, spec.m, spec.v
    # exact big-integer weights need arbitrary-width uniform draws; a
    # python Random seeded from the caller's stream provides getrandbits
    bits_source = random.Random(int(rng.integers(0, 2**63)))
    out = np.zeros(m, dtype=np.int64)
    remaining = n
    for i in range(m):
        boxes_after = m - i - 1
        if boxes_after == 0:
            out[i] = remaining
            break
        r = _randbelow(bits_source, _count(remaining, m - i, v))
        acc = 0
        for k in range(min(remaining, v) + 1):
            acc += _count(remaining - k, boxes_after, v)
            if r < acc:
                out[i] = k
                remaining -= k
                break
    return out


def permute_outbreak(outbreak: Outbreak, rng: np.random.Generator) -> Outbreak:
    """Uniformly reassign the (status, onset) pairs across all persons."""
    perm = rng.permutation(outbreak.population.n_persons)
    onsets = outbreak.onsets
    return outbreak.with_onsets(onsets[p] for p in perm)


def refine_onsets(outbreak: Outbreak, rng: np.random.Generator) -> Outbreak:
    """Resample interior onset days uniformly, preserving their sum.

    Cases with onset in [latent.max_days + 1, s_days + latent.min_days]
    have the full range of possible infection days wherever their onset
    sits in that range, so their onsets can move freely inside it without
    changing the null likelihood as long as the sum is kept.  Cases outside
    the range (early onsets with shortened infection windows, or onsets
    past the exposure window) keep their days.  Degenerate when fewer than
    two cases are movable or the range has a single day.
    """
    config = outbreak.config
    d_min, d_max = config.latent.min_days, config.latent.max_days
    first = d_max + 1
    last = config.s_days + d_min
    v = last - first
    eligible = [
        i
        for i, o in enumerate(outbreak.onsets)
        if o is not None and first <= o <= last
    ]
    if len(eligible) <= 1 or v <= 0:
        return outbreak
    balls = sum(outbreak.onsets[i] - first for i in eligible)
    arrangement = sample_arrangement(
        ArrangementSpec(n=balls, m=len(eligible), v=v), rng
    )
    onsets = list(outbreak.onsets)
    for i, x in zip(eligible, arrangement):
        onsets[i] = first + int(x)
    return outbreak.with_onsets(onsets)


@dataclass(frozen=True)
class TestResult:
    """Outcome of a transmission test.

    ``method`` is the procedure that actually produced the p-value;
    datasets where only one model is admissible skip resampling entirely
    and report ``degenerate``.  ``n_replicates`` counts usable resampling
    replicates (0 for degenerate and asymptotic results).
    """

    lambda_obs: Optional[float]
    p_value: float
    method: str
    admissibility: Admissibility
    n_replicates: int
    seed: Optional[int]
    n_failed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p_value out of range: {self.p_value}")


def _child_seed(seed: np.random.SeedSequence, k: int) -> np.random.SeedSequence:
    # stateless spawn: identical regardless of how often the parent was used
    return np.random.SeedSequence(
        entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + (k,)
    )


def _as_seedseq(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(entropy=seed)


def _replicate_lambda(
    outbreak: Outbreak,
    method: str,
    close_only: bool,
    seed: np.random.SeedSequence,
    k: int,
) -> float:
    """LRT statistic of the k-th resampled dataset; NaN marks a failed fit."""
    rng = np.random.default_rng(_child_seed(seed, k))
    rep = permute_outbreak(outbreak, rng)
    if method == "refined":
        rep = refine_onsets(rep, rng)
    if check_admissibility(rep, close_only) is Admissibility.NULL_ONLY:
        return 0.0
    try:
        return LikelihoodEvaluator(rep).fit_both(close_only=close_only)[2]
    except FitError:
        return math.nan


def _replicate_batch(args) -> list[float]:
    outbreak, method, close_only, seed, ks = args
    return [
        _replicate_lambda(outbreak, method, close_only, seed, k) for k in ks
    ]


def permutation_test(
    outbreak: Outbreak,
    method: str = "refined",
    n_replicates: int = 2000,
    seed: SeedLike = None,
    close_only: bool = False,
    add_one: bool = False,
    workers: int = 1,
    max_failure_frac: float = 0.01,
) -> TestResult:
    """Monte Carlo permutation test of the no-transmission hypothesis.

    Replicate k draws its random stream from (seed, k), so results are
    identical for any ``workers`` count.  The p-value is the fraction of
    replicate statistics at least as large as the observed one
    (``add_one`` switches to the (1 + count) / (1 + M) convention).
    Replicates whose fits fail are dropped; more than ``max_failure_frac``
    of them failing aborts the test.
    """
    if method not in ("simple", "refined"):
        raise ValueError(f"unknown permutation method: {method!r}")
    if n_replicates < 1:
        raise ValueError("n_replicates must be >= 1")
    seed_seq = _as_seedseq(seed)
    seed_out = seed if isinstance(seed, int) else None

    adm = check_admissibility(outbreak, close_only)
    if adm is Admissibility.FULL_ONLY:
        return TestResult(None, 0.0, "degenerate", adm, 0, seed_out)
    if adm is Admissibility.NULL_ONLY:
        return TestResult(None, 1.0, "degenerate", adm, 0, seed_out)

    lambda_obs = LikelihoodEvaluator(outbreak).fit_both(close_only=close_only)[2]

    if workers > 1:
        chunks = [
            (outbreak, method, close_only, seed_seq, list(ks))
            for ks in np.array_split(np.arange(n_replicates), workers * 4)
            if len(ks)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            lams_parts = list(pool.map(_replicate_batch, chunks))
        lams = [x for part in lams_parts for x in part]
    else:
        lams = [
            _replicate_lambda(outbreak, method, close_only, seed_seq, k)
            for k in range(n_replicates)
        ]

    good = [x for x in lams if not math.isnan(x)]
    n_failed = n_replicates - len(good)
    if n_failed > max_failure_frac * n_replicates:
        raise FitError(
            f"{n_failed}/{n_replicates} resampling replicates failed to fit"
        )
    n_used = len(good)
    exceed = sum(1 for x in good if x >= lambda_obs)
    if add_one:
        p = (1 + exceed) / (1 + n_used)
    else:
        p = exceed / n_used
    return TestResult(
        lambda_obs, p, method, adm, n_used, seed_out, n_failed
    )
