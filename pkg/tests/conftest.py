import numpy as np
import pytest

from p2ptest import (
    Outbreak,
    PeriodDistribution,
    Population,
    StudyConfig,
    TransmissionParams,
)


@pytest.fixture
def g13():
    return PeriodDistribution.uniform(1, 3)


@pytest.fixture
def f35():
    return PeriodDistribution.uniform(3, 5)


@pytest.fixture
def paper_config(g13, f35):
    """The simulation-study setting: S = 30, uniform latent and infectious."""
    return StudyConfig(s_days=30, latent=g13, infectious=f35)


@pytest.fixture
def toy_outbreak():
    """Two households {A, B}, {C}; A and C are cases, B escaped.

    Small enough for hand calculation: S=5, T=12, latent U{1,2},
    infectious U{2,3}.
    """
    pop = Population(((0, 1), (2,)))
    cfg = StudyConfig(
        s_days=5,
        latent=PeriodDistribution.uniform(1, 2),
        infectious=PeriodDistribution.uniform(2, 3),
        t_days=12,
    )
    return Outbreak(pop, (3, None, 5), cfg)


def random_small_outbreak(rng, max_households=6, allow_late_onsets=True):
    """A random small study instance for property checks."""
    n_hh = int(rng.integers(2, max_households + 1))
    sizes = rng.integers(1, 5, size=n_hh)
    households = []
    idx = 0
    for s in sizes:
        households.append(tuple(range(idx, idx + int(s))))
        idx += int(s)
    pop = Population(tuple(households))
    d_min = int(rng.integers(1, 3))
    d_max = d_min + int(rng.integers(0, 3))
    e_min = int(rng.integers(1, 3))
    e_max = e_min + int(rng.integers(0, 3))
    latent = PeriodDistribution.from_weights(
        d_min, d_max, rng.random(d_max - d_min + 1) + 0.05
    )
    infectious = PeriodDistribution.from_weights(
        e_min, e_max, rng.random(e_max - e_min + 1) + 0.05
    )
    s_days = int(rng.integers(3, 12))
    t_days = s_days + d_max + int(rng.integers(0, 8))
    cfg = StudyConfig(
        s_days=s_days,
        latent=latent,
        infectious=infectious,
        t_days=t_days,
        censor_uninfected=bool(rng.integers(0, 2)),
    )
    hi_onset = t_days if allow_late_onsets else min(t_days, s_days + d_max)
    onsets = [
        int(rng.integers(d_min + 1, hi_onset + 1)) if rng.random() < 0.4 else None
        for _ in range(pop.n_persons)
    ]
    return Outbreak(pop, tuple(onsets), cfg)


def random_params(rng):
    return TransmissionParams(
        b=float(rng.random() * 0.3),
        p1=float(rng.random() * 0.3),
        p2=float(rng.random() * 0.05),
    )


# ---------------------------------------------------------------------------
# Independent oracle: a word-for-word transcription of the probability model,
# kept free of any package likelihood code so it can stand as a cross-check.
# ---------------------------------------------------------------------------


def oracle_still_infectious(lag, infectious):
    """P(an infective is infectious at integer lag after onset)."""
    if lag < 0:
        return 0.0
    total = 0.0
    for duration in range(infectious.min_days, infectious.max_days + 1):
        if duration >= lag + 1:
            total += infectious.pmf[duration - infectious.min_days]
    return total


def oracle_escape(i, t, outbreak, b, p1, p2):
    cfg = outbreak.config
    pop = outbreak.population
    e = 1.0 - b if t <= cfg.s_days else 1.0
    for j in range(pop.n_persons):
        if j == i or outbreak.onsets[j] is None:
            continue
        w = oracle_still_infectious(t - outbreak.onsets[j], cfg.infectious)
        p = p1 if pop.household_of[j] == pop.household_of[i] else p2
        e *= 1.0 - p * w
    return e


def oracle_total_loglik(outbreak, b, p1, p2):
    import math

    cfg = outbreak.config
    latent = cfg.latent
    total = 0.0
    for i in range(outbreak.population.n_persons):
        onset = outbreak.onsets[i]
        if onset is None:
            horizon = (
                cfg.t_days - latent.max_days
                if cfg.censor_uninfected
                else cfg.t_days
            )
            for t in range(1, horizon + 1):
                e = oracle_escape(i, t, outbreak, b, p1, p2)
                if e <= 0.0:
                    return -math.inf
                total += math.log(e)
            continue
        mix = 0.0
        cum = 1.0
        for t in range(1, onset - latent.min_days + 1):
            e = oracle_escape(i, t, outbreak, b, p1, p2)
            duration = onset - t
            if latent.min_days <= duration <= latent.max_days:
                mix += latent.pmf[duration - latent.min_days] * (1.0 - e) * cum
            cum *= e
        if mix <= 0.0:
            return -math.inf
        total += math.log(mix)
    return total


def zoom_grid_argmax(fn, lo, hi, dims, rounds=4, points=9):
    """Iteratively refined grid search; the brute-force MLE oracle."""
    lo = np.full(dims, lo, dtype=float)
    hi = np.full(dims, hi, dtype=float)
    best_x = None
    best_f = -np.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[d], hi[d], points) for d in range(dims)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        for x in pts:
            f = fn(x)
            if f > best_f:
                best_f = f
                best_x = x.copy()
        span = (hi - lo) / (points - 1)
        lo = np.maximum(0.0, best_x - span)
        hi = np.minimum(1.0 - 1e-9, best_x + span)
    return best_x, best_f
