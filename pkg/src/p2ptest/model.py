"""Core domain types and closed-form epidemiological measures.

A study observes a community of households exposed to an external common
source of infection for ``s_days`` days.  Infected persons incubate for a
random latent period (equal to the incubation period), show symptoms, and
are then infectious for a random number of days.  Everything downstream
(likelihoods, permutation tests, the simulator) is built on the types in
this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "PeriodDistribution",
    "Population",
    "StudyConfig",
    "Outbreak",
    "TransmissionParams",
    "DerivedMeasures",
    "cpi",
    "sar",
    "local_r",
    "infectious_weight",
    "derived_measures",
]

_PMF_TOL = 1e-12


@dataclass(frozen=True)
class PeriodDistribution:
    """Discrete distribution of a duration in whole days.

    Used for both the latent period (infection to symptom onset) and the
    infectious period (symptom onset to end of infectiousness).  ``pmf[k]``
    is the probability of a duration of ``min_days + k`` days.
    """

    min_days: int
    max_days: int
    pmf: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.min_days < 1:
            raise ValueError(f"min_days must be >= 1, got {self.min_days}")
        if self.max_days < self.min_days:
            raise ValueError("max_days must be >= min_days")
        n = self.max_days - self.min_days + 1
        if len(self.pmf) != n:
            raise ValueError(f"pmf must have {n} entries, got {len(self.pmf)}")
        if any(p < 0 for p in self.pmf):
            raise ValueError("pmf entries must be nonnegative")
        if abs(sum(self.pmf) - 1.0) > _PMF_TOL:
            raise ValueError(f"pmf must sum to 1 (got {sum(self.pmf)!r})")
        object.__setattr__(self, "pmf", tuple(float(p) for p in self.pmf))

    @classmethod
    def uniform(cls, min_days: int, max_days: int) -> "PeriodDistribution":
        n = max_days - min_days + 1
        return cls(min_days, max_days, tuple([1.0 / n] * n))

    @classmethod
    def degenerate(cls, days: int) -> "PeriodDistribution":
        return cls(days, days, (1.0,))

    @classmethod
    def from_weights(
        cls, min_days: int, max_days: int, weights: Sequence[float]
    ) -> "PeriodDistribution":
        total = float(sum(weights))
        if total <= 0:
            raise ValueError("weights must have positive sum")
        return cls(min_days, max_days, tuple(w / total for w in weights))

    def prob(self, days: int) -> float:
        """P(duration == days)."""
        if days < self.min_days or days > self.max_days:
            return 0.0
        return self.pmf[days - self.min_days]

    def tail(self, days: int) -> float:
        """P(duration >= days)."""
        if days <= self.min_days:
            return 1.0
        if days > self.max_days:
            return 0.0
        return float(sum(self.pmf[days - self.min_days :]))

    def mean(self) -> float:
        return float(
            sum(p * (self.min_days + k) for k, p in enumerate(self.pmf))
        )

    @property
    def support_max(self) -> int:
        """Largest duration with positive probability."""
        for k in range(len(self.pmf) - 1, -1, -1):
            if self.pmf[k] > 0:
                return self.min_days + k
        raise ValueError("pmf has no positive entry")

    def sample(self, rng: np.random.Generator, size: int | None = None):
        days = np.arange(self.min_days, self.max_days + 1)
        return rng.choice(days, size=size, p=np.asarray(self.pmf))


def infectious_weight(lag: int, infectious: PeriodDistribution) -> float:
    """Probability that an infective is still infectious ``lag`` days after onset.

    Infectiousness starts on the onset day itself (lag 0) and lasts for the
    infectious period, so the weight is P(duration >= lag + 1); it is 1 for
    lags below the minimum duration and 0 for negative lags or lags at or
    beyond the maximum duration.
    """
    if lag < 0:
        return 0.0
    return infectious.tail(lag + 1)


@dataclass(frozen=True)
class Population:
    """Households of persons; close contact = same household.

    ``households`` maps household index -> tuple of person indices
    (0..n_persons-1, a partition).  ``ids`` are external person identifiers,
    defaulting to "p0001"-style labels.
    """

    households: tuple[tuple[int, ...], ...]
    ids: tuple[str, ...] = ()
    household_ids: tuple[str, ...] = ()
    household_of: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        seen: set[int] = set()
        n = 0
        for hh in self.households:
            if not hh:
                raise ValueError("households must be nonempty")
            for p in hh:
                if p in seen:
                    raise ValueError(f"person {p} appears in two households")
                seen.add(p)
            n += len(hh)
        if seen != set(range(n)):
            raise ValueError("person indices must be 0..n_persons-1")
        if not self.ids:
            width = len(str(n))
            object.__setattr__(
                self, "ids", tuple(f"p{i + 1:0{width}d}" for i in range(n))
            )
        if len(self.ids) != n:
            raise ValueError("ids must have one entry per person")
        if not self.household_ids:
            width = len(str(len(self.households)))
            object.__setattr__(
                self,
                "household_ids",
                tuple(f"h{i + 1:0{width}d}" for i in range(len(self.households))),
            )
        if len(self.household_ids) != len(self.households):
            raise ValueError("household_ids must have one entry per household")
        hh_of = [0] * n
        for h, members in enumerate(self.households):
            for p in members:
                hh_of[p] = h
        object.__setattr__(self, "household_of", tuple(hh_of))

    @classmethod
    def uniform(cls, n_households: int, household_size: int) -> "Population":
        """``n_households`` households, each of ``household_size`` persons."""
        households = tuple(
            tuple(range(h * household_size, (h + 1) * household_size))
            for h in range(n_households)
        )
        return cls(households)

    @property
    def n_persons(self) -> int:
        return len(self.household_of)

    @property
    def n_households(self) -> int:
        return len(self.households)

    @property
    def uniform_household_size(self) -> Optional[int]:
        """Common household size, or None when sizes differ (or no households)."""
        sizes = {len(hh) for hh in self.households}
        return sizes.pop() if len(sizes) == 1 else None


@dataclass(frozen=True)
class StudyConfig:
    """Study-level constants: exposure window, horizon and period distributions.

    ``t_days`` may be None for configs fed to the simulator (the horizon is
    then determined by the simulated epidemic).  When
    ``censor_uninfected`` is set (the default), symptom-free persons
    contribute escape probabilities only up to day ``t_days - latent.max_days``,
    a partial adjustment for infections whose latent period would extend past
    the horizon.
    """

    s_days: int
    latent: PeriodDistribution
    infectious: PeriodDistribution
    t_days: Optional[int] = None
    censor_uninfected: bool = True

    def __post_init__(self) -> None:
        if self.s_days < 1:
            raise ValueError("s_days must be >= 1")
        if self.t_days is not None and self.t_days < self.s_days:
            raise ValueError("t_days must be >= s_days")

    @property
    def horizon(self) -> int:
        if self.t_days is None:
            raise ValueError("study horizon t_days is not set")
        return self.t_days

    @property
    def uninfected_horizon(self) -> int:
        """Last day on which symptom-free persons contribute escape terms."""
        if self.censor_uninfected:
            return self.horizon - self.latent.max_days
        return self.horizon

    def with_horizon(self, t_days: int) -> "StudyConfig":
        return replace(self, t_days=t_days)


@dataclass(frozen=True)
class Outbreak:
    """The line list: per-person symptom-onset day (or None = never observed).

    Days are 1-based; the earliest possible infection day is day 1, so the
    earliest possible onset is ``latent.min_days + 1``.
    """

    population: Population
    onsets: tuple[Optional[int], ...]
    config: StudyConfig

    def __post_init__(self) -> None:
        if len(self.onsets) != self.population.n_persons:
            raise ValueError("one onset entry per person required")
        object.__setattr__(
            self,
            "onsets",
            tuple(None if o is None else int(o) for o in self.onsets),
        )

    def validate(self) -> None:
        """Strict bounds check, used when ingesting external data."""
        lo = self.config.latent.min_days + 1
        hi = self.config.horizon
        for i, o in enumerate(self.onsets):
            if o is None:
                continue
            if o < lo:
                raise ValueError(
                    f"person {self.population.ids[i]}: onset day {o} is before "
                    f"the earliest possible onset (day {lo})"
                )
            if o > hi:
                raise ValueError(
                    f"person {self.population.ids[i]}: onset day {o} is after "
                    f"the study horizon (day {hi})"
                )

    @property
    def case_indices(self) -> tuple[int, ...]:
        return tuple(i for i, o in enumerate(self.onsets) if o is not None)

    @property
    def n_infected(self) -> int:
        return sum(1 for o in self.onsets if o is not None)

    def with_onsets(self, onsets: Iterable[Optional[int]]) -> "Outbreak":
        return Outbreak(self.population, tuple(onsets), self.config)


@dataclass(frozen=True)
class TransmissionParams:
    """Model unknowns: daily infection probabilities.

    ``b`` from the common source, ``p1`` from a same-household (close)
    contact, ``p2`` from an other-household (casual) contact.
    """

    b: float
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("b", "p1", "p2"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must be in [0, 1), got {v}")


@dataclass(frozen=True)
class DerivedMeasures:
    """Epidemiological summaries derived from the transmission parameters."""

    cpi: float
    sar1: float
    sar2: float
    local_r: float


def cpi(b: float, s_days: int) -> float:
    """Community probability of infection over the whole exposure window.

    1 - (1 - b)^S: the chance that a person is infected by the common source
    at some point during the S days it is active.
    """
    if not (0.0 <= b < 1.0):
        raise ValueError("b must be in [0, 1)")
    if s_days < 1:
        raise ValueError("s_days must be >= 1")
    return -np.expm1(s_days * np.log1p(-b))


def sar(p: float, infectious: PeriodDistribution) -> float:
    """Secondary attack rate for daily transmission probability ``p``.

    Probability that a susceptible exposed to one infective over that
    infective's whole infectious period is infected:
    sum_l f(l) (1 - (1 - p)^l).
    """
    if not (0.0 <= p < 1.0):
        raise ValueError("p must be in [0, 1)")
    return float(
        sum(
            f * -np.expm1(l * np.log1p(-p))
            for l, f in zip(
                range(infectious.min_days, infectious.max_days + 1),
                infectious.pmf,
            )
        )
    )


def local_r(sar1: float, sar2: float, household_size: int, n_persons: int) -> float:
    """Expected infections caused by the community's first infective.

    (M - 1) household contacts at SAR1 plus (N - M) outside contacts at SAR2,
    with M the household size and N the total number of persons.
    """
    if household_size < 1 or n_persons < household_size:
        raise ValueError("need n_persons >= household_size >= 1")
    return (household_size - 1) * sar1 + (n_persons - household_size) * sar2


def derived_measures(
    params: TransmissionParams, config: StudyConfig, population: Population
) -> DerivedMeasures:
    """CPI, SARs and local R for a parameter triple in a given study."""
    s1 = sar(params.p1, config.infectious)
    s2 = sar(params.p2, config.infectious)
    m = population.uniform_household_size
    r = (
        local_r(s1, s2, m, population.n_persons)
        if m is not None
        else float("nan")
    )
    return DerivedMeasures(
        cpi=cpi(params.b, config.s_days), sar1=s1, sar2=s2, local_r=r
    )
