"""Asymptotic reference test for the two-parameter (b, p1) model.

When transmission can only occur within households and only data observed
up to day S are used, the LRT statistic for p1 = 0 has an asymptotic null
distribution that is an equal mixture of a point mass at 0 and a
chi-square with one degree of freedom.  This test exists purely as a
benchmark for the permutation tests.
"""

from __future__ import annotations

import math
from dataclasses import replace

from scipy.stats import norm

from .likelihood import LikelihoodEvaluator
from .model import Outbreak
from .resampling import Admissibility, TestResult, check_admissibility

__all__ = [
    "truncate_at_s",
    "lrt_two_param",
    "asymptotic_p_value",
    "asymptotic_test",
]


def truncate_at_s(outbreak: Outbreak) -> Outbreak:
    """Restrict a dataset to what was observed up to day S.

    Persons with onset after S become symptom-free-through-S and the study
    horizon is moved to S.
    """
    s = outbreak.config.s_days
    onsets = tuple(
        o if (o is not None and o <= s) else None for o in outbreak.onsets
    )
    return Outbreak(
        outbreak.population, onsets, replace(outbreak.config, t_days=s)
    )


def lrt_two_param(outbreak: Outbreak) -> float:
    """LRT statistic for p1 = 0 with p2 fixed at 0, on truncated data."""
    s = outbreak.config.s_days
    if any(o is not None and o > s for o in outbreak.onsets):
        raise ValueError(
            "two-parameter test requires data truncated at day S; "
            "apply truncate_at_s first"
        )
    return LikelihoodEvaluator(outbreak).fit_both(close_only=True)[2]


def asymptotic_p_value(lam: float) -> float:
    """Upper tail of the half-chi0 / half-chi1 mixture at ``lam``.

    For lam > 0 only the chi-square component contributes:
    p = 0.5 * P(chi2_1 >= lam) = Phi(-sqrt(lam)).  At lam = 0 the point
    mass makes 0 the least extreme outcome, so p = 1.
    """
    if lam < 0:
        raise ValueError("the LRT statistic is nonnegative")
    if lam == 0.0:
        return 1.0
    return float(norm.sf(math.sqrt(lam)))


def asymptotic_test(outbreak: Outbreak, truncate: bool = True) -> TestResult:
    """Run the asymptotic two-parameter test (truncating at S by default)."""
    data = truncate_at_s(outbreak) if truncate else outbreak
    adm = check_admissibility(data, close_only=True)
    if adm is Admissibility.NULL_ONLY:
        return TestResult(None, 1.0, "degenerate", adm, 0, None)
    lam = lrt_two_param(data)
    return TestResult(
        lam, asymptotic_p_value(lam), "asymptotic", adm, 0, None
    )
