"""Resampling tests for person-to-person transmission of infectious disease.

Given a line list of symptom-onset days grouped by household, the package
evaluates and maximizes chain-binomial transmission likelihoods, computes
the likelihood-ratio statistic for the no-transmission null, calibrates it
with simple or refined permutation null distributions (or the asymptotic
half-chi-square reference for the within-household model), and provides a
simulator plus power-study harness.
"""

from .asymptotic import (
    asymptotic_p_value,
    asymptotic_test,
    lrt_two_param,
    truncate_at_s,
)
from .likelihood import (
    FitError,
    FitResult,
    LikelihoodEvaluator,
    escape_prob,
    lrt_statistic,
    mle_full,
    mle_null,
    pairwise_daily_prob,
    person_log_lik,
    total_log_lik,
)
from .lineio import LineListError, LineListRecord, parse_line_list, write_line_list
from .model import (
    DerivedMeasures,
    Outbreak,
    PeriodDistribution,
    Population,
    StudyConfig,
    TransmissionParams,
    cpi,
    derived_measures,
    infectious_weight,
    local_r,
    sar,
)
from .resampling import (
    Admissibility,
    ArrangementSpec,
    TestResult,
    check_admissibility,
    count_arrangements,
    permutation_test,
    permute_outbreak,
    refine_onsets,
    sample_arrangement,
)
from .simulate import (
    PowerCell,
    SimOutcome,
    eval_power_formula,
    power_grid_csv,
    power_study,
    simulate_epidemic,
)

__version__ = "0.1.0"

__all__ = [
    "Admissibility",
    "ArrangementSpec",
    "DerivedMeasures",
    "FitError",
    "FitResult",
    "LikelihoodEvaluator",
    "LineListError",
    "LineListRecord",
    "Outbreak",
    "PeriodDistribution",
    "Population",
    "PowerCell",
    "SimOutcome",
    "StudyConfig",
    "TestResult",
    "TransmissionParams",
    "asymptotic_p_value",
    "asymptotic_test",
    "check_admissibility",
    "count_arrangements",
    "cpi",
    "derived_measures",
    "escape_prob",
    "eval_power_formula",
    "infectious_weight",
    "local_r",
    "lrt_statistic",
    "lrt_two_param",
    "mle_full",
    "mle_null",
    "pairwise_daily_prob",
    "parse_line_list",
    "permutation_test",
    "permute_outbreak",
    "person_log_lik",
    "power_grid_csv",
    "power_study",
    "refine_onsets",
    "sample_arrangement",
    "sar",
    "simulate_epidemic",
    "total_log_lik",
    "truncate_at_s",
    "write_line_list",
    "__version__",
]
