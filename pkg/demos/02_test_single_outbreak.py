"""Testing one outbreak for person-to-person transmission.

Simulates a single epidemic with genuine household transmission, then
runs the three available tests on the resulting line list: the simple
permutation test, the refined permutation test, and the asymptotic
reference test for the within-household model.
"""

import numpy as np

from p2ptest import (
    PeriodDistribution,
    Population,
    StudyConfig,
    TransmissionParams,
    asymptotic_test,
    check_admissibility,
    derived_measures,
    mle_full,
    permutation_test,
    simulate_epidemic,
    truncate_at_s,
    write_line_list,
)

rng = np.random.default_rng(20240901)
population = Population.uniform(100, 5)
config = StudyConfig(
    s_days=30,
    latent=PeriodDistribution.uniform(1, 3),
    infectious=PeriodDistribution.uniform(3, 5),
)
truth = TransmissionParams(b=0.001, p1=0.025, p2=0.00005)

outcome = simulate_epidemic(population, config, truth, rng)
outbreak = outcome.outbreak
print(
    f"simulated epidemic: {outcome.n_total} cases "
    f"({outcome.n_index} from the common source), "
    f"exhausted on day {outcome.exhaustion_day}"
)
print(f"admissibility: {check_admissibility(outbreak).value}")

fit = mle_full(outbreak)
d = derived_measures(fit.params, config, population)
print(
    f"MLEs: b={fit.params.b:.5f} p1={fit.params.p1:.5f} p2={fit.params.p2:.6f}"
)
print(f"implied CPI={d.cpi:.3f} SAR1={d.sar1:.3f} R={d.local_r:.2f}")

print()
for method in ("simple", "refined"):
    res = permutation_test(outbreak, method=method, n_replicates=500, seed=7)
    print(
        f"{method:>10} permutation: lambda={res.lambda_obs:.3f} "
        f"p={res.p_value:.4f} ({res.n_replicates} replicates)"
    )

res = asymptotic_test(outbreak)
print(
    f"{'asymptotic':>10} (within-household, data truncated at day "
    f"{config.s_days}): lambda={res.lambda_obs:.3f} p={res.p_value:.4f}"
)

print()
print("First lines of the line list the tests consumed:")
print("\n".join(write_line_list(population, outbreak).splitlines()[:6]))
print("...")
