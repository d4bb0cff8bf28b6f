"""Power as the latent period grows.

Longer latent periods stretch the generation time between successive
cases, which separates household clusters in time and makes transmission
easier to detect.  This sweep keeps the latent period uniform over three
consecutive days and slides its mean upward, re-running the refined test
at desk scale for each setting.
"""

import time

import numpy as np

from p2ptest import (
    PeriodDistribution,
    Population,
    StudyConfig,
    TransmissionParams,
    power_study,
)

population = Population.uniform(100, 5)
params = TransmissionParams(b=0.001, p1=0.006, p2=0.00005)

print(f"b={params.b} p1={params.p1}: refined-test power vs latent period\n")
print(f"{'latent range':>12}  {'mean':>5}  {'power':>6}")
t0 = time.time()
for lo in (1, 3, 6, 10):
    latent = PeriodDistribution.uniform(lo, lo + 2)
    config = StudyConfig(
        s_days=30, latent=latent, infectious=PeriodDistribution.uniform(3, 5)
    )
    cell = power_study(
        population,
        config,
        [params],
        n_sims=60,
        n_perms=150,
        alpha=0.05,
        method="refined",
        master_seed=14,
        workers=2,
    )[0]
    print(f"{lo:>8}-{lo + 2:<3}  {latent.mean():5.1f}  {cell.power:6.3f}")
print(f"\n({time.time() - t0:.0f} s at desk scale; the upward trend sharpens")
print("with more simulations per cell)")
