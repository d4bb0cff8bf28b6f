"""Closed-form epidemiological measures.

Walks through the quantities the transmission model exposes before any
data arrives: the community probability of infection (CPI) from the
common source, within- and between-household secondary attack rates, and
the local reproductive number R for the community's first infective.
"""

import numpy as np

from p2ptest import PeriodDistribution, cpi, local_r, sar

infectious = PeriodDistribution.uniform(3, 5)

print("Community probability of infection over 30 days of exposure")
print(f"{'b':>8}  {'CPI':>7}")
for b in (0.0002, 0.0005, 0.001, 0.002, 0.005, 0.02):
    print(f"{b:8.4f}  {cpi(b, 30):7.4f}")

print()
print("Secondary attack rates for a 3-5 day infectious period (uniform)")
print(f"{'p':>8}  {'SAR':>7}")
for p in (0.004, 0.014, 0.046, 0.08):
    print(f"{p:8.4f}  {sar(p, infectious):7.4f}")

print()
print("Local R in a community of 100 households of 5 (500 persons)")
print(f"{'p1':>8}  {'SAR1':>7}  {'R':>6}")
p2 = 0.00005
s2 = sar(p2, infectious)
for p1 in (0.004, 0.014, 0.030, 0.046):
    s1 = sar(p1, infectious)
    r = local_r(s1, s2, household_size=5, n_persons=500)
    print(f"{p1:8.4f}  {s1:7.4f}  {r:6.3f}")

print()
print("Even at the largest p1 above, R stays below 1: these are outbreaks")
print("that smolder through households rather than explode, which is what")
print("makes detecting the person-to-person component a statistical problem.")
