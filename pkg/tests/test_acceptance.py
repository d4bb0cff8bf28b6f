"""Acceptance suite: one test per release criterion, at the stated scales.

Each test prints a single PASS/FAIL line (run pytest with -s or check the
captured output).  The Monte Carlo criteria use fixed master seeds and
fixed scales, so their outcomes are reproducible bit for bit; the heavy
ones (2, 3, 4) dominate the suite's runtime and use both cores.
"""

import itertools
import json
import math
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chisquare

from p2ptest import (
    ArrangementSpec,
    Admissibility,
    FitError,
    Outbreak,
    PeriodDistribution,
    Population,
    StudyConfig,
    TransmissionParams,
    asymptotic_p_value,
    check_admissibility,
    cli,
    count_arrangements,
    cpi,
    local_r,
    mle_null,
    permute_outbreak,
    power_study,
    refine_onsets,
    sample_arrangement,
    sar,
    simulate_epidemic,
    total_log_lik,
)
from p2ptest.likelihood import LikelihoodEvaluator

from conftest import random_small_outbreak

WORKERS = 2


def report(num: int, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    assert ok, f"criterion {num}: {detail}"


def sig2(x: float) -> float:
    return float(f"{x:.2g}")


@pytest.fixture(scope="module")
def paper_study():
    return StudyConfig(
        s_days=30,
        latent=PeriodDistribution.uniform(1, 3),
        infectious=PeriodDistribution.uniform(3, 5),
    )


def test_criterion_01_closed_form_columns():
    t0 = time.time()
    f35 = PeriodDistribution.uniform(3, 5)
    values = {
        "sar(0.014)": (sig2(sar(0.014, f35)), 0.055),
        "sar(0.08)": (sig2(sar(0.08, f35)), 0.28),
        "local_r": (sig2(local_r(0.055, 0.0002, 5, 500)), 0.32),
        "cpi(0.001,30)": (sig2(cpi(0.001, 30)), 0.030),
    }
    elapsed = time.time() - t0
    ok = all(got == want for got, want in values.values()) and elapsed < 1.0
    detail = (
        ", ".join(f"{k}={got}" for k, (got, _) in values.items())
        + f" ({elapsed * 1e3:.0f} ms)"
    )
    report(1, ok, detail)


def test_criterion_02_type_i_error_refined(paper_study):
    t0 = time.time()
    cell = power_study(
        Population.uniform(100, 5),
        paper_study,
        [TransmissionParams(b=0.002)],
        n_sims=400,
        n_perms=500,
        alpha=0.05,
        method="refined",
        master_seed=101,
        workers=WORKERS,
    )[0]
    ok = 0.027 <= cell.power <= 0.077
    report(
        2,
        ok,
        f"refined type I error = {cell.power:.4f} in [0.027, 0.077] "
        f"(400 sims x 500 perms, {time.time() - t0:.0f} s)",
    )


def test_criterion_03_power_cell_refined(paper_study):
    t0 = time.time()
    cell = power_study(
        Population.uniform(100, 5),
        paper_study,
        [TransmissionParams(b=0.002, p1=0.006, p2=0.00005)],
        n_sims=300,
        n_perms=500,
        alpha=0.05,
        method="refined",
        master_seed=101,
        workers=WORKERS,
    )[0]
    ok = abs(cell.power - 0.79) <= 0.08
    report(
        3,
        ok,
        f"refined power = {cell.power:.4f}, target 0.79 +- 0.08 "
        f"(300 sims x 500 perms, {time.time() - t0:.0f} s)",
    )


def test_criterion_04_small_sample_comparison(paper_study):
    t0 = time.time()
    pop = Population.uniform(4, 5)
    grid = [TransmissionParams(b=0.01, p1=0.08)]
    powers = {}
    for method in ("refined", "simple", "asymptotic"):
        powers[method] = power_study(
            pop,
            paper_study,
            grid,
            n_sims=300,
            n_perms=500,
            alpha=0.05,
            method=method,
            master_seed=404,
            workers=WORKERS,
            two_param=True,
        )[0].power
    ok = (
        abs(powers["refined"] - 0.85) <= 0.08
        and abs(powers["asymptotic"] - 0.85) <= 0.08
        and abs(powers["simple"] - 0.81) <= 0.08
        and powers["refined"] >= powers["simple"]
    )
    report(
        4,
        ok,
        f"refined={powers['refined']:.3f} (0.85±0.08), "
        f"simple={powers['simple']:.3f} (0.81±0.08), "
        f"asymptotic={powers['asymptotic']:.3f} (0.85±0.08), "
        f"refined >= simple ({time.time() - t0:.0f} s)",
    )


def test_criterion_05_combinatorics_oracle():
    t0 = time.time()
    count_ok = True
    for m in range(1, 6):
        for v in range(1, 6):
            by_sum = Counter(
                sum(x) for x in itertools.product(range(v + 1), repeat=m)
            )
            for n in range(0, m * v + 1):
                if count_arrangements(ArrangementSpec(n, m, v)) != by_sum[n]:
                    count_ok = False

    gof_ps = {}
    rng = np.random.default_rng(12345)
    for n, m, v in ((3, 3, 2), (6, 4, 3)):
        spec = ArrangementSpec(n, m, v)
        arrangements = [
            x
            for x in itertools.product(range(v + 1), repeat=m)
            if sum(x) == n
        ]
        counts = Counter(
            tuple(sample_arrangement(spec, rng)) for _ in range(100_000)
        )
        gof_ps[(n, m, v)] = chisquare(
            [counts[a] for a in arrangements]
        ).pvalue
    elapsed = time.time() - t0
    ok = count_ok and all(p > 0.01 for p in gof_ps.values()) and elapsed < 60
    report(
        5,
        ok,
        f"counts match enumeration (m<=5, v<=5); uniformity p-values "
        + ", ".join(f"{k}={p:.3f}" for k, p in gof_ps.items())
        + f" ({elapsed:.0f} s)",
    )


def test_criterion_06_equivalence_class_invariance(paper_study):
    t0 = time.time()
    outbreak = simulate_epidemic(
        Population.uniform(100, 5),
        paper_study,
        TransmissionParams(b=0.002),
        np.random.default_rng(42),
    ).outbreak
    assert check_admissibility(outbreak) is Admissibility.BOTH
    base = mle_null(outbreak).log_lik
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(10_000):
        rep = refine_onsets(permute_outbreak(outbreak, rng), rng)
        worst = max(worst, abs(mle_null(rep).log_lik - base))
    ok = worst < 1e-9
    report(
        6,
        ok,
        f"max |null loglik shift| over 10^4 refined replicates = {worst:.2e} "
        f"< 1e-9 ({time.time() - t0:.0f} s)",
    )


def test_criterion_07_likelihood_and_mle_oracles(toy_outbreak):
    t0 = time.time()
    # hand-expanded toy likelihood (see test_likelihood for the derivation)
    case_a = 0.5 * 0.1 + 0.5 * 0.1 * 0.9
    e_c = 0.9 * 0.95
    case_c = 0.5 * (1 - e_c) * 0.81 + 0.5 * (1 - e_c) * 0.81 * e_c
    escaped_b = (
        0.81 * (0.9 * 0.8) ** 2 * (0.9 * 0.9 * 0.95) * 0.95 * 0.975
    )
    expected = math.log(case_a) + math.log(case_c) + math.log(escaped_b)
    got = total_log_lik(
        toy_outbreak, TransmissionParams(b=0.1, p1=0.2, p2=0.05)
    )
    toy_ok = abs(got - expected) < 1e-10

    cfg = StudyConfig(
        s_days=5,
        latent=PeriodDistribution.degenerate(1),
        infectious=PeriodDistribution.uniform(3, 5),
        t_days=6,
    )
    fit = mle_null(Outbreak(Population.uniform(10, 1), (3,) + (None,) * 9, cfg))
    bhat_ok = abs(fit.params.b - 1 / 47) < 1e-6

    rng = np.random.default_rng(707)
    n_checked = 0
    lam_ok = True
    for _ in range(1000):
        ob = random_small_outbreak(rng, allow_late_onsets=False)
        try:
            _, _, lam = LikelihoodEvaluator(ob).fit_both()
        except FitError:
            continue
        n_checked += 1
        lam_ok = lam_ok and lam >= 0.0
    ok = toy_ok and bhat_ok and lam_ok and n_checked >= 900
    report(
        7,
        ok,
        f"toy loglik |err|={abs(got - expected):.1e} (<1e-10), "
        f"b_hat err={abs(fit.params.b - 1 / 47):.1e} (<1e-6), "
        f"lambda >= 0 on {n_checked}/1000 converged instances "
        f"({time.time() - t0:.0f} s)",
    )


def test_criterion_08_asymptotic_tail():
    p = asymptotic_p_value(3.841)
    ok = abs(p - 0.025) <= 1e-3 and asymptotic_p_value(0.0) == 1.0
    report(8, ok, f"p(3.841)={p:.5f} (0.025 +- 1e-3), p(0)=1")


def test_criterion_09_simulator_calibration(paper_study):
    t0 = time.time()
    pop = Population.uniform(100, 5)
    rng = np.random.default_rng(909)
    bound = paper_study.s_days + paper_study.latent.max_days
    totals = []
    max_onset = 0
    for _ in range(2000):
        out = simulate_epidemic(
            pop, paper_study, TransmissionParams(b=0.001), rng
        )
        totals.append(out.n_total)
        max_onset = max(
            max_onset, max(o for o in out.outbreak.onsets if o is not None)
        )
    mean = float(np.mean(totals))
    se = float(np.std(totals, ddof=1)) / math.sqrt(len(totals))
    ok = abs(mean - 14.8) <= 3 * se and max_onset <= bound
    report(
        9,
        ok,
        f"mean cases = {mean:.3f} vs 14.8 (3 se = {3 * se:.3f}), "
        f"max onset = {max_onset} <= {bound} ({time.time() - t0:.0f} s)",
    )


def test_criterion_10_cli_determinism(tmp_path):
    t0 = time.time()
    out_dir = tmp_path / "runs"
    assert (
        cli.main(
            [
                "simulate", "--households", "20", "--household-size", "5",
                "--s-days", "20", "-b", "0.01", "--p1", "0.03",
                "--p2", "0.0001", "--latent", "1:3", "--infectious", "3:5",
                "--seed", "3", "--runs", "1", "--out-dir", str(out_dir),
            ]
        )
        == 0
    )
    line_list = next(out_dir.glob("run_*.csv"))

    test_outputs = []
    power_outputs = []
    for workers in ("1", "2", "8"):
        t_out = tmp_path / f"test_w{workers}.json"
        assert (
            cli.main(
                [
                    "test", "--input", str(line_list), "--method", "refined",
                    "--permutations", "48", "--s-days", "20",
                    "--latent", "1:3", "--infectious", "3:5", "--seed", "11",
                    "--workers", workers, "--output", str(t_out),
                ]
            )
            == 0
        )
        test_outputs.append(t_out.read_bytes())
        p_out = tmp_path / f"power_w{workers}.csv"
        assert (
            cli.main(
                [
                    "power", "--households", "6", "--household-size", "3",
                    "--s-days", "12", "--latent", "1:3", "--infectious",
                    "3:5", "--b-list", "0.02", "--p1-list", "0.05",
                    "--p2-list", "0", "--n-sims", "6", "--n-perms", "16",
                    "--seed", "5", "--method", "refined",
                    "--workers", workers, "--output", str(p_out),
                ]
            )
            == 0
        )
        power_outputs.append(p_out.read_bytes())
    ok = (
        test_outputs[0] == test_outputs[1] == test_outputs[2]
        and power_outputs[0] == power_outputs[1] == power_outputs[2]
    )
    report(
        10,
        ok,
        f"test and power outputs byte-identical across workers 1/2/8 "
        f"({time.time() - t0:.0f} s)",
    )
