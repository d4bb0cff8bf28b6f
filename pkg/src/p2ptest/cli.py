"""Command-line interface: ``simulate``, ``test`` and ``power`` subcommands.

All commands are deterministic functions of their input files, flags and
seed; worker counts never change the output bytes.  Exit codes: 0 success,
2 validation error, 3 test failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .asymptotic import asymptotic_test, truncate_at_s
from .likelihood import FitError, LikelihoodEvaluator
from .lineio import LineListError, parse_line_list, write_line_list
from .model import (
    PeriodDistribution,
    Population,
    StudyConfig,
    TransmissionParams,
    derived_measures,
)
from .resampling import permutation_test
from .simulate import power_grid_csv, power_study, simulate_epidemic

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TEST_FAILURE = 3

SCHEMA_VERSION = 1


def _parse_period(spec: str) -> PeriodDistribution:
    """Parse a MIN:MAX[:w1,w2,...] duration-distribution flag."""
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(
            f"distribution must look like MIN:MAX or MIN:MAX:w1,w2,..., got {spec!r}"
        )
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ValueError(f"bad distribution bounds in {spec!r}") from exc
    if len(parts) == 2:
        return PeriodDistribution.uniform(lo, hi)
    try:
        weights = [float(w) for w in parts[2].split(",")]
    except ValueError as exc:
        raise ValueError(f"bad distribution weights in {spec!r}") from exc
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(
            f"distribution weights must sum to 1, got {sum(weights)!r}"
        )
    return PeriodDistribution(lo, hi, tuple(weights))


def _period_json(dist: PeriodDistribution) -> dict:
    return {
        "min_days": dist.min_days,
        "max_days": dist.max_days,
        "pmf": list(dist.pmf),
    }


def _num(x):
    """JSON-safe number: NaN and infinities map to null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _scan_max_onset(text: str) -> int:
    """Largest parseable onset day in a line list (0 when none)."""
    best = 0
    for row in csv.reader(io.StringIO(text)):
        if len(row) == 3:
            cell = row[2].strip()
            try:
                best = max(best, int(cell))
            except ValueError:
                continue
    return best


def _add_common_study_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--latent",
        required=True,
        help="latent/incubation period distribution, MIN:MAX[:w1,w2,...]",
    )
    p.add_argument(
        "--infectious",
        required=True,
        help="infectious period distribution, MIN:MAX[:w1,w2,...]",
    )


def _cmd_test(args: argparse.Namespace) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    latent = _parse_period(args.latent)
    infectious = _parse_period(args.infectious)

    max_onset = _scan_max_onset(text)
    s_days = args.s_days if args.s_days is not None else max(1, max_onset)
    t_days = (
        args.t_days
        if args.t_days is not None
        else max(s_days, max_onset) + latent.max_days
    )
    config = StudyConfig(
        s_days=s_days,
        latent=latent,
        infectious=infectious,
        t_days=t_days,
        censor_uninfected=not args.censor_full_t,
    )
    population, outbreak = parse_line_list(text, config)
    outbreak.validate()

    two_param = args.two_param or args.method == "asymptotic"
    data = truncate_at_s(outbreak) if two_param else outbreak

    if args.method == "asymptotic":
        result = asymptotic_test(outbreak, truncate=True)
    else:
        result = permutation_test(
            data,
            method=args.method,
            n_replicates=args.permutations,
            seed=args.seed,
            close_only=two_param,
            add_one=args.addone_pvalue,
            workers=args.workers,
        )

    evaluator = LikelihoodEvaluator(data)
    null_fit = evaluator.fit_null()
    full_fit = evaluator.fit_full(close_only=two_param)
    derived = derived_measures(full_fit.params, config, population)

    report = {
        "schema_version": SCHEMA_VERSION,
        "test": {
            "method": args.method,
            "effective_method": result.method,
            "lambda": _num(result.lambda_obs),
            "p_value": result.p_value,
            "admissibility": result.admissibility.value,
            "alpha": args.alpha,
            "reject": result.p_value <= args.alpha,
            "permutations_requested": (
                args.permutations if args.method != "asymptotic" else 0
            ),
            "permutations_used": result.n_replicates,
            "replicate_failures": result.n_failed,
            "seed": args.seed if args.method != "asymptotic" else None,
        },
        "mle": {
            "b": full_fit.params.b,
            "p1": full_fit.params.p1,
            "p2": full_fit.params.p2,
            "log_lik_full": _num(full_fit.log_lik),
            "log_lik_null": (
                _num(null_fit.log_lik) if null_fit.converged else None
            ),
            "converged": full_fit.converged,
        },
        "derived": {
            "cpi": derived.cpi,
            "sar1": derived.sar1,
            "sar2": derived.sar2,
            "local_r": _num(derived.local_r),
        },
        "config": {
            "input": args.input,
            "s_days": s_days,
            "t_days": t_days,
            "latent": _period_json(latent),
            "infectious": _period_json(infectious),
            "censor_uninfected": not args.censor_full_t,
            "two_param": two_param,
            "add_one_pvalue": args.addone_pvalue,
            "n_persons": population.n_persons,
            "n_households": population.n_households,
        },
    }
    payload = json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    latent = _parse_period(args.latent)
    infectious = _parse_period(args.infectious)
    config = StudyConfig(
        s_days=args.s_days, latent=latent, infectious=infectious
    )
    params = TransmissionParams(b=args.b, p1=args.p1, p2=args.p2)
    population = Population.uniform(args.households, args.household_size)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    width = max(3, len(str(args.runs)))
    for run in range(1, args.runs + 1):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=args.seed, spawn_key=(run,))
        )
        outcome = simulate_epidemic(population, config, params, rng)
        stem = f"run_{run:0{width}d}"
        (out_dir / f"{stem}.csv").write_text(
            write_line_list(population, outcome.outbreak), encoding="utf-8"
        )
        truth = {
            "schema_version": SCHEMA_VERSION,
            "run": run,
            "seed": args.seed,
            "n_index": outcome.n_index,
            "n_total": outcome.n_total,
            "exhaustion_day": outcome.exhaustion_day,
            "t_days": outcome.outbreak.config.t_days,
            "s_days": args.s_days,
            "params": {"b": args.b, "p1": args.p1, "p2": args.p2},
            "latent": _period_json(latent),
            "infectious": _period_json(infectious),
        }
        (out_dir / f"{stem}.truth.json").write_text(
            json.dumps(truth, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote {out_dir / stem}.csv", file=sys.stderr)
    return EXIT_OK


def _read_power_config(path: str) -> dict[str, str]:
    """key = value lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _float_list(raw: str) -> list[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


def _cmd_power(args: argparse.Namespace) -> int:
    file_cfg = _read_power_config(args.config) if args.config else {}

    def pick(flag_value, key: str, default=None):
        if flag_value is not None:
            return flag_value
        if key in file_cfg:
            return file_cfg[key]
        return default

    b_list = _float_list(str(pick(args.b_list, "b", "")))
    p1_list = _float_list(str(pick(args.p1_list, "p1", "0")))
    p2_list = _float_list(str(pick(args.p2_list, "p2", "0")))
    if not b_list:
        raise ValueError("empty grid: provide at least one value of b")
    households = int(pick(args.households, "households", 100))
    household_size = int(pick(args.household_size, "household_size", 5))
    s_days = int(pick(args.s_days, "s_days", 30))
    latent = _parse_period(str(pick(args.latent, "latent", "1:3")))
    infectious = _parse_period(str(pick(args.infectious, "infectious", "3:5")))
    n_sims = int(pick(args.n_sims, "n_sims", 2000))
    n_perms = int(pick(args.n_perms, "n_perms", 2000))
    alpha = float(pick(args.alpha, "alpha", 0.05))
    method = str(pick(args.method, "method", "refined"))
    seed = int(pick(args.seed, "seed", 0))
    workers = int(pick(args.workers, "workers", 1))
    two_param = args.two_param or str(
        pick(None, "two_param", "false")
    ).lower() in ("1", "true", "yes")

    population = Population.uniform(households, household_size)
    config = StudyConfig(s_days=s_days, latent=latent, infectious=infectious)
    grid = [
        TransmissionParams(b=b, p1=p1, p2=p2)
        for b in b_list
        for p1 in p1_list
        for p2 in p2_list
    ]

    def progress(done: int, total: int) -> None:
        print(f"power: cell {done}/{total} finished", file=sys.stderr)

    cells = power_study(
        population,
        config,
        grid,
        n_sims=n_sims,
        n_perms=n_perms,
        alpha=alpha,
        method=method,
        master_seed=seed,
        workers=workers,
        two_param=two_param,
        progress=progress,
    )
    payload = power_grid_csv(cells, config, population, method)
    if args.output:
        Path(args.output).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p2ptest",
        description=(
            "Detect person-to-person transmission of an emerging infectious "
            "disease from a household symptom-onset line list."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run a transmission test on a line list")
    p_test.add_argument("--input", required=True, help="line-list CSV file")
    p_test.add_argument(
        "--method",
        required=True,
        choices=("simple", "refined", "asymptotic"),
    )
    p_test.add_argument("--permutations", type=int, default=2000, metavar="M")
    p_test.add_argument(
        "--s-days",
        type=int,
        default=None,
        help="common-source exposure days (default: the maximum onset day)",
    )
    p_test.add_argument(
        "--t-days",
        type=int,
        default=None,
        help="observation horizon (default: max(S, max onset) + latent max)",
    )
    _add_common_study_flags(p_test)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument(
        "--censor-full-T",
        dest="censor_full_t",
        action="store_true",
        help="score symptom-free persons through day T instead of T - latent max",
    )
    p_test.add_argument(
        "--addone-pvalue",
        action="store_true",
        help="use the (1 + count) / (1 + M) p-value convention",
    )
    p_test.add_argument(
        "--two-param",
        action="store_true",
        help="truncate data at day S and fix p2 = 0 (within-household model)",
    )
    p_test.add_argument("--workers", type=int, default=1)
    p_test.add_argument("--output", default=None, help="write the JSON report here")
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="generate synthetic epidemics")
    p_sim.add_argument("--households", type=int, required=True)
    p_sim.add_argument("--household-size", type=int, required=True)
    p_sim.add_argument("--s-days", type=int, required=True)
    p_sim.add_argument("-b", type=float, required=True)
    p_sim.add_argument("--p1", type=float, default=0.0)
    p_sim.add_argument("--p2", type=float, default=0.0)
    _add_common_study_flags(p_sim)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--runs", type=int, default=1)
    p_sim.add_argument("--out-dir", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_pow = sub.add_parser("power", help="Monte Carlo power study over a grid")
    p_pow.add_argument("--config", default=None, help="key = value settings file")
    p_pow.add_argument("--b-list", default=None, help="comma-separated b values")
    p_pow.add_argument("--p1-list", default=None, help="comma-separated p1 values")
    p_pow.add_argument("--p2-list", default=None, help="comma-separated p2 values")
    p_pow.add_argument("--households", type=int, default=None)
    p_pow.add_argument("--household-size", type=int, default=None)
    p_pow.add_argument("--s-days", type=int, default=None)
    p_pow.add_argument("--latent", default=None)
    p_pow.add_argument("--infectious", default=None)
    p_pow.add_argument("--n-sims", type=int, default=None)
    p_pow.add_argument("--n-perms", type=int, default=None)
    p_pow.add_argument("--alpha", type=float, default=None)
    p_pow.add_argument(
        "--method", choices=("simple", "refined", "asymptotic"), default=None
    )
    p_pow.add_argument("--seed", type=int, default=None)
    p_pow.add_argument("--workers", type=int, default=None)
    p_pow.add_argument("--two-param", action="store_true")
    p_pow.add_argument("--output", default=None, help="write the grid CSV here")
    p_pow.set_defaults(func=_cmd_power)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LineListError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FitError as exc:
        print(f"test failure: {exc}", file=sys.stderr)
        return EXIT_TEST_FAILURE


if __name__ == "__main__":
    sys.exit(main())
