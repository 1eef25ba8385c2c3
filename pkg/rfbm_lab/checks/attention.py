from __future__ import annotations

import math
from functools import partial

import numpy as np

from ..attention import (
    AttentionProfile,
    attention_profile,
    bound_constants,
    check_attention_bounds,
    expected_residence_check,
    residence_partition,
    sensitivity_at,
    volatility_from_paths,
    volatility_mc,
)
from ..config import RunConfig
from ..hurst import ResponseFunction, constant_response, example_response
from ..models import McReport, make_report, timed
from ..montecarlo import default_threads
from ..rfbm import solve_rfbm
from ..rfbm.diagnostics import solve_paths
from ..rng import path_generator
from ..tvfbm import TimeGrid

_PROFILE_TIMES = (0.3, 0.8, 1.0, 1.5, 3.0)
_PROFILE_SEEDS = 20
_PROFILE_GRID = TimeGrid(horizon=3.0, n=300)
_MC_GRID = TimeGrid(horizon=1.0, n=128)
_INTERVALS = 50


def _reference(horizon: float = 1.0) -> ResponseFunction:
    return example_response(0.45, 0.55, 0.5, 1.0, horizon)


def _profiles(seed: int) -> tuple[list[AttentionProfile], int]:
    """Profiles from converged solutions only, with the count of skipped seeds."""
    f = _reference(_PROFILE_GRID.horizon)
    profiles = []
    skipped = 0
    for k in range(_PROFILE_SEEDS):
        sol = solve_rfbm(_PROFILE_GRID, f, seed + k, raise_on_failure=False)
        if not sol.converged:
            skipped += 1
            continue
        profiles.extend(attention_profile(sol, f, t) for t in _PROFILE_TIMES)
    return profiles, skipped


def _profile_checks(seed: int) -> list[McReport]:
    profiles, skipped = _profiles(seed)
    f = _reference()
    consts = bound_constants(f.h_min, f.h_max)
    drift = max((abs(p.normalization - 1.0) for p in profiles), default=math.inf)
    smallest = min((float(p.rho.min()) for p in profiles), default=-math.inf)
    violations = sum(len(check_attention_bounds(p, consts).violations) for p in profiles)
    detail = f"{skipped} of {_PROFILE_SEEDS} solutions did not converge and were skipped" if skipped else None
    return [
        make_report(
            "attention.normalization",
            target=1.0,
            estimate=1.0 + drift,
            se=0.0,
            rule="|sum rho delta - 1| <= 1e-8",
            passed=drift <= 1e-8,
            seed=seed,
            n=len(profiles),
            detail=detail,
        ),
        make_report(
            "attention.positivity",
            target=0.0,
            estimate=smallest,
            se=0.0,
            rule="min rho > 0",
            passed=smallest > 0.0,
            seed=seed,
            n=len(profiles),
            detail=detail,
        ),
        make_report(
            "attention.bounds",
            target=0.0,
            estimate=float(violations),
            se=0.0,
            rule="zero Case I/II bound violations",
            passed=bool(profiles) and violations == 0,
            seed=seed,
            n=len(profiles),
            detail=detail,
        ),
    ]


def _log_kernel(f: ResponseFunction, t: float, s: float, x: float) -> float:
    h = float(f(s, x))
    return 0.5 * math.log(2.0 * h) + (h - 0.5) * math.log(t - s)


def _sensitivity(seed: int) -> McReport:
    f = _reference(3.0)
    rng = path_generator(seed, 20)
    step = 1e-5
    worst = 0.0
    for _ in range(1000):
        t = float(rng.uniform(0.1, 3.0))
        s = float(rng.uniform(0.0, t))
        x = float(rng.uniform(-3.0, 3.0))
        difference = (_log_kernel(f, t, s, x + step) - _log_kernel(f, t, s, x - step)) / (2.0 * step)
        worst = max(worst, abs(sensitivity_at(f, t, s, x) - difference))
    return make_report(
        "attention.sensitivity",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="absolute deviation from log-kernel differences <= 1e-5",
        passed=worst <= 1e-5,
        seed=seed,
        n=1000,
    )


def _volatility(config: RunConfig, seed: int, threads: int) -> list[McReport]:
    n_paths = max(500, min(config.mc.n_paths, 1000))
    paths = solve_paths(_MC_GRID, _reference(), 2 * n_paths, seed, threads=threads)
    first, second = paths[:n_paths], paths[n_paths:]
    k = _MC_GRID.n
    rng = path_generator(seed, 21)
    worst_excess = -math.inf
    worst_se = 0.0
    for _ in range(_INTERVALS):
        lo, hi = np.sort(rng.uniform(-2.0, 2.0, size=2))
        report = volatility_from_paths(first, second, (float(lo), float(hi)), k)
        if report.v - 0.25 - 3.0 * report.se > worst_excess:
            worst_excess = report.v - 0.25 - 3.0 * report.se
            worst_se = report.se
    whole = volatility_from_paths(first, second, (-math.inf, math.inf), k)
    return [
        make_report(
            "attention.volatility_bound",
            target=0.25,
            estimate=0.25 + 3.0 * worst_se + worst_excess,
            se=worst_se,
            rule="V_I <= 1/4 + 3*SE over random intervals",
            passed=worst_excess <= 0.0,
            seed=seed,
            n=n_paths,
        ),
        make_report(
            "attention.volatility_whole_line",
            target=0.0,
            estimate=whole.v,
            se=whole.se,
            rule="V over the whole line is exactly 0",
            passed=whole.v == 0.0 and whole.cov_integral == 0.0,
            seed=seed,
            n=n_paths,
        ),
    ]


def _volatility_agree(config: RunConfig, seed: int, threads: int) -> McReport:
    n_paths = max(500, min(config.mc.n_paths, 1000))
    report = volatility_mc(constant_response(0.7), _MC_GRID, (0.0, math.inf), 1.0, n_paths, seed, threads=threads)
    return make_report(
        "attention.volatility_agree",
        target=report.cov_integral,
        estimate=report.v,
        se=math.hypot(report.se, report.cov_se),
        rule="3*combined SE",
        passed=report.agree,
        seed=seed,
        n=2 * n_paths,
    )


def _conservation(seed: int) -> McReport:
    f = _reference()
    rng = path_generator(seed, 22)
    worst = 0.0
    for k in range(10):
        sol = solve_rfbm(_MC_GRID, f, seed + k)
        cuts = sorted(float(c) for c in rng.uniform(-1.5, 1.5, size=3))
        worst = max(worst, abs(math.fsum(residence_partition(sol, cuts, 1.0)) - 1.0))
    return make_report(
        "attention.conservation",
        target=1.0,
        estimate=1.0 + worst,
        se=0.0,
        rule="4-cell partition masses sum to 1 (<= 1e-12)",
        passed=worst <= 1e-12,
        seed=seed,
        n=10,
    )


def _residence(config: RunConfig, seed: int, threads: int) -> list[McReport]:
    n_paths = max(500, min(config.mc.n_paths, 1000))
    brownian = expected_residence_check(constant_response(0.5), _MC_GRID, (0.0, math.inf), 1.0, n_paths, seed, threads=threads)
    responsive = expected_residence_check(_reference(), _MC_GRID, (-0.5, 0.5), 1.0, n_paths, seed, threads=threads)
    return [
        make_report(
            "attention.brownian_half",
            target=0.5,
            estimate=brownian.lhs,
            se=brownian.lhs_se,
            rule="3*SE plus one panel for the state at 0",
            passed=abs(brownian.lhs - 0.5) <= 3.0 * brownian.lhs_se + _MC_GRID.delta,
            seed=seed,
            n=n_paths,
        ),
        make_report(
            "attention.expected_residence",
            target=responsive.rhs,
            estimate=responsive.lhs,
            se=math.hypot(responsive.lhs_se, responsive.rhs_se),
            rule="3*combined SE",
            passed=responsive.agree,
            seed=seed,
            n=2 * n_paths,
        ),
    ]


def run_attention(config: RunConfig, seed: int) -> list[McReport]:
    threads = config.mc.threads or default_threads()
    reports: list[McReport] = []
    for check in (
        partial(_profile_checks, seed),
        partial(_sensitivity, seed),
        partial(_volatility, config, seed, threads),
        partial(_volatility_agree, config, seed, threads),
        partial(_conservation, seed),
        partial(_residence, config, seed, threads),
    ):
        reports.extend(timed(check))
    return reports
