from __future__ import annotations

from functools import partial

import numpy as np

from ..config import RunConfig
from ..hurst import ResponseFunction, example_response
from ..models import McReport, make_report, timed
from ..montecarlo import default_threads
from ..rfbm import solve_rfbm
from ..rfbm.memory import convergence_rate_check, cumulative_memory, time_averaged_exponent_mc
from ..tvfbm import TimeGrid

_RATE_LADDER = np.logspace(2.0, 6.0, 9)
_RATE_BETAS = (0.5, 1.0, 2.0)
_SEEDS = 10


def _reference() -> ResponseFunction:
    return example_response(0.45, 0.55, 0.5, 1.0)


def _pathwise(config: RunConfig, seed: int) -> list[McReport]:
    f = _reference()
    grid = TimeGrid(horizon=1.0, n=config.grid.n)
    outside = 0
    decreasing = 0
    checked = 0
    for k in range(_SEEDS):
        sol = solve_rfbm(grid, f, seed + k)
        values = []
        for t in grid.points[1:: max(1, grid.n // 16)]:
            memory = cumulative_memory(sol, float(t))
            outside += 0 if memory.holds else 1
            values.append(memory.c_t)
            checked += 1
        decreasing += int(np.count_nonzero(np.diff(values) < 0.0))
    return [
        make_report(
            "memory.pathwise_bounds",
            target=0.0,
            estimate=float(outside),
            se=0.0,
            rule="h_min t <= C_t <= h_max t at every checked time",
            passed=outside == 0,
            seed=seed,
            n=checked,
        ),
        make_report(
            "memory.monotone",
            target=0.0,
            estimate=float(decreasing),
            se=0.0,
            rule="C_t nondecreasing in t",
            passed=decreasing == 0,
            seed=seed,
            n=checked,
        ),
    ]


def _time_average(config: RunConfig, seed: int, threads: int) -> McReport:
    f = _reference()
    n_paths = min(config.mc.n_paths, 500)
    result = time_averaged_exponent_mc(f, TimeGrid(horizon=1.0, n=_grid_small(config)), 1.0, n_paths, seed, threads=threads)
    return make_report(
        "memory.time_average_range",
        target=0.5 * (f.h_min + f.h_max),
        estimate=result.mean,
        se=result.se,
        rule="h_min <= mean alpha(t) <= h_max",
        passed=f.h_min <= result.mean <= f.h_max,
        seed=seed,
        n=n_paths,
    )


def _grid_small(config: RunConfig) -> int:
    return min(config.grid.n, 128)


def _rates(seed: int) -> list[McReport]:
    reports = []
    for beta in _RATE_BETAS:
        result = convergence_rate_check(0.5, 0.1, beta, 1.0, _RATE_LADDER)
        reports.append(
            make_report(
                f"memory.rate_beta{beta:g}",
                target=result.expected_exponent,
                estimate=result.fitted_exponent,
                se=0.0,
                rule="fitted decay exponent within 0.05 of min(beta, 1)",
                passed=result.passed,
                seed=seed,
                n=len(result.times),
                detail=result.regime,
            )
        )
    return reports


def run_memory(config: RunConfig, seed: int) -> list[McReport]:
    threads = config.mc.threads or default_threads()
    reports: list[McReport] = []
    for check in (partial(_pathwise, config, seed), partial(_time_average, config, seed, threads), partial(_rates, seed)):
        reports.extend(timed(check))
    return reports
