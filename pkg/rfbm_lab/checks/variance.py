from __future__ import annotations

from functools import partial

import numpy as np

from ..config import RunConfig
from ..hurst import constant_hurst, sqrt_control_constant, sqrt_control_quotient
from ..models import McReport, make_report, timed
from ..montecarlo import default_threads, variance_se
from ..rng import brownian_increments
from ..tvfbm import TimeGrid, panel_weights, simulate_tvfbm, simulate_tvfbm_at
from ..tvfbm.laws import variance_theoretical

_LAW_TIMES = (0.25, 0.5, 1.0)
_ISOMETRY_N = 4096
_ISOMETRY_H = (0.3, 0.45, 0.6, 0.75, 0.9)
# the first panels carry an O(k^-2H) relative deficit, so the comparison starts here
_ISOMETRY_FROM = 0.05


def _isometry(seed: int) -> McReport:
    """sum w_i(t_k)^2 delta against t_k^(2H) at grid times t_k >= 0.05."""
    grid = TimeGrid(horizon=1.0, n=_ISOMETRY_N)
    pts = grid.points
    worst = 0.0
    for h in _ISOMETRY_H:
        # the sum is a cumulative sum over lags because w_i(t_k) depends on k - i only
        lags = panel_weights(grid, grid.n, h)[::-1]
        partial_sums = np.cumsum(lags**2) * grid.delta
        keep = pts[1:] >= _ISOMETRY_FROM
        exact = pts[1:][keep] ** (2.0 * h)
        worst = max(worst, float(np.max(np.abs(partial_sums[keep] / exact - 1.0))))
    return make_report(
        "variance.isometry",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="max relative deviation <= 0.5%",
        passed=worst <= 0.005,
        seed=seed,
        n=_ISOMETRY_N,
    )


def _law(config: RunConfig, seed: int, threads: int) -> list[McReport]:
    h = config.function.hurst(1.0)
    grid = TimeGrid(horizon=1.0, n=config.grid.n)
    samples = simulate_tvfbm_at(grid, h, _LAW_TIMES, config.mc.n_paths, seed, threads=threads)
    reports = []
    for column, t in enumerate(_LAW_TIMES):
        estimate, se = variance_se(samples[:, column])
        target = variance_theoretical(t, h)
        reports.append(
            make_report(
                f"variance.law.t{t:g}",
                target=target,
                estimate=estimate,
                se=se,
                rule="max(3*SE, 1%)",
                passed=abs(estimate - target) <= max(3.0 * se, 0.01 * target),
                seed=seed,
                n=config.mc.n_paths,
            )
        )
    return reports


def _brownian_reduction(config: RunConfig, seed: int) -> McReport:
    grid = TimeGrid(horizon=1.0, n=config.grid.n)
    path = simulate_tvfbm(grid, constant_hurst(0.5), seed)
    partial_sums = np.concatenate(([0.0], np.cumsum(brownian_increments(seed, 0, grid.n, grid.delta))))
    mismatches = int(np.count_nonzero(path.values != partial_sums))
    return make_report(
        "variance.brownian_reduction",
        target=0.0,
        estimate=float(mismatches),
        se=0.0,
        rule="bit-exact partial sums",
        passed=mismatches == 0,
        seed=seed,
        n=grid.n + 1,
    )


def _persistent_constant(config: RunConfig, seed: int, threads: int) -> McReport:
    grid = TimeGrid(horizon=1.0, n=config.grid.n)
    samples = simulate_tvfbm_at(grid, constant_hurst(0.75), [1.0], config.mc.n_paths, seed, threads=threads)
    estimate, se = variance_se(samples[:, 0])
    return make_report(
        "variance.constant_075",
        target=1.0,
        estimate=estimate,
        se=se,
        rule="3*SE",
        passed=abs(estimate - 1.0) <= 3.0 * se,
        seed=seed,
        n=config.mc.n_paths,
    )


def _sqrt_control(config: RunConfig, seed: int) -> McReport:
    h = config.function.hurst(1.0)
    quotient = sqrt_control_quotient(h, 10_000, seed)
    bound = sqrt_control_constant(h)
    return make_report(
        "variance.sqrt_control",
        target=bound,
        estimate=quotient,
        se=0.0,
        rule="sampled quotient <= C_H / sqrt(2 h_min)",
        passed=quotient <= bound + 1e-9,
        seed=seed,
        n=10_000,
    )


def run_variance(config: RunConfig, seed: int) -> list[McReport]:
    threads = config.mc.threads or default_threads()
    reports: list[McReport] = []
    reports.extend(timed(partial(_isometry, seed)))
    reports.extend(timed(partial(_law, config, seed, threads)))
    reports.extend(timed(partial(_brownian_reduction, config, seed)))
    reports.extend(timed(partial(_persistent_constant, config, seed, threads)))
    reports.extend(timed(partial(_sqrt_control, config, seed)))
    return reports
