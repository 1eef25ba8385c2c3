from __future__ import annotations

from functools import partial

import numpy as np

from ..config import RunConfig
from ..hurst import HurstFunction, constant_hurst
from ..models import McReport, make_report, timed
from ..tvfbm.laws import ldp_ladder

_HURST_LEVELS = (0.55, 0.6, 0.75)
_LEVELS = (0.5, 1.0, 2.0)
_DECADES = 5
_LIMIT_TOLERANCE = 0.15


def _ladder_errors(t0: float, x: float, h: HurstFunction) -> np.ndarray:
    return np.array([abs(ratio + 0.5 * x * x) for _, ratio in ldp_ladder(t0, x, h, decades=_DECADES)])


def _limit(seed: int) -> McReport:
    worst = 0.0
    for level in _HURST_LEVELS:
        for x in _LEVELS:
            errors = _ladder_errors(0.5, x, constant_hurst(level))
            worst = max(worst, float(errors[-1] / (0.5 * x * x)))
    return make_report(
        "ldp.limit",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="15% of x^2/2 at eps = 1e-5",
        passed=worst <= _LIMIT_TOLERANCE,
        seed=seed,
        n=len(_HURST_LEVELS) * len(_LEVELS),
    )


def _monotone(seed: int) -> McReport:
    broken = 0
    for level in _HURST_LEVELS:
        for x in _LEVELS:
            errors = _ladder_errors(0.5, x, constant_hurst(level))
            broken += int(np.count_nonzero(np.diff(errors) >= 0.0))
    return make_report(
        "ldp.monotone",
        target=0.0,
        estimate=float(broken),
        se=0.0,
        rule="trend-monotone: error strictly decreasing along the ladder",
        passed=broken == 0,
        seed=seed,
        n=len(_HURST_LEVELS) * len(_LEVELS) * (_DECADES - 1),
    )


def _configured(config: RunConfig, seed: int) -> McReport:
    h = config.function.hurst(1.0)
    t0 = min(config.probe.t0, 1.0 - 0.1)
    x = config.probe.x
    errors = _ladder_errors(t0, x, h)
    relative = float(errors[-1] / (0.5 * x * x))
    return make_report(
        "ldp.configured_limit",
        target=-0.5 * x * x,
        estimate=-0.5 * x * x + float(errors[-1]),
        se=0.0,
        rule="15% of x^2/2 at eps = 1e-5",
        passed=relative <= _LIMIT_TOLERANCE,
        seed=seed,
        n=_DECADES,
    )


def run_ldp(config: RunConfig, seed: int) -> list[McReport]:
    reports: list[McReport] = []
    for check in (partial(_limit, seed), partial(_monotone, seed), partial(_configured, config, seed)):
        reports.extend(timed(check))
    return reports
