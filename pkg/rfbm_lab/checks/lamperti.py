from __future__ import annotations

from functools import partial

import numpy as np

from ..config import RunConfig
from ..hurst import HurstFunction, constant_hurst, linear_hurst
from ..models import McReport, make_report, timed
from ..tvfbm.lamperti import alpha_decay_residual, lamperti_solve, lamperti_variance_product

_STEP = 0.005
_CONSTANT_LEVELS = (0.5, 0.7)


def _growing_hurst() -> HurstFunction:
    return linear_hurst(0.5, 0.05, horizon=9.0)


def _constant_exact(config: RunConfig, seed: int) -> McReport:
    phi0 = config.probe.phi0
    worst = 0.0
    for level in _CONSTANT_LEVELS:
        trajectory = lamperti_solve(constant_hurst(level), phi0, 1.0, _STEP)
        exact = phi0 * np.exp(trajectory.times / level)
        worst = max(worst, float(np.max(np.abs(trajectory.phi / exact - 1.0))))
    return make_report(
        "lamperti.constant_exact",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="relative deviation from phi0 e^(t/H0) <= 1e-8",
        passed=worst <= 1e-8,
        seed=seed,
        n=len(_CONSTANT_LEVELS),
    )


def _decay(seed: int) -> McReport:
    trajectory = lamperti_solve(_growing_hurst(), 1.0, 1.0, _STEP)
    residual = float(np.max(np.abs(alpha_decay_residual(trajectory))))
    allowed = _STEP**2 * float(np.max(trajectory.alpha))
    return make_report(
        "lamperti.decay",
        target=0.0,
        estimate=residual,
        se=0.0,
        rule="max |alpha' + alpha| <= step^2 max alpha",
        passed=residual <= allowed,
        seed=seed,
        n=trajectory.times.size,
    )


def _variance_product(seed: int) -> McReport:
    worst = 0.0
    for h in (constant_hurst(0.7), _growing_hurst()):
        trajectory = lamperti_solve(h, 1.0, 1.0, _STEP)
        worst = max(worst, float(np.max(np.abs(lamperti_variance_product(trajectory, h) - 1.0))))
    return make_report(
        "lamperti.variance_product",
        target=1.0,
        estimate=1.0 + worst,
        se=0.0,
        rule="absolute deviation <= 1e-12",
        passed=worst <= 1e-12,
        seed=seed,
        n=2,
    )


def run_lamperti(config: RunConfig, seed: int) -> list[McReport]:
    reports: list[McReport] = []
    for check in (partial(_constant_exact, config, seed), partial(_decay, seed), partial(_variance_product, seed)):
        reports.extend(timed(check))
    return reports
