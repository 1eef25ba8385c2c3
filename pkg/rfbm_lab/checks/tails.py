from __future__ import annotations

from functools import partial

import numpy as np
from scipy import special
from scipy.integrate import quad

from ..config import RunConfig
from ..models import McReport, make_report, timed
from ..rng import path_generator
from ..specfun import gamma_fn, hyp2f1, log_control_constant, mills_bounds

_MILLS_GRID = np.linspace(1.05, 12.0, 500)
_LOG_CONTROL_PAIRS = ((0.5, 1.0), (0.25, 0.5))


def _mills_strict(seed: int) -> McReport:
    bad = [b.z for b in map(mills_bounds, _MILLS_GRID) if not b.lower < b.exact < b.upper]
    return make_report(
        "tails.mills_bounds",
        target=0.0,
        estimate=float(len(bad)),
        se=0.0,
        rule="zero strict violations",
        passed=not bad,
        seed=seed,
        n=_MILLS_GRID.size,
        detail=f"first violation at z={bad[0]:.6g}" if bad else None,
    )


def _log_control(seed: int) -> McReport:
    rng = path_generator(seed, 0)
    small = rng.uniform(0.0, 1.0, size=1000)
    small = np.where(small == 0.0, 1e-300, small)
    large = rng.uniform(1.0, 100.0, size=1000)
    worst = 0.0
    for delta, alpha in _LOG_CONTROL_PAIRS:
        k = log_control_constant(delta, alpha)
        worst = max(
            worst,
            float(np.max(np.abs(np.log(small)) / (k * small ** (-delta)))),
            float(np.max(np.abs(np.log(large)) / (k * large**alpha))),
        )
    return make_report(
        "tails.log_control",
        target=1.0,
        estimate=worst,
        se=0.0,
        rule="max |ln x| / (K x^-delta or K x^alpha) <= 1",
        passed=worst <= 1.0,
        seed=seed,
        n=2000 * len(_LOG_CONTROL_PAIRS),
    )


def _euler_integral(a: float, b: float, c: float, z: float) -> float:
    """2F1 through Gamma(c)/(Gamma(b)Gamma(c-b)) int_0^1 t^(b-1) (1-t)^(c-b-1) (1-zt)^-a dt."""
    value, _ = quad(lambda t: (1.0 - z * t) ** (-a), 0.0, 1.0, weight="alg", wvar=(b - 1.0, c - b - 1.0), epsabs=0.0, epsrel=1e-13)
    return special.gamma(c) / (special.gamma(b) * special.gamma(c - b)) * value


def _hyp2f1_oracle(seed: int) -> McReport:
    rng = path_generator(seed, 1)
    worst = 0.0
    for _ in range(200):
        b = rng.uniform(0.2, 2.0)
        c = b + rng.uniform(0.2, 2.0)
        a = rng.uniform(-2.0, 2.0)
        z = rng.uniform(-1.0, 0.0)
        series = hyp2f1(a, b, c, z)
        oracle = _euler_integral(a, b, c, z)
        worst = max(worst, abs(series - oracle) / max(1.0, abs(oracle)))
    return make_report(
        "tails.hyp2f1_euler",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="max relative deviation <= 1e-9",
        passed=worst <= 1e-9,
        seed=seed,
        n=200,
    )


def _gamma_recurrence(seed: int) -> McReport:
    worst = max(abs(gamma_fn(x + 1.0) - x * gamma_fn(x)) / gamma_fn(x + 1.0) for x in (0.3, 0.75, 1.5, 3.2))
    return make_report(
        "tails.gamma_recurrence",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="relative deviation <= 1e-11",
        passed=worst <= 1e-11,
        seed=seed,
        n=4,
    )


def run_tails(config: RunConfig, seed: int) -> list[McReport]:
    del config
    reports: list[McReport] = []
    for check in (_mills_strict, _log_control, _hyp2f1_oracle, _gamma_recurrence):
        reports.extend(timed(partial(check, seed)))
    return reports
