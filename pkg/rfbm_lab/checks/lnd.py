from __future__ import annotations

from functools import partial

from ..config import RunConfig
from ..hurst import HurstFunction
from ..models import McReport, make_report, timed
from ..tvfbm.laws import as_bound_check, local_increment_remainder, lnd_lower_bound, lnd_threshold

_LADDER_DECADES = 6
_AS_KAPPA = 2.0
_AS_N_MAX = 2000


def _anchor(config: RunConfig) -> float:
    return min(config.probe.t0, 0.9)


def _ladder(t0: float, h: HurstFunction) -> list[float]:
    threshold, _ = lnd_threshold(t0, h)
    return [threshold * 10.0 ** (-k) for k in range(_LADDER_DECADES)]


def _lower_bound(h: HurstFunction, t0: float, seed: int) -> McReport:
    results = [lnd_lower_bound(t0, eps, h) for eps in _ladder(t0, h)]
    worst = min(r.cond_var / r.bound for r in results)
    return make_report(
        "lnd.lower_bound",
        target=1.0,
        estimate=worst,
        se=0.0,
        rule="cond_var / (0.5 eps^2H(t0)) >= 1 on the validity ladder",
        passed=all(r.holds for r in results),
        seed=seed,
        n=len(results),
    )


def _ratio_limit(h: HurstFunction, t0: float, seed: int) -> McReport:
    final = lnd_lower_bound(t0, _ladder(t0, h)[-1], h)
    ratio = final.cond_var / (2.0 * final.bound)
    return make_report(
        "lnd.ratio_limit",
        target=1.0,
        estimate=ratio,
        se=0.0,
        rule="within 5% of 1 at the smallest eps",
        passed=abs(ratio - 1.0) <= 0.05,
        seed=seed,
        n=1,
    )


def _remainder_envelope(h: HurstFunction, t0: float, seed: int) -> McReport:
    ladder = _ladder(t0, h)
    excess = max(abs(est.remainder) - est.envelope for est in (local_increment_remainder(t0, eps, h) for eps in ladder))
    return make_report(
        "lnd.remainder_envelope",
        target=0.0,
        estimate=excess,
        se=0.0,
        rule="|r(eps)| <= exp(2 C_H eps^gamma |ln eps|) - 1",
        passed=excess <= 1e-15,
        seed=seed,
        n=len(ladder),
    )


def _as_envelope(h: HurstFunction, t0: float, seed: int) -> McReport:
    report = as_bound_check(t0, h, _AS_KAPPA, _AS_N_MAX, seed, n_seeds=4)
    return make_report(
        "lnd.as_envelope",
        target=0.0,
        estimate=float(len(report.violations)),
        se=0.0,
        rule="no envelope crossings over the finite sequence",
        passed=not report.violations,
        seed=seed,
        n=_AS_N_MAX - 1,
        detail=f"max_ratio={report.max_ratio:.6g} limsup_bound={report.limsup_bound:.6g}",
    )


def run_lnd(config: RunConfig, seed: int) -> list[McReport]:
    h = config.function.hurst(1.0)
    t0 = _anchor(config)
    reports: list[McReport] = []
    for check in (_lower_bound, _ratio_limit, _remainder_envelope, _as_envelope):
        reports.extend(timed(partial(check, h, t0, seed)))
    return reports
