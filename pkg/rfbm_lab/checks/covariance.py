from __future__ import annotations

from collections.abc import Callable
from functools import partial

import numpy as np
from scipy.integrate import quad

from ..config import RunConfig
from ..hurst import HurstFunction, constant_hurst, linear_hurst, sinusoidal_hurst
from ..models import McReport, make_report, timed
from ..rng import path_generator
from ..tvfbm.covariance import (
    cov_first_derivative,
    cov_hyper_I,
    covariance_bounds,
    covariance_quadrature,
    eval_J,
    exact_covariance_matrix,
    mixed_derivative_terms,
)
from ..tvfbm.laws import variance_theoretical


def _alg_quad(fn: Callable[[float], float], upper: float, beta: float) -> float:
    """int_0^upper fn(s) (upper - s)^beta ds."""
    value, _ = quad(fn, 0.0, upper, weight="alg", wvar=(0.0, beta), epsabs=0.0, epsrel=1e-13, limit=200)
    return value


def _diagonal(h: HurstFunction, seed: int) -> McReport:
    times = path_generator(seed, 10).uniform(0.05, 1.0, size=20)
    worst = 0.0
    for t in times:
        target = variance_theoretical(float(t), h)
        by_quadrature = covariance_quadrature(float(t), float(t), h, force_quadrature=True).value
        closed = covariance_quadrature(float(t), float(t), h).value
        worst = max(worst, abs(by_quadrature - target), abs(closed - target))
    return make_report(
        "covariance.diagonal",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="absolute deviation <= 1e-8",
        passed=worst <= 1e-8,
        seed=seed,
        n=times.size,
    )


def _brownian_min(seed: int) -> McReport:
    rng = path_generator(seed, 11)
    h = constant_hurst(0.5)
    worst = 0.0
    for u, v in rng.uniform(0.0, 1.0, size=(20, 2)):
        worst = max(worst, abs(covariance_quadrature(float(u), float(v), h).value - min(u, v)))
    return make_report(
        "covariance.brownian_min",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="absolute deviation <= 1e-10",
        passed=worst <= 1e-10,
        seed=seed,
        n=20,
    )


def _symmetry(h: HurstFunction, seed: int) -> McReport:
    rng = path_generator(seed, 12)
    worst = 0.0
    for u, v in rng.uniform(0.01, 1.0, size=(20, 2)):
        worst = max(worst, abs(covariance_quadrature(u, v, h).value - covariance_quadrature(v, u, h).value))
    return make_report(
        "covariance.symmetry",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="absolute deviation <= 1e-9",
        passed=worst <= 1e-9,
        seed=seed,
        n=20,
    )


def _psd(h: HurstFunction, seed: int) -> McReport:
    times = np.linspace(0.125, 1.0, 8)
    smallest = float(np.linalg.eigvalsh(exact_covariance_matrix(times, h)).min())
    return make_report(
        "covariance.psd",
        target=0.0,
        estimate=smallest,
        se=0.0,
        rule="smallest eigenvalue >= -1e-9",
        passed=smallest >= -1e-9,
        seed=seed,
        n=times.size,
    )


def _eval_j(seed: int) -> McReport:
    rng = path_generator(seed, 13)
    worst = 0.0
    for _ in range(100):
        a, b = rng.uniform(-0.9, 1.0, size=2)
        u = rng.uniform(0.05, 0.5)
        v = 2.0 * u + rng.uniform(0.0, 1.0)
        brute = _alg_quad(lambda s: (v - s) ** b, u, a)
        worst = max(worst, abs(eval_J(a, b, u, v) - brute) / max(1.0, abs(brute)))
    return make_report(
        "covariance.eval_J",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="relative deviation <= 1e-8",
        passed=worst <= 1e-8,
        seed=seed,
        n=100,
    )


def _persistent_pairs(rng: np.random.Generator, count: int) -> list[tuple[HurstFunction, float, float]]:
    """Linear Hurst functions above 1/2 with admissible pairs 0 < 2u <= v <= 1."""
    cases = []
    for _ in range(count):
        h0 = rng.uniform(0.6, 0.75)
        slope = rng.uniform(-0.08, 0.08)
        u = rng.uniform(0.05, 0.45)
        v = rng.uniform(2.0 * u, 1.0)
        cases.append((linear_hurst(h0, slope), float(u), float(v)))
    return cases


def _hyper_i(seed: int) -> McReport:
    worst = 0.0
    cases = _persistent_pairs(path_generator(seed, 14), 100)
    for h, u, v in cases:
        h_u, h_v = float(h(u)), float(h(v))
        brute = _alg_quad(lambda s: (v - s) ** (h_v - 1.5), u, h_u - 1.5)
        worst = max(worst, abs(cov_hyper_I(u, v, h) - brute) / max(1.0, abs(brute)))
    return make_report(
        "covariance.hyper_I",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="relative deviation <= 1e-7",
        passed=worst <= 1e-7,
        seed=seed,
        n=len(cases),
    )


def _mixed_majorant(seed: int) -> McReport:
    cases = _persistent_pairs(path_generator(seed, 15), 50)
    failures = sum(1 for h, u, v in cases if not mixed_derivative_terms(u, v, h).holds)
    return make_report(
        "covariance.mixed_majorant",
        target=0.0,
        estimate=float(failures),
        se=0.0,
        rule="|I_k| <= majorant on every configuration",
        passed=failures == 0,
        seed=seed,
        n=len(cases),
    )


def _first_derivative(seed: int) -> McReport:
    rng = path_generator(seed, 16)
    h = sinusoidal_hurst(0.5, 0.2, 1.0)
    step = 1e-3
    worst = 0.0
    for _ in range(10):
        u = float(rng.uniform(0.1, 0.5))
        v = float(rng.uniform(u + 0.1, 1.0 - 2.0 * step))
        forward = covariance_quadrature(u, v + step, h, tol=1e-11).value
        backward = covariance_quadrature(u, v - step, h, tol=1e-11).value
        difference = (forward - backward) / (2.0 * step)
        analytic = cov_first_derivative(u, v, h)
        worst = max(worst, abs(analytic - difference) / max(1.0, abs(difference)))
    return make_report(
        "covariance.first_derivative",
        target=0.0,
        estimate=worst,
        se=0.0,
        rule="relative deviation from central differences <= 1e-5",
        passed=worst <= 1e-5,
        seed=seed,
        n=10,
    )


def _sandwich(h: HurstFunction, seed: int) -> McReport:
    failures = 0
    checked = 0
    for t in (0.2, 0.4, 0.6):
        for eps in (1e-1, 1e-2, 1e-3):
            bounds = covariance_bounds(t, eps, h)
            value = covariance_quadrature(t, t + eps, h).value
            checked += 1
            if not bounds.lower * (1.0 - 1e-8) <= value <= bounds.upper * (1.0 + 1e-8):
                failures += 1
    return make_report(
        "covariance.sandwich",
        target=0.0,
        estimate=float(failures),
        se=0.0,
        rule="extremal-exponent bounds hold at every (t, eps)",
        passed=failures == 0,
        seed=seed,
        n=checked,
    )


def run_covariance(config: RunConfig, seed: int) -> list[McReport]:
    h = config.function.hurst(1.0)
    reports: list[McReport] = []
    for check in (
        partial(_diagonal, h, seed),
        partial(_brownian_min, seed),
        partial(_symmetry, h, seed),
        partial(_psd, h, seed),
        partial(_eval_j, seed),
        partial(_hyper_i, seed),
        partial(_mixed_majorant, seed),
        partial(_first_derivative, seed),
        partial(_sandwich, h, seed),
    ):
        reports.extend(timed(check))
    return reports
