from __future__ import annotations

from functools import partial

import numpy as np

from ..config import RunConfig
from ..hurst import ResponseFunction, constant_response, example_response, frozen_path_holder_check, validate_response
from ..models import McReport, make_report, timed
from ..montecarlo import default_threads
from ..rfbm import RfbmSolution, solve_rfbm
from ..rfbm.diagnostics import (
    alpha_holder_check,
    analytic_kernel_constant,
    contraction_certificate,
    identified_exponent,
    kernel_lipschitz_check,
    kernel_norm_scaling,
    picard_contraction_mc,
    self_convergence,
    solution_norm_bound,
)
from ..tvfbm import TimeGrid

_SEEDS = 20
_SMALL_N = 128
_SCALING_WINDOWS = ((0.2, 1e-1), (0.2, 1e-2), (0.5, 1e-3), (0.5, 1e-2))


def _reference() -> ResponseFunction:
    return example_response(0.45, 0.55, 0.5, 1.0)


def _solutions(config: RunConfig, seed: int) -> tuple[ResponseFunction, list[RfbmSolution]]:
    f = _reference()
    certificate = contraction_certificate(f, 1.0)
    grid = TimeGrid(horizon=certificate.t0, n=config.grid.n)
    return f, [solve_rfbm(grid, f, seed + k, raise_on_failure=False) for k in range(_SEEDS)]


def _response_audit(config: RunConfig, seed: int) -> McReport:
    reference = validate_response(_reference(), 100_000, seed)
    configured = validate_response(config.function.response(1.0), 100_000, seed)
    violations = reference.violations + configured.violations
    return make_report(
        "rfbm.response_audit",
        target=_reference().l_h,
        estimate=reference.spatial_quotient,
        se=0.0,
        rule="declared constants bound the sampled quotients (+1e-9)",
        passed=not violations,
        seed=seed,
        n=200_000,
        detail="; ".join(violations) or None,
    )


def _frozen_path(seed: int) -> McReport:
    f = _reference()
    times = np.linspace(0.0, 1.0, 401)
    gamma_star, scale = 0.6, 3.0
    path = scale * np.abs(times - 0.5) ** gamma_star
    result = frozen_path_holder_check(f, times, path, gamma_star, scale)
    return make_report(
        "rfbm.frozen_path_holder",
        target=result.bound,
        estimate=result.quotient,
        se=0.0,
        rule="quotient <= max(L_H c + C_H, 1)",
        passed=result.holds,
        seed=seed,
        n=times.size,
    )


def _convergence(solutions: list[RfbmSolution], seed: int) -> McReport:
    converged = sum(1 for sol in solutions if sol.converged)
    return make_report(
        "rfbm.picard_converges",
        target=float(len(solutions)),
        estimate=float(converged),
        se=0.0,
        rule="all seeds converge within 64 sweeps at tol 1e-9",
        passed=converged == len(solutions),
        seed=seed,
        n=len(solutions),
    )


def _residual_decay(f: ResponseFunction, solutions: list[RfbmSolution], seed: int) -> McReport:
    kappa = contraction_certificate(f, 1.0).kappa
    worst = 0.0
    for sol in solutions:
        history = np.asarray(sol.residual_history)
        if history.size < 3:
            continue
        previous, following = history[1:-1], history[2:]
        usable = previous > 1e-12
        if usable.any():
            worst = max(worst, float(np.max(following[usable] / previous[usable])))
    return make_report(
        "rfbm.residual_decay",
        target=kappa,
        estimate=worst,
        se=0.0,
        rule="sweep residual ratios <= kappa + 0.1",
        passed=worst <= kappa + 0.1,
        seed=seed,
        n=len(solutions),
    )


def _s2_contraction(config: RunConfig, seed: int) -> McReport:
    n_paths = min(config.mc.n_paths, 1000)
    report = picard_contraction_mc(TimeGrid(horizon=1.0, n=_SMALL_N), _reference(), n_paths, seed)
    worst = int(np.argmax(np.asarray(report.ratios) - report.kappa))
    return make_report(
        "rfbm.s2_contraction",
        target=report.kappa,
        estimate=report.ratios[worst],
        se=report.ratio_se[worst],
        rule="S^2 distance ratios <= kappa + 3*SE",
        passed=report.holds,
        seed=seed,
        n=n_paths,
    )


def _constant_sweeps(config: RunConfig, seed: int) -> McReport:
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=config.grid.n), constant_response(0.7), seed)
    return make_report(
        "rfbm.constant_two_sweeps",
        target=2.0,
        estimate=float(sol.iterations),
        se=0.0,
        rule="exactly 2 sweeps",
        passed=sol.iterations == 2,
        seed=seed,
        n=1,
    )


def _alpha_range(f: ResponseFunction, solutions: list[RfbmSolution], seed: int) -> McReport:
    low = min(float(sol.alpha.min()) for sol in solutions)
    high = max(float(sol.alpha.max()) for sol in solutions)
    return make_report(
        "rfbm.alpha_range",
        target=f.h_max,
        estimate=high,
        se=0.0,
        rule="h_min <= alpha <= h_max on every path",
        passed=f.h_min <= low and high <= f.h_max,
        seed=seed,
        n=len(solutions),
        detail=f"min={low:.6g}",
    )


def _norm_sandwich(f: ResponseFunction, solutions: list[RfbmSolution], seed: int) -> McReport:
    failures = 0
    checked = 0
    for sol in solutions[:5]:
        for t, eps in _SCALING_WINDOWS:
            checked += 1
            failures += 0 if kernel_norm_scaling(sol, f, t, eps).holds else 1
    return make_report(
        "rfbm.kernel_norm_sandwich",
        target=0.0,
        estimate=float(failures),
        se=0.0,
        rule="c1 eps^(2H+) <= norm <= c2 eps^(2H-) at every window",
        passed=failures == 0,
        seed=seed,
        n=checked,
    )


def _identified(config: RunConfig, f: ResponseFunction, solutions: list[RfbmSolution], seed: int) -> McReport:
    eps = 1e-4
    constant = solve_rfbm(TimeGrid(horizon=1.0, n=config.grid.n), constant_response(0.7), seed)
    constant_error = abs(identified_exponent(kernel_norm_scaling(constant, constant_response(0.7), 0.5, eps), eps) - 0.7)
    k = solutions[0].grid.n // 2
    response_error = max(
        abs(identified_exponent(kernel_norm_scaling(sol, f, float(sol.grid.points[k]), eps), eps) - float(sol.alpha[k]))
        for sol in solutions
    )
    return make_report(
        "rfbm.identified_exponent",
        target=0.0,
        estimate=max(constant_error, response_error),
        se=0.0,
        rule="within 0.02 (constant) and 0.1 (responsive) at eps = 1e-4",
        passed=constant_error <= 0.02 and response_error <= 0.1,
        seed=seed,
        n=len(solutions) + 1,
    )


def _alpha_holder(f: ResponseFunction, solutions: list[RfbmSolution], seed: int) -> McReport:
    results = [alpha_holder_check(sol, f) for sol in solutions[:5]]
    worst = max(results, key=lambda r: r.quotient / r.bound if r.bound > 0 else float("inf"))
    return make_report(
        "rfbm.alpha_holder",
        target=worst.bound,
        estimate=worst.quotient,
        se=0.0,
        rule="quotient <= L_H * path quotient + C_H",
        passed=all(r.holds for r in results),
        seed=seed,
        n=len(results),
        detail=f"gamma_hat={worst.gamma_hat:.4f}",
    )


def _self_convergence(seed: int) -> McReport:
    f = _reference()
    coarse = float(np.mean([self_convergence(f, 32, 1.0, seed + k).distance for k in range(5)]))
    fine = float(np.mean([self_convergence(f, 128, 1.0, seed + k).distance for k in range(5)]))
    return make_report(
        "rfbm.self_convergence",
        target=coarse,
        estimate=fine,
        se=0.0,
        rule="mean sup distance at n=128 <= at n=32",
        passed=fine <= coarse,
        seed=seed,
        n=5,
    )


def _norm_bound(config: RunConfig, seed: int, threads: int) -> McReport:
    n_paths = max(100, min(config.mc.n_paths, 500))
    f = _reference()
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=_SMALL_N), f, seed)
    report = solution_norm_bound(sol, f, n_paths, threads=threads)
    return make_report(
        "rfbm.norm_bound",
        target=report.bound,
        estimate=report.estimate,
        se=report.se,
        rule="sup_t E[X_t^2] <= T^(2 h_max) + h_max/h_min + 3*SE",
        passed=report.holds,
        seed=seed,
        n=n_paths,
    )


def _kernel_lipschitz(seed: int) -> McReport:
    f = _reference()
    report = kernel_lipschitz_check(TimeGrid(horizon=1.0, n=256), f, 20, seed)
    bound = analytic_kernel_constant(f.h_min, f.h_max)
    return make_report(
        "rfbm.kernel_lipschitz",
        target=bound,
        estimate=report.fitted_c_k,
        se=0.0,
        rule="fitted kernel constant <= analytic C1",
        passed=report.fitted_c_k <= bound,
        seed=seed,
        n=len(report.ratios),
    )


def run_rfbm(config: RunConfig, seed: int) -> list[McReport]:
    threads = config.mc.threads or default_threads()
    f, solutions = _solutions(config, seed)
    reports: list[McReport] = []
    for check in (
        partial(_response_audit, config, seed),
        partial(_frozen_path, seed),
        partial(_convergence, solutions, seed),
        partial(_residual_decay, f, solutions, seed),
        partial(_s2_contraction, config, seed),
        partial(_constant_sweeps, config, seed),
        partial(_alpha_range, f, solutions, seed),
        partial(_norm_sandwich, f, solutions, seed),
        partial(_identified, config, f, solutions, seed),
        partial(_alpha_holder, f, solutions, seed),
        partial(_self_convergence, seed),
        partial(_norm_bound, config, seed, threads),
        partial(_kernel_lipschitz, seed),
    ):
        reports.extend(timed(check))
    return reports
