"""Well-posedness and scaling diagnostics for responsive fBm solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import DomainError
from ..hurst import ResponseFunction, estimate_holder_exponent
from ..montecarlo import map_paths, mean_se
from ..rng import brownian_increments, path_generator
from ..tvfbm.grid import TimeGrid
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, Convention, RfbmSolution, picard_sweep, solve_rfbm

_WINDOW_SLACK = 1e-12


# Contraction certificate


def analytic_kernel_constant(h_min: float, h_max: float) -> float:
    """C1 = M2^2 with M2 = max(1/sqrt(2 h_min), sqrt(2 h_max)) (1 + 2/(h_min e)), valid for horizons <= 1."""
    if not 0.0 < h_min <= h_max < 1.0:
        raise DomainError(f"bounds must satisfy 0 < h_min <= h_max < 1, got ({h_min}, {h_max})")
    m1 = max(1.0 / math.sqrt(2.0 * h_min), math.sqrt(2.0 * h_max))
    m2 = m1 * (1.0 + 2.0 / (h_min * math.e))
    return m2 * m2


@dataclass(frozen=True)
class ContractionCertificate:
    t1: float
    t0: float
    kappa: float
    c1: float
    kappa_t0: float

    def to_dict(self) -> dict[str, float | None]:
        return {
            "c1": self.c1,
            "kappa": self.kappa,
            "kappa_t0": self.kappa_t0,
            "t0": self.t0,
            "t1": None if math.isinf(self.t1) else self.t1,
        }


def contraction_certificate(f: ResponseFunction, horizon: float, c1: float | None = None) -> ContractionCertificate:
    if horizon > 1.0:
        raise DomainError(f"the contraction certificate assumes horizon <= 1, got {horizon}")
    if horizon <= 0.0:
        raise DomainError(f"horizon must be > 0, got {horizon}")
    c1 = analytic_kernel_constant(f.h_min, f.h_max) if c1 is None else c1
    if c1 <= 0.0:
        raise DomainError(f"c1 must be > 0, got {c1}")
    if f.l_h == 0.0:
        t1 = math.inf
        t0 = horizon
    else:
        t1 = (f.h_min / (c1 * f.l_h**2)) ** (1.0 / f.h_min)
        t0 = min(horizon, t1 / 2.0)
    kappa_t0 = math.sqrt(c1 * f.l_h**2 / f.h_min) * t0 ** (f.h_min / 2.0)
    return ContractionCertificate(t1=t1, t0=t0, kappa=0.5 ** (f.h_min / 2.0), c1=c1, kappa_t0=kappa_t0)


# Kernel Lipschitz audit


@dataclass(frozen=True)
class KernelLipschitzReport:
    ratios: tuple[float, ...]
    lhs_max: float
    fitted_c_k: float


def _kernel(t: float, s: NDArray[np.float64], h: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.sqrt(2.0 * h) * (t - s) ** (h - 0.5)


def _perturbed_pair(rng: np.random.Generator, s: NDArray[np.float64], horizon: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    level, amp, freq, bump, phase = rng.uniform(-1.0, 1.0, size=5)
    x = level + amp * np.sin(2.0 * math.pi * (1.0 + abs(freq)) * s / horizon)
    y = x + 0.5 * bump * np.cos(2.0 * math.pi * s / horizon + math.pi * phase)
    return x, y


def kernel_lipschitz_check(grid: TimeGrid, f: ResponseFunction, n_pairs: int, seed: int) -> KernelLipschitzReport:
    """Ratio of int |K_X - K_Y|^2 ds to L_H^2 int (t-s)^(h_min-1) |X - Y|^2 ds on smooth path pairs.

    Both integrals are midpoint panel sums evaluated at t = horizon/4, horizon/2 and horizon.
    """
    if n_pairs < 10:
        raise DomainError(f"kernel_lipschitz_check requires n_pairs >= 10, got {n_pairs}")
    mids = grid.midpoints
    targets = (grid.horizon / 4.0, grid.horizon / 2.0, grid.horizon)
    ratios: list[float] = []
    lhs_max = 0.0
    for pair in range(n_pairs):
        x, y = _perturbed_pair(path_generator(seed, pair), mids, grid.horizon)
        h_x = np.asarray(f(mids, x))
        h_y = np.asarray(f(mids, y))
        worst = 0.0
        for t in targets:
            inside = mids < t
            lhs = float(np.sum((_kernel(t, mids[inside], h_x[inside]) - _kernel(t, mids[inside], h_y[inside])) ** 2) * grid.delta)
            rhs = float(np.sum((t - mids[inside]) ** (f.h_min - 1.0) * (x[inside] - y[inside]) ** 2) * grid.delta)
            lhs_max = max(lhs_max, lhs)
            if f.l_h > 0.0 and rhs > 0.0:
                worst = max(worst, lhs / (f.l_h**2 * rhs))
        ratios.append(worst)
    return KernelLipschitzReport(ratios=tuple(ratios), lhs_max=lhs_max, fitted_c_k=max(ratios))


# Monte Carlo well-posedness checks


def _solve_stream(
    grid: TimeGrid,
    f: ResponseFunction,
    seed: int,
    path_index: int,
    tol: float,
    max_iter: int,
    convention: Convention,
) -> RfbmSolution:
    return solve_rfbm(
        grid,
        f,
        seed,
        tol=tol,
        max_iter=max_iter,
        convention=convention,
        increments=brownian_increments(seed, path_index, grid.n, grid.delta),
    )


def solve_paths(
    grid: TimeGrid,
    f: ResponseFunction,
    n_paths: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    convention: Convention = "state",
    threads: int = 1,
) -> NDArray[np.float64]:
    """Solved paths for streams 0..n_paths-1, shape (n_paths, n+1)."""

    def run(chunk: range) -> NDArray[np.float64]:
        return np.stack([_solve_stream(grid, f, seed, p, tol, max_iter, convention).path for p in chunk])

    return map_paths(run, n_paths, threads=threads, batch=64)


@dataclass(frozen=True)
class NormBoundReport:
    estimate: float
    se: float
    bound: float
    time: float

    @property
    def holds(self) -> bool:
        return self.estimate <= self.bound + 3.0 * self.se


def solution_norm_bound(sol: RfbmSolution, f: ResponseFunction, n_paths: int, threads: int = 1) -> NormBoundReport:
    """Monte Carlo sup_t E[X_t^2] against T^(2 h_max) + h_max/h_min.

    The ensemble shares the grid, seed and convention of ``sol``; ``sol`` itself is stream 0.
    """
    if n_paths < 100:
        raise DomainError(f"solution_norm_bound requires n_paths >= 100, got {n_paths}")
    grid = sol.grid
    paths = solve_paths(grid, f, n_paths, sol.seed, convention=sol.convention, threads=threads)
    second = paths**2
    k = int(np.argmax(second.mean(axis=0)))
    estimate, se = mean_se(second[:, k])
    return NormBoundReport(
        estimate=estimate,
        se=se,
        bound=grid.horizon ** (2.0 * f.h_max) + f.h_max / f.h_min,
        time=float(grid.points[k]),
    )


@dataclass(frozen=True)
class PicardContractionReport:
    distances: tuple[float, ...]
    ratios: tuple[float, ...]
    ratio_se: tuple[float, ...]
    kappa: float

    @property
    def holds(self) -> bool:
        return all(r <= self.kappa + 3.0 * se for r, se in zip(self.ratios, self.ratio_se))


def picard_contraction_mc(
    grid: TimeGrid,
    f: ResponseFunction,
    n_paths: int,
    seed: int,
    sweeps: int = 4,
    convention: Convention = "state",
    n_batches: int = 10,
) -> PicardContractionReport:
    """S^2 distances sup_t E|X^(k+1)_t - X^(k)_t|^2 between consecutive sweeps, and their ratios.

    Ratio standard errors come from batch means over `n_batches` groups of paths.
    """
    if sweeps < 2 or n_paths < n_batches:
        raise DomainError("picard_contraction_mc needs sweeps >= 2 and n_paths >= n_batches")
    squared = np.zeros((n_paths, sweeps, grid.n + 1))
    for p in range(n_paths):
        increments = brownian_increments(seed, p, grid.n, grid.delta)
        state = np.zeros(grid.n + 1)
        for k in range(sweeps):
            updated = picard_sweep(grid, f, state, increments, convention)
            squared[p, k] = (updated - state) ** 2
            state = updated

    def distances(rows: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.sqrt(rows.mean(axis=0).max(axis=1))

    overall = distances(squared)
    batch_ratios = []
    for block in np.array_split(squared, n_batches, axis=0):
        d = distances(block)
        batch_ratios.append(np.divide(d[1:], d[:-1], out=np.zeros(sweeps - 1), where=d[:-1] > 0.0))
    spread = np.std(np.asarray(batch_ratios), axis=0, ddof=1) / math.sqrt(n_batches)
    ratios = np.divide(overall[1:], overall[:-1], out=np.zeros(sweeps - 1), where=overall[:-1] > 0.0)
    return PicardContractionReport(
        distances=tuple(float(d) for d in overall),
        ratios=tuple(float(r) for r in ratios),
        ratio_se=tuple(float(s) for s in spread),
        kappa=0.5 ** (f.h_min / 2.0),
    )


# Pathwise scaling exponent


def _window_bounds(sol: RfbmSolution, t: float, eps: float) -> None:
    if eps <= 0.0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if t < 0.0 or t + eps > sol.grid.horizon + _WINDOW_SLACK:
        raise DomainError(f"window [{t}, {t + eps}] leaves [0, {sol.grid.horizon}]")


def extremal_indices(sol: RfbmSolution, t: float, eps: float) -> tuple[float, float]:
    """(min, max) of alpha over grid points in [t, t+eps]."""
    _window_bounds(sol, t, eps)
    pts = sol.grid.points
    inside = (pts >= t - _WINDOW_SLACK) & (pts <= t + eps + _WINDOW_SLACK)
    if not inside.any():
        raise DomainError(f"no grid point lies in [{t}, {t + eps}]")
    window = sol.alpha[inside]
    return float(window.min()), float(window.max())


@dataclass(frozen=True)
class KernelNormScaling:
    norm_sq: float
    lower: float
    upper: float
    h_minus: float
    h_plus: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.norm_sq * (1.0 + 1e-12) and self.norm_sq <= self.upper * (1.0 + 1e-12)


def kernel_norm_scaling(sol: RfbmSolution, f: ResponseFunction, t: float, eps: float) -> KernelNormScaling:
    """int_t^(t+eps) 2H(s,X_s) (t+eps-s)^(2H(s,X_s)-1) ds with H frozen at each piece's left end.

    Pieces are cut at grid points inside the window; the state at a cut is linearly interpolated.
    """
    _window_bounds(sol, t, eps)
    if eps > 1.0:
        raise DomainError(f"kernel_norm_scaling requires eps <= 1, got {eps}")
    end = t + eps
    pts = sol.grid.points
    cuts = np.concatenate(([t], pts[(pts > t + _WINDOW_SLACK) & (pts < end - _WINDOW_SLACK)], [end]))
    state = np.interp(cuts[:-1], pts, sol.path)
    h = np.asarray(f(cuts[:-1], state))
    pieces = (end - cuts[:-1]) ** (2.0 * h) - (end - cuts[1:]) ** (2.0 * h)
    norm_sq = float(np.sum(pieces))

    h_minus, h_plus = float(h.min()), float(h.max())
    if pts[(pts >= t - _WINDOW_SLACK) & (pts <= end + _WINDOW_SLACK)].size:
        grid_minus, grid_plus = extremal_indices(sol, t, eps)
        h_minus, h_plus = min(h_minus, grid_minus), max(h_plus, grid_plus)
    c1 = f.h_min / f.h_max
    c2 = f.h_max / f.h_min
    return KernelNormScaling(
        norm_sq=norm_sq,
        lower=c1 * eps ** (2.0 * h_plus),
        upper=c2 * eps ** (2.0 * h_minus),
        h_minus=h_minus,
        h_plus=h_plus,
    )


def identified_exponent(scaling: KernelNormScaling, eps: float) -> float:
    """ln(norm_sq) / (2 ln eps), which tends to alpha(t) as eps -> 0."""
    return math.log(scaling.norm_sq) / (2.0 * math.log(eps))


@dataclass(frozen=True)
class AlphaHolder:
    gamma_hat: float
    exponent: float
    quotient: float
    path_quotient: float
    bound: float

    @property
    def holds(self) -> bool:
        return math.isfinite(self.quotient) and self.quotient <= self.bound * (1.0 + 1e-9) + 1e-12


def _holder_quotient(times: NDArray[np.float64], values: NDArray[np.float64], exponent: float) -> float:
    gap = np.abs(times[:, None] - times[None, :])
    mask = (gap > 0.0) & (gap <= 1.0)
    diff = np.abs(values[:, None] - values[None, :])
    return float((diff[mask] / gap[mask] ** exponent).max()) if mask.any() else 0.0


def alpha_holder_check(sol: RfbmSolution, f: ResponseFunction) -> AlphaHolder:
    """Empirical Holder quotient of alpha with exponent min(gamma, estimated path exponent).

    The bound L_H * (path quotient) + C_H follows from the Lipschitz-Holder structure of H.
    """
    pts = sol.grid.points
    gamma_hat = estimate_holder_exponent(pts, sol.path)
    exponent = min(f.gamma, max(gamma_hat, 1e-3))
    path_quotient = _holder_quotient(pts, sol.path, exponent)
    return AlphaHolder(
        gamma_hat=gamma_hat,
        exponent=exponent,
        quotient=_holder_quotient(pts, sol.alpha, exponent),
        path_quotient=path_quotient,
        bound=f.l_h * path_quotient + f.c_h,
    )


@dataclass(frozen=True)
class SelfConvergence:
    n: int
    distance: float


def self_convergence(
    f: ResponseFunction,
    n: int,
    horizon: float,
    seed: int,
    convention: Convention = "state",
) -> SelfConvergence:
    """Sup distance at shared grid points between the n- and 2n-panel solutions on nested increments."""
    fine_grid = TimeGrid(horizon=horizon, n=2 * n)
    coarse_grid = TimeGrid(horizon=horizon, n=n)
    fine = brownian_increments(seed, 0, 2 * n, fine_grid.delta)
    coarse = fine[0::2] + fine[1::2]
    fine_sol = solve_rfbm(fine_grid, f, seed, convention=convention, increments=fine)
    coarse_sol = solve_rfbm(coarse_grid, f, seed, convention=convention, increments=coarse)
    return SelfConvergence(n=n, distance=float(np.max(np.abs(fine_sol.path[0::2] - coarse_sol.path))))
