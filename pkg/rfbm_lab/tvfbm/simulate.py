"""Path simulation of B(t) = sqrt(2H(t)) int_0^t (t-s)^(H(t)-1/2) dB_s on a uniform grid.

Each Brownian increment is weighted by the exact average of the kernel over its panel,
so the kernel is never evaluated at the singular endpoint s = t.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DomainError
from ..hurst import HurstFunction
from ..montecarlo import map_paths
from ..rng import brownian_increments
from .grid import TimeGrid

_MC_BATCH = 512


@dataclass(frozen=True)
class SamplePath:
    grid: TimeGrid
    values: NDArray[np.float64]
    increments: NDArray[np.float64]
    seed: int

    def csv_rows(self) -> list[dict[str, float]]:
        return [{"t": float(t), "value": float(v)} for t, v in zip(self.grid.points, self.values)]


def kernel_tv(t: float, s: float, h: float) -> float:
    if not 0.0 <= s < t:
        raise DomainError(f"kernel_tv requires 0 <= s < t, got s={s}, t={t}")
    if not 0.0 < h < 1.0:
        raise DomainError(f"kernel_tv requires h in (0, 1), got {h}")
    return math.sqrt(2.0 * h) * (t - s) ** (h - 0.5)


def panel_average(
    t: ArrayLike,
    left: ArrayLike,
    right: ArrayLike,
    h: ArrayLike,
) -> NDArray[np.float64]:
    """Mean of sqrt(2h)(t-s)^(h-1/2) over s in [left, right] with right <= t."""
    t = np.asarray(t, dtype=np.float64)
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    p = h + 0.5
    return np.sqrt(2.0 * h) / p * ((t - left) ** p - (t - right) ** p) / (right - left)


def panel_weights(grid: TimeGrid, k: int, h_value: float) -> NDArray[np.float64]:
    """Weights w_i(t_k), i < k, applied to the increments over [t_i, t_{i+1}]."""
    if not 0 <= k <= grid.n:
        raise DomainError(f"grid index {k} out of range 0..{grid.n}")
    if h_value == 0.5:
        return np.ones(k)
    pts = grid.points
    return panel_average(pts[k], pts[:k], pts[1 : k + 1], h_value)


def _weight_matrix(grid: TimeGrid, h: HurstFunction, indices: Sequence[int]) -> NDArray[np.float64]:
    pts = grid.points
    matrix = np.zeros((len(indices), grid.n))
    for row, k in enumerate(indices):
        if k > 0:
            matrix[row, :k] = panel_weights(grid, k, float(h(pts[k])))
    return matrix


def _require_simulable(h: HurstFunction) -> None:
    if not h.satisfies_critical_condition:
        raise DomainError(f"{h.name}: Holder exponent gamma={h.gamma} must exceed h_max={h.h_max}")


def simulate_tvfbm(grid: TimeGrid, h: HurstFunction, seed: int) -> SamplePath:
    _require_simulable(h)
    increments = brownian_increments(seed, 0, grid.n, grid.delta)
    if h.constant == 0.5:
        values = np.concatenate(([0.0], np.cumsum(increments)))
    else:
        matrix = _weight_matrix(grid, h, range(grid.n + 1))
        values = matrix @ increments
    return SamplePath(grid=grid, values=values, increments=increments, seed=seed)


def simulate_tvfbm_at(
    grid: TimeGrid,
    h: HurstFunction,
    times: ArrayLike,
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> NDArray[np.float64]:
    """Values at the chosen grid times for paths 0..n_paths-1, shape (n_paths, len(times)).

    Path p uses the same increments as simulate_tvfbm would for stream (seed, p).
    """
    _require_simulable(h)
    indices = [grid.index_of(float(t)) for t in np.atleast_1d(np.asarray(times, dtype=np.float64))]
    brownian = h.constant == 0.5
    matrix = None if brownian else _weight_matrix(grid, h, indices)
    cumulative_cols = np.asarray(indices) - 1

    def run(chunk: range) -> NDArray[np.float64]:
        draws = np.stack([brownian_increments(seed, p, grid.n, grid.delta) for p in chunk])
        if matrix is not None:
            return draws @ matrix.T
        sums = np.concatenate((np.zeros((len(chunk), 1)), np.cumsum(draws, axis=1)), axis=1)
        return sums[:, cumulative_cols + 1]

    return map_paths(run, n_paths, threads=threads, batch=_MC_BATCH)
