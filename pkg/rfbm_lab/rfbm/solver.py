from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from ..errors import ConvergenceError, DomainError
from ..hurst import ResponseFunction
from ..rng import brownian_increments
from ..tvfbm.grid import TimeGrid

logger = logging.getLogger(__name__)

Convention = Literal["state", "time"]

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 64


@dataclass(frozen=True)
class RfbmSolution:
    grid: TimeGrid
    path: NDArray[np.float64]
    alpha: NDArray[np.float64]
    increments: NDArray[np.float64]
    iterations: int
    residual_history: tuple[float, ...]
    converged: bool
    seed: int
    h_min: float
    h_max: float
    convention: Convention = "state"

    def csv_rows(self) -> list[dict[str, float]]:
        return [
            {"t": float(t), "X": float(x), "alpha": float(a)}
            for t, x, a in zip(self.grid.points, self.path, self.alpha)
        ]

    def diagnostics(self) -> dict[str, object]:
        return {
            "convention": self.convention,
            "converged": self.converged,
            "horizon": self.grid.horizon,
            "iterations": self.iterations,
            "n": self.grid.n,
            "residual_history": list(self.residual_history),
            "seed": self.seed,
        }


def weight_matrix(grid: TimeGrid, exponents: NDArray[np.float64], convention: Convention) -> NDArray[np.float64]:
    """Kernel panel averages W[k, i] for target time t_k and panel [t_i, t_{i+1}], zero for i >= k.

    `state` freezes the exponent per panel (length n); `time` freezes it per target row (length n+1).
    """
    pts = grid.points
    target = pts[:, None]
    left = pts[None, :-1]
    right = pts[None, 1:]
    if convention == "state":
        h = exponents[None, :]
    elif convention == "time":
        h = exponents[:, None]
    else:
        raise DomainError(f"unknown kernel convention: {convention}")
    p = h + 0.5
    near = np.maximum(target - left, 0.0) ** p
    far = np.maximum(target - right, 0.0) ** p
    return np.sqrt(2.0 * h) / p * (near - far) / grid.delta


def picard_sweep(
    grid: TimeGrid,
    f: ResponseFunction,
    state: NDArray[np.float64],
    increments: NDArray[np.float64],
    convention: Convention = "state",
) -> NDArray[np.float64]:
    """One application of the solution map on a fixed set of increments."""
    pts = grid.points
    if convention == "state":
        exponents = np.asarray(f(pts[:-1], state[:-1]))
    else:
        exponents = np.asarray(f(pts, state))
    return weight_matrix(grid, exponents, convention) @ increments


def solve_rfbm(
    grid: TimeGrid,
    f: ResponseFunction,
    seed: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    convention: Convention = "state",
    increments: NDArray[np.float64] | None = None,
    raise_on_failure: bool = True,
    horizon_limit: float | None = None,
) -> RfbmSolution:
    """Pathwise Picard iteration from X = 0 on the increments of stream (seed, 0).

    Exponents are frozen at the left panel endpoint and the previous iterate's state there
    (`state`), or at the target time and state (`time`).
    """
    if tol <= 0.0 or max_iter < 1:
        raise DomainError("tol must be > 0 and max_iter >= 1")
    if horizon_limit is not None and grid.horizon > horizon_limit:
        logger.warning("horizon %g exceeds the contraction horizon %g; convergence is not guaranteed", grid.horizon, horizon_limit)
    if increments is None:
        increments = brownian_increments(seed, 0, grid.n, grid.delta)
    elif increments.shape != (grid.n,):
        raise DomainError(f"expected {grid.n} increments, got shape {increments.shape}")

    state = np.zeros(grid.n + 1)
    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        updated = picard_sweep(grid, f, state, increments, convention)
        history.append(float(np.max(np.abs(updated - state))))
        state = updated
        if history[-1] < tol:
            converged = True
            break

    if not converged:
        message = f"Picard iteration stopped after {max_iter} sweeps with residual {history[-1]:.3g}"
        if raise_on_failure:
            raise ConvergenceError(message, history=history)
        logger.warning(message)

    return RfbmSolution(
        grid=grid,
        path=state,
        alpha=np.asarray(f(grid.points, state)),
        increments=increments,
        iterations=len(history),
        residual_history=tuple(history),
        converged=converged,
        seed=seed,
        h_min=f.h_min,
        h_max=f.h_max,
        convention=convention,
    )
