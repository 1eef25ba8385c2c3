from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import DomainError

_GRID_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_n = horizon."""

    horizon: float
    n: int
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.t0 != 0.0:
            raise DomainError("grids start at t0 = 0")
        if not self.horizon > 0.0:
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        if self.n < 2:
            raise DomainError(f"grid needs n >= 2 panels, got {self.n}")

    @property
    def delta(self) -> float:
        return self.horizon / self.n

    @property
    def points(self) -> NDArray[np.float64]:
        return np.linspace(0.0, self.horizon, self.n + 1)

    @property
    def midpoints(self) -> NDArray[np.float64]:
        pts = self.points
        return 0.5 * (pts[:-1] + pts[1:])

    def index_of(self, t: float) -> int:
        """Index of the grid point equal to t (within a relative 1e-9 of the spacing)."""
        k = int(round(t / self.delta))
        if not 0 <= k <= self.n or abs(k * self.delta - t) > _GRID_MATCH_TOL * max(1.0, self.delta):
            raise DomainError(f"t={t} is not a point of the grid (horizon={self.horizon}, n={self.n})")
        return k

    def refine(self, factor: int = 2) -> TimeGrid:
        return TimeGrid(horizon=self.horizon, n=self.n * factor)
