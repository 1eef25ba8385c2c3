"""Time-varying fractional Brownian motion: simulation, exact laws, covariance and the Lamperti ODE."""

from .grid import TimeGrid
from .simulate import SamplePath, kernel_tv, panel_weights, simulate_tvfbm, simulate_tvfbm_at

__all__ = [
    "SamplePath",
    "TimeGrid",
    "kernel_tv",
    "panel_weights",
    "simulate_tvfbm",
    "simulate_tvfbm_at",
]
