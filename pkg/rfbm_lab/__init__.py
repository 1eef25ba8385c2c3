"""Simulation and verification lab for time-varying and responsive fractional Brownian motion."""

__all__ = ["__version__"]

__version__ = "0.1.0"
