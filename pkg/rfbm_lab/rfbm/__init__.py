"""Responsive fBm: Picard solver for X_t = int_0^t K(t, s; X_s) dB_s and its diagnostics."""

from .solver import RfbmSolution, picard_sweep, solve_rfbm

__all__ = ["RfbmSolution", "picard_sweep", "solve_rfbm"]
