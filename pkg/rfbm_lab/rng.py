"""Counter-based random streams: one independent Philox stream per (seed, path index)."""

from __future__ import annotations

import numpy as np

__all__ = ["path_generator", "brownian_increments"]


def path_generator(seed: int, path_index: int) -> np.random.Generator:
    """Generator for path `path_index` under `seed`, independent of how paths are batched."""
    if seed < 0 or path_index < 0:
        raise ValueError(f"seed and path_index must be non-negative, got ({seed}, {path_index})")
    sequence = np.random.SeedSequence(seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.Philox(sequence))


def brownian_increments(seed: int, path_index: int, n: int, delta: float) -> np.ndarray:
    """n Brownian increments of variance delta for one path."""
    return path_generator(seed, path_index).normal(0.0, np.sqrt(delta), size=n)
