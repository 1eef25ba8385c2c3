"""Batched Monte Carlo over independent path streams, plus the summary statistics the checks use."""

from __future__ import annotations

import math
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import ArrayLike, NDArray

MAX_THREADS = 32
DEFAULT_BATCH = 2048


def default_threads() -> int:
    raw = os.environ.get("RFBM_LAB_THREADS")
    if raw is not None:
        try:
            return max(1, min(MAX_THREADS, int(raw)))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def map_paths(
    fn: Callable[[range], NDArray[np.float64]],
    n_paths: int,
    threads: int = 1,
    batch: int = DEFAULT_BATCH,
) -> NDArray[np.float64]:
    """Evaluate `fn` over consecutive path-index ranges and stack the rows in path order.

    `fn` receives a range of path indices and returns one row per index. Each path
    draws from its own stream, so the result does not depend on `threads` or `batch`.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    if not 1 <= threads <= MAX_THREADS:
        raise ValueError(f"threads must be between 1 and {MAX_THREADS}")
    chunks = [range(start, min(start + batch, n_paths)) for start in range(0, n_paths, batch)]
    if threads == 1 or len(chunks) == 1:
        return np.concatenate([np.asarray(fn(chunk)) for chunk in chunks], axis=0)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        parts = list(executor.map(fn, chunks))
    return np.concatenate([np.asarray(part) for part in parts], axis=0)


def mean_se(samples: ArrayLike) -> tuple[float, float]:
    x = np.asarray(samples, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        return float(np.mean(x)), float("nan")
    return float(np.mean(x, axis=0)), float(np.std(x, ddof=1, axis=0) / math.sqrt(n))


def variance_se(samples: ArrayLike) -> tuple[float, float]:
    """Unbiased sample variance and its standard error from the fourth central moment."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        return float(np.var(x, ddof=1)) if n > 1 else 0.0, float("nan")
    centred = x - np.mean(x)
    s2 = float(np.sum(centred**2) / (n - 1))
    m4 = float(np.mean(centred**4))
    spread = max(m4 - (n - 3) / (n - 1) * s2 * s2, 0.0)
    return s2, math.sqrt(spread / n)


def covariance_matrix(samples: ArrayLike) -> NDArray[np.float64]:
    """Sample covariance of the columns of an (n_paths, k) array."""
    x = np.asarray(samples, dtype=np.float64)
    return np.atleast_2d(np.cov(x, rowvar=False))


def within(estimate: float, target: float, se: float, z: float = 3.0, floor: float = 0.0) -> bool:
    """|estimate - target| <= max(z * se, floor)."""
    return abs(estimate - target) <= max(z * se, floor)
