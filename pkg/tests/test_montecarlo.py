from __future__ import annotations

import math

import numpy as np
import pytest

from rfbm_lab.montecarlo import (
    MAX_THREADS,
    covariance_matrix,
    default_threads,
    map_paths,
    mean_se,
    variance_se,
    within,
)
from rfbm_lab.rng import brownian_increments, path_generator


def test_path_streams_are_reproducible_and_distinct() -> None:
    first = brownian_increments(7, 3, 16, 0.25)
    again = brownian_increments(7, 3, 16, 0.25)
    other_path = brownian_increments(7, 4, 16, 0.25)
    other_seed = brownian_increments(8, 3, 16, 0.25)

    assert np.array_equal(first, again)
    assert not np.array_equal(first, other_path)
    assert not np.array_equal(first, other_seed)


def test_path_generator_rejects_negative_indices() -> None:
    with pytest.raises(ValueError, match="non-negative"):
        path_generator(-1, 0)


def _draw(seed: int):
    def run(chunk: range) -> np.ndarray:
        return np.stack([brownian_increments(seed, p, 4, 1.0) for p in chunk])

    return run


@pytest.mark.parametrize(("threads", "batch"), [(1, 7), (3, 5), (4, 64), (MAX_THREADS, 1)])
def test_map_paths_is_independent_of_threads_and_batch(threads: int, batch: int) -> None:
    reference = map_paths(_draw(5), 37, threads=1, batch=2048)
    result = map_paths(_draw(5), 37, threads=threads, batch=batch)

    assert result.shape == (37, 4)
    assert np.array_equal(result, reference)


def test_map_paths_bounds_threads() -> None:
    with pytest.raises(ValueError, match="between 1 and 32"):
        map_paths(_draw(0), 4, threads=MAX_THREADS + 1)
    with pytest.raises(ValueError, match="n_paths"):
        map_paths(_draw(0), 0)


def test_default_threads_reads_environment(monkeypatch) -> None:
    monkeypatch.setenv("RFBM_LAB_THREADS", "6")
    assert default_threads() == 6
    monkeypatch.setenv("RFBM_LAB_THREADS", "500")
    assert default_threads() == MAX_THREADS
    monkeypatch.setenv("RFBM_LAB_THREADS", "many")
    assert 1 <= default_threads() <= 4


def test_mean_se_of_known_sample() -> None:
    mean, se = mean_se([1.0, 2.0, 3.0, 4.0])

    assert mean == pytest.approx(2.5)
    assert se == pytest.approx(math.sqrt(5.0 / 3.0) / 2.0)
    assert math.isnan(mean_se([1.0])[1])


def test_variance_se_covers_unit_variance() -> None:
    samples = path_generator(1, 0).normal(0.0, 1.0, 20_000)
    var, se = variance_se(samples)

    # Gaussian: SE of the sample variance is about sqrt(2/n)
    assert se == pytest.approx(math.sqrt(2.0 / samples.size), rel=0.1)
    assert within(var, 1.0, se, z=4.0)


def test_covariance_matrix_shape_and_symmetry() -> None:
    samples = path_generator(2, 0).normal(size=(500, 3))
    cov = covariance_matrix(samples)

    assert cov.shape == (3, 3)
    assert np.allclose(cov, cov.T)
    assert covariance_matrix(samples[:, 0]).shape == (1, 1)


def test_within_uses_floor() -> None:
    assert within(1.05, 1.0, 0.0, floor=0.1)
    assert not within(1.5, 1.0, 0.1)
