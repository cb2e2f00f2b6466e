"""Utility helpers used by the verification library."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np
from scipy import stats

THREADS_ENV = "CHEN_INDEX_THREADS"

T = TypeVar("T")


def ensure_directory(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def batch_sizes(total: int, batch_size: int, even: bool = False) -> List[int]:
    """Split ``total`` samples into fixed-size batches; ``even`` keeps every batch even-sized."""
    if total < 1:
        raise ValueError("at least one sample is required")
    batch_size = max(1, batch_size)
    if even:
        total += total % 2
        batch_size += batch_size % 2
    sizes = [batch_size] * (total // batch_size)
    if total % batch_size:
        sizes.append(total % batch_size)
    return sizes


def spawn_generators(rng: np.random.Generator, count: int) -> List[np.random.Generator]:
    """One independent child generator per batch.

    Children come from ``Generator.spawn`` so they only depend on the parent's
    seed sequence and the batch index, never on which worker runs the batch.
    """
    return list(rng.spawn(count))


def map_batches(
    func: Callable[[np.random.Generator, int], T],
    rng: np.random.Generator,
    sizes: Sequence[int],
    workers: int = 1,
) -> List[T]:
    generators = spawn_generators(rng, len(sizes))
    if workers <= 1 or len(sizes) == 1:
        return [func(gen, size) for gen, size in zip(generators, sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, generators, sizes))


def pairwise_mean(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error along axis 0.

    The samples are laid out contiguously so numpy reduces them with its
    pairwise summation, giving the same bits for the same input order.
    """
    values = np.asarray(values)
    count = values.shape[0]
    flat = np.ascontiguousarray(values.reshape(count, -1).T)
    mean = flat.sum(axis=1) / count
    if count < 2:
        stderr = np.zeros(mean.shape)
    else:
        centered = flat - mean[:, None]
        var = (centered.real ** 2 + centered.imag ** 2).sum(axis=1) / (count - 1)
        stderr = np.sqrt(var / count)
    shape = values.shape[1:]
    return mean.reshape(shape), stderr.reshape(shape)


def linear_regression(x: Sequence[float], y: Sequence[float]):
    if len(x) < 2 or len(x) != len(y):
        return None
    result = stats.linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return {
        "slope": float(result.slope),
        "intercept": float(result.intercept),
        "rvalue": float(result.rvalue),
        "pvalue": float(result.pvalue),
        "stderr": float(result.stderr),
    }


def log_log_slope(times: Sequence[float], errors: Sequence[float]) -> float:
    points = [(math.log(t), math.log(e)) for t, e in zip(times, errors) if t > 0 and e > 0]
    if len(points) < 2:
        return float("nan")
    regression = linear_regression([p[0] for p in points], [p[1] for p in points])
    return regression["slope"] if regression else float("nan")


def finite_or_none(value: float):
    """JSON has no NaN; map non-finite floats to null."""
    if value is None or not math.isfinite(value):
        return None
    return float(value)
