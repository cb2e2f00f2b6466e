"""Brownian paths and bridges on dyadic grids, their signatures and Chen coefficients.

Coordinate 0 of every path is elapsed time. Iterated integrals are those of the
piecewise-linear interpolation and are computed exactly by Chen's relation, one
segment exponential at a time.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from .errors import DimensionError, WordError
from .model import ChenCoefficients
from .tensor_algebra import TensorSeries, Word, ts_exp, ts_log, word_degree, words_up_to
from .utils import spawn_generators

logger = logging.getLogger(__name__)

MAX_PERMUTATION_LENGTH = 8

__all__ = [
    "PathSample",
    "PathBatch",
    "sample_brownian",
    "sample_bridge",
    "sample_brownian_batch",
    "sample_bridge_batch",
    "signature",
    "iterated_integral",
    "levy_area",
    "descent_count",
    "permuted_word",
    "chen_strichartz",
    "coordinate_arrays",
    "iterated_integral_arrays",
    "concatenate",
    "log_signature_coefficient",
    "chen_identity_residual",
    "spawn_generators",
]


def _check_shape(d: int, t: float, L: int) -> None:
    if d < 1:
        raise DimensionError(f"spatial dimension must be at least 1, got {d}")
    if not t > 0:
        raise DimensionError(f"horizon must be positive, got {t}")
    if L < 0:
        raise DimensionError(f"grid level must be non-negative, got {L}")


def _time_column(t: float, segments: int) -> np.ndarray:
    return np.arange(segments + 1) * (t / segments)


def _flat_index(word: Word, base: int) -> int:
    index = 0
    for letter in word:
        index = index * base + letter
    return index


@dataclass
class PathBatch:
    """Many paths sharing one grid; ``values`` has shape (samples, points, d + 1)."""

    values: np.ndarray
    horizon: float

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[2] - 1

    @property
    def segments(self) -> int:
        return self.values.shape[1] - 1

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=1)

    def __getitem__(self, index: int) -> "PathSample":
        return PathSample(values=self.values[index], horizon=self.horizon)

    def signature_levels(self, depth: int) -> List[np.ndarray]:
        """Dense signature levels 1..depth, level k shaped (samples, (d + 1) ** k).

        Column order is row-major in the letters, the same order as
        ``all_words``. Chen's relation S(t_{m+1}) = S(t_m) * exp(delta_m) is
        unrolled level by level: the increment of level k over segment m is
        sum_j S^{k-j}(t_m) (x) delta_m^j / j!, so each level is a cumulative
        sum over segments and the top level a batched matrix product.
        """
        if depth < 1:
            raise DimensionError(f"signature depth must be at least 1, got {depth}")
        steps = self.increments()
        # powers[j] = delta^j / j! at every segment, needed below the top level only
        powers: List[Optional[np.ndarray]] = [None, steps]
        for j in range(2, depth):
            powers.append(_outer_steps(powers[j - 1], steps) / j)
        # prefix[k] = level k of the signature at the start of every segment
        prefix: List[Optional[np.ndarray]] = [None]
        levels: List[np.ndarray] = []
        for k in range(1, depth + 1):
            if k < depth:
                increment = powers[k].copy()
                for j in range(1, k):
                    increment += _outer_steps(prefix[k - j], powers[j])
                cumulative = np.cumsum(increment, axis=1)
                levels.append(cumulative[:, -1, :])
                starts = np.zeros_like(cumulative)
                starts[:, 1:, :] = cumulative[:, :-1, :]
                prefix.append(starts)
            else:
                top = steps.sum(axis=1) if k == 1 else _segment_products(powers[k - 1], steps) / k
                for j in range(1, k):
                    top += _segment_products(prefix[k - j], powers[j])
                levels.append(top)
        return levels

    def levy_areas(self) -> np.ndarray:
        """Spatial areas A_ij = int B^i dB^j - B^j dB^i, shaped (samples, d, d), 0-based indices."""
        if self.d < 2:
            raise DimensionError("Levy areas need at least two spatial coordinates")
        start = self.values[:, :-1, 1:]
        steps = np.diff(self.values[:, :, 1:], axis=1)
        half = np.einsum("nmi,nmj->nij", start, steps)
        return half - half.transpose(0, 2, 1)


def _outer_steps(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Per-segment tensor product of (samples, segments, p) and (samples, segments, q) arrays."""
    n, m = left.shape[:2]
    return (left[:, :, :, None] * right[:, :, None, :]).reshape(n, m, -1)


def _segment_products(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Sum over segments of the per-segment tensor products, shaped (samples, p * q)."""
    return np.matmul(left.transpose(0, 2, 1), right).reshape(left.shape[0], -1)


@dataclass
class PathSample:
    """One piecewise-linear path; ``values`` has shape (points, d + 1)."""

    values: np.ndarray
    horizon: float

    @property
    def d(self) -> int:
        return self.values.shape[1] - 1

    @property
    def segments(self) -> int:
        return self.values.shape[0] - 1

    @property
    def grid(self) -> Optional[int]:
        """Dyadic level L when the path has 2**L segments."""
        count = self.segments
        if count >= 1 and count & (count - 1) == 0:
            return count.bit_length() - 1
        return None

    @classmethod
    def from_spatial(cls, spatial: Sequence[Sequence[float]], horizon: float = 1.0) -> "PathSample":
        """Build a path from spatial vertices; time runs uniformly from 0 to ``horizon``."""
        spatial = np.asarray(spatial, dtype=float)
        if spatial.ndim != 2 or spatial.shape[0] < 2:
            raise DimensionError("a path needs at least two vertices")
        time = _time_column(horizon, spatial.shape[0] - 1)
        return cls(values=np.column_stack([time, spatial]), horizon=horizon)

    def as_batch(self) -> PathBatch:
        return PathBatch(values=self.values[None, :, :], horizon=self.horizon)


def _brownian_values(d: int, t: float, L: int, size: int, rng: np.random.Generator, antithetic: bool) -> np.ndarray:
    segments = 2 ** L
    step = t / segments
    if antithetic:
        half = (size + 1) // 2
        draws = rng.standard_normal((half, segments, d))
        draws = np.concatenate([draws, -draws], axis=0)[:size]
    else:
        draws = rng.standard_normal((size, segments, d))
    spatial = np.zeros((size, segments + 1, d))
    np.cumsum(draws * math.sqrt(step), axis=1, out=spatial[:, 1:, :])
    time = np.broadcast_to(_time_column(t, segments)[None, :, None], (size, segments + 1, 1))
    return np.concatenate([time, spatial], axis=2)


def sample_brownian_batch(
    d: int, t: float, L: int, size: int, rng: np.random.Generator, antithetic: bool = False
) -> PathBatch:
    """``size`` Brownian paths; with ``antithetic`` the second half mirrors the first."""
    _check_shape(d, t, L)
    if size < 1:
        raise DimensionError("batch size must be at least 1")
    logger.debug("sampling %d Brownian paths, d=%d, t=%g, L=%d", size, d, t, L)
    return PathBatch(values=_brownian_values(d, t, L, size, rng, antithetic), horizon=t)


def sample_bridge_batch(
    d: int, t: float, L: int, size: int, rng: np.random.Generator, antithetic: bool = False
) -> PathBatch:
    """Brownian bridges from 0 to 0 over [0, t]: subtract (s / t) * B_t from a Brownian sample."""
    batch = sample_brownian_batch(d, t, L, size, rng, antithetic=antithetic)
    values = batch.values
    fraction = values[0, :, 0] / t
    endpoint = values[:, -1:, 1:].copy()
    values[:, :, 1:] -= fraction[None, :, None] * endpoint
    return batch


def sample_brownian(d: int, t: float, L: int, rng: np.random.Generator) -> PathSample:
    return sample_brownian_batch(d, t, L, 1, rng)[0]


def sample_bridge(d: int, t: float, L: int, rng: np.random.Generator) -> PathSample:
    return sample_bridge_batch(d, t, L, 1, rng)[0]


def _levels_to_series(levels: List[np.ndarray], d: int, degree_cap: int) -> TensorSeries:
    coeffs: Dict[Word, float] = {(): 1.0}
    for word in words_up_to(d, degree_cap):
        coeffs[word] = float(levels[len(word) - 1][0, _flat_index(word, d + 1)])
    return TensorSeries(d, degree_cap, coeffs)


def signature(p: PathSample, N: int) -> TensorSeries:
    """Signature of the interpolated path truncated at degree N."""
    if N < 1:
        raise DimensionError(f"degree cap must be at least 1, got {N}")
    return _levels_to_series(p.as_batch().signature_levels(N), p.d, N)


def _validate_word(word: Word, d: int) -> Word:
    word = tuple(int(letter) for letter in word)
    if any(letter < 0 or letter > d for letter in word):
        raise WordError(f"word {word} has letters outside 0..{d}")
    return word


def iterated_integral(p: PathSample, word: Sequence[int], degree_cap: Optional[int] = None) -> float:
    """Coefficient of ``word`` in the signature computed up to ``degree_cap``."""
    word = _validate_word(word, p.d)
    if not word:
        return 1.0
    cap = word_degree(word) if degree_cap is None else degree_cap
    if word_degree(word) > cap:
        raise WordError(f"word {word} exceeds degree cap {cap}")
    levels = p.as_batch().signature_levels(len(word))
    return float(levels[-1][0, _flat_index(word, p.d + 1)])


def levy_area(p: PathSample, i: int, j: int) -> float:
    """Area int B^i dB^j - B^j dB^i of the interpolated path, spatial indices 1..d."""
    if p.d < 2:
        raise DimensionError("Levy areas need at least two spatial coordinates")
    if i == j:
        raise DimensionError("Levy area needs two distinct coordinates")
    if not (1 <= i <= p.d and 1 <= j <= p.d):
        raise DimensionError(f"coordinates ({i}, {j}) outside 1..{p.d}")
    return float(p.as_batch().levy_areas()[0, i - 1, j - 1])


def descent_count(sigma: Sequence[int]) -> int:
    """Number of positions where the one-line sequence of ``sigma`` drops."""
    return sum(1 for a, b in zip(sigma, sigma[1:]) if a > b)


def permuted_word(sigma: Sequence[int], word: Word) -> Word:
    """The word u with u[sigma[n]] = word[n], i.e. sigma^{-1}(I) for 0-based images."""
    if sorted(sigma) != list(range(len(word))):
        raise WordError(f"{tuple(sigma)} is not a permutation of length {len(word)}")
    letters = [0] * len(word)
    for position, target in enumerate(sigma):
        letters[target] = word[position]
    return tuple(letters)


@lru_cache(maxsize=None)
def _permutation_weights(k: int) -> Tuple[Tuple[Tuple[int, ...], float], ...]:
    weights = []
    for sigma in itertools.permutations(range(k)):
        descents = descent_count(sigma)
        weight = (-1.0) ** descents / (k * k * comb(k - 1, descents, exact=True))
        weights.append((sigma, weight))
    return tuple(weights)


def _chen_row(word: Word, base: int) -> Dict[int, float]:
    row: Dict[int, float] = {}
    for sigma, weight in _permutation_weights(len(word)):
        column = _flat_index(permuted_word(sigma, word), base)
        row[column] = row.get(column, 0.0) + weight
    return row


def coordinate_arrays(batch: PathBatch, N: int) -> Tuple[List[Word], np.ndarray, np.ndarray]:
    """Chen coefficients and iterated integrals of every path for the words with d(I) <= N.

    Returns ``(words, lam, sig)`` with ``lam`` and ``sig`` shaped (samples, words).
    """
    if N < 1:
        raise DimensionError(f"degree cap must be at least 1, got {N}")
    words = words_up_to(batch.d, N)
    depth = max(len(word) for word in words)
    if depth > MAX_PERMUTATION_LENGTH:
        raise WordError(
            f"permutation sums are limited to words of length {MAX_PERMUTATION_LENGTH}, cap {N} needs {depth}"
        )
    base = batch.d + 1
    levels = batch.signature_levels(depth)
    sig = np.empty((batch.size, len(words)))
    lam = np.empty((batch.size, len(words)))
    for length in range(1, depth + 1):
        columns = [n for n, word in enumerate(words) if len(word) == length]
        if not columns:
            continue
        weights = np.zeros((base ** length, len(columns)))
        for slot, n in enumerate(columns):
            for column, weight in _chen_row(words[n], base).items():
                weights[column, slot] = weight
        level = levels[length - 1]
        sig[:, columns] = level[:, [_flat_index(words[n], base) for n in columns]]
        lam[:, columns] = level @ weights
    return words, lam, sig


def iterated_integral_arrays(batch: PathBatch, words: Sequence[Sequence[int]]) -> np.ndarray:
    """Iterated integrals of every path for ``words``, shaped (samples, words)."""
    words = [_validate_word(word, batch.d) for word in words]
    if not words or not all(words):
        raise WordError("need at least one word and no empty words")
    levels = batch.signature_levels(max(len(word) for word in words))
    base = batch.d + 1
    values = np.empty((batch.size, len(words)))
    for length, level in enumerate(levels, start=1):
        columns = [n for n, word in enumerate(words) if len(word) == length]
        if columns:
            values[:, columns] = level[:, [_flat_index(words[n], base) for n in columns]]
    return values


def chen_strichartz(p: PathSample, N: int) -> ChenCoefficients:
    """Lambda_I of one path for every word with d(I) <= N."""
    words, lam, _ = coordinate_arrays(p.as_batch(), N)
    return ChenCoefficients(dim=p.d, degree_cap=N, values={w: float(v) for w, v in zip(words, lam[0])})


def concatenate(p: PathSample, q: PathSample) -> PathSample:
    """Run ``q`` after ``p``; time and space of ``q`` are shifted to start where ``p`` ends."""
    if p.d != q.d:
        raise DimensionError(f"cannot join paths of dimensions {p.d} and {q.d}")
    tail = q.values[1:] - q.values[0] + p.values[-1]
    return PathSample(values=np.concatenate([p.values, tail], axis=0), horizon=p.horizon + q.horizon)


def log_signature_coefficient(p: PathSample, word: Sequence[int]) -> float:
    """Word coefficient of the logarithm of the signature."""
    word = _validate_word(word, p.d)
    if not word:
        raise WordError("the logarithm of a signature has no constant term")
    value = ts_log(signature(p, word_degree(word))).coeff(word)
    return float(np.real(value))


def chen_identity_residual(p: PathSample, N: int) -> float:
    """Largest coefficient gap between exp of the Chen series and the signature."""
    coefficients = chen_strichartz(p, N)
    rebuilt = ts_exp(coefficients.lie_series())
    return rebuilt.max_abs_diff(signature(p, N))
