"""Matrix model of the heat semigroup and its Chen-series approximants.

The operator is L = A_0 + 1/2 sum_i A_i^2 acting on R^m. The approximant of
order N averages exp(sum_{d(I) <= N} Lambda_I(B)_t A_I) over Brownian paths,
where A_I is the right-nested matrix commutator of the word I.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import factorial

from .errors import DimensionError, WordError
from .model import ConvergenceReport, SemigroupEstimate
from .moments import expected_word_sum
from .stochastic_paths import coordinate_arrays, sample_bridge_batch, sample_brownian_batch
from .tensor_algebra import Word, word_degree
from .utils import batch_sizes, default_workers, log_log_slope, map_batches, pairwise_mean

logger = logging.getLogger(__name__)

DEFAULT_GRID_LEVEL = 6


@dataclass
class MatrixModel:
    """Generators A_0, ..., A_d stacked as an array of shape (d + 1, m, m)."""

    generators: np.ndarray
    _commutators: Dict[Word, np.ndarray] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.generators = np.asarray(self.generators, dtype=float)
        if self.generators.ndim != 3 or self.generators.shape[1] != self.generators.shape[2]:
            raise DimensionError(f"generators must be square matrices of one size, got {self.generators.shape}")
        if self.generators.shape[0] < 2:
            raise DimensionError("a model needs the drift A_0 and at least one A_i")

    @property
    def dim(self) -> int:
        return self.generators.shape[0] - 1

    @property
    def size(self) -> int:
        return self.generators.shape[1]

    @classmethod
    def random(cls, d: int, size: int, rng: np.random.Generator, scale: Optional[float] = None) -> "MatrixModel":
        """Gaussian generators with entries of standard deviation ``scale`` (default 1/sqrt(size))."""
        if d < 1 or size < 1:
            raise DimensionError(f"need d >= 1 and size >= 1, got d={d}, size={size}")
        scale = 1.0 / math.sqrt(size) if scale is None else scale
        return cls(scale * rng.standard_normal((d + 1, size, size)))

    @classmethod
    def commuting(cls, d: int, size: int, rng: np.random.Generator, scale: float = 1.0) -> "MatrixModel":
        """Diagonal generators, so every bracket vanishes."""
        if d < 1 or size < 1:
            raise DimensionError(f"need d >= 1 and size >= 1, got d={d}, size={size}")
        diagonals = scale * rng.standard_normal((d + 1, size))
        return cls(np.stack([np.diag(row) for row in diagonals]))

    def operator(self) -> np.ndarray:
        spatial = self.generators[1:]
        return self.generators[0] + 0.5 * np.einsum("kij,kjl->il", spatial, spatial)

    def _check_word(self, word: Word) -> Word:
        word = tuple(word)
        if not word:
            raise WordError("the empty word has no matrix bracket")
        if any(letter < 0 or letter > self.dim for letter in word):
            raise WordError(f"word {word} has letters outside 0..{self.dim}")
        return word

    def nested_commutator(self, word: Sequence[int]) -> np.ndarray:
        word = self._check_word(word)
        if word not in self._commutators:
            inner = self.generators[word[-1]]
            for letter in reversed(word[:-1]):
                outer = self.generators[letter]
                inner = outer @ inner - inner @ outer
            self._commutators[word] = inner
        return self._commutators[word]

    def word_product(self, word: Sequence[int]) -> np.ndarray:
        word = self._check_word(word)
        product = self.generators[word[0]]
        for letter in word[1:]:
            product = product @ self.generators[letter]
        return product


def exact_semigroup(model: MatrixModel, t: float) -> np.ndarray:
    if t < 0:
        raise DimensionError(f"time must be non-negative, got {t}")
    return expm(t * model.operator())


def taylor_reference(model: MatrixModel, t: float, N: int) -> np.ndarray:
    """Sum over k <= floor((N + 1) / 2) of t^k L^k / k!."""
    if t < 0:
        raise DimensionError(f"time must be non-negative, got {t}")
    operator = model.operator()
    total = np.eye(model.size)
    power = np.eye(model.size)
    for k in range(1, (N + 1) // 2 + 1):
        power = power @ operator
        total = total + (t ** k / factorial(k, exact=True)) * power
    return total


@dataclass
class SampleBank:
    """Horizon-one Chen coefficients and iterated integrals of many paths.

    Coordinates at horizon t follow by multiplying word I by t^{d(I)/2}.
    With ``antithetic`` set every batch holds originals then their mirrors.
    """

    words: List[Word]
    lam: np.ndarray
    sig: np.ndarray
    batches: List[int]
    antithetic: bool = False
    bridge: bool = False

    @property
    def samples(self) -> int:
        return self.lam.shape[0]

    def scaled(self, t: float):
        exponents = np.array([word_degree(word) / 2.0 for word in self.words])
        factors = np.power(t, exponents)
        return self.lam * factors, self.sig * factors


def build_bank(
    d: int,
    N: int,
    samples: int,
    rng: np.random.Generator,
    L: int = DEFAULT_GRID_LEVEL,
    antithetic: bool = False,
    bridge: bool = False,
    workers: Optional[int] = None,
    batch_size: int = 2048,
) -> SampleBank:
    if N < 1 or samples < 1:
        raise DimensionError(f"need N >= 1 and samples >= 1, got N={N}, samples={samples}")
    workers = default_workers() if workers is None else workers
    sampler = sample_bridge_batch if bridge else sample_brownian_batch
    sizes = batch_sizes(samples, batch_size, even=antithetic)

    def run(gen: np.random.Generator, size: int):
        batch = sampler(d, 1.0, L, size, gen, antithetic=antithetic)
        return coordinate_arrays(batch, N)

    results = map_batches(run, rng, sizes, workers)
    words = results[0][0]
    lam = np.concatenate([item[1] for item in results], axis=0)
    sig = np.concatenate([item[2] for item in results], axis=0)
    logger.debug("bank of %d paths over %d words (bridge=%s)", lam.shape[0], len(words), bridge)
    return SampleBank(words=words, lam=lam, sig=sig, batches=list(sizes), antithetic=antithetic, bridge=bridge)


def _pair_average(values: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    pieces = []
    start = 0
    for size in sizes:
        half = size // 2
        chunk = values[start : start + size]
        pieces.append(0.5 * (chunk[:half] + chunk[half:]))
        start += size
    return np.concatenate(pieces, axis=0)


def estimate_from_bank(
    model: MatrixModel, bank: SampleBank, t: float, control_variate: bool = False
) -> SemigroupEstimate:
    if t < 0:
        raise DimensionError(f"time must be non-negative, got {t}")
    if max(letter for word in bank.words for letter in word) != model.dim:
        raise DimensionError(f"bank alphabet does not fit a model with d={model.dim}")
    m = model.size
    lam, sig = bank.scaled(t)
    brackets = np.stack([model.nested_commutator(word) for word in bank.words]).reshape(len(bank.words), -1)
    exponents = (lam @ brackets).reshape(-1, m, m)
    values = expm(exponents)
    if control_variate:
        if bank.bridge:
            raise DimensionError("the control variate uses Brownian moments, not bridge moments")
        N = max(word_degree(word) for word in bank.words)
        products = np.stack([model.word_product(word) for word in bank.words]).reshape(len(bank.words), -1)
        chen = (sig @ products).reshape(-1, m, m)
        values = values - chen + (expected_word_sum(model, t, N) - np.eye(m))
    if bank.antithetic:
        values = _pair_average(values, bank.batches)
    mean, stderr = pairwise_mean(values)
    return SemigroupEstimate(matrix=mean, stderr=stderr, samples=bank.samples)


def estimate_semigroup(
    model: MatrixModel,
    t: float,
    N: int,
    samples: int,
    rng: np.random.Generator,
    L: int = DEFAULT_GRID_LEVEL,
    antithetic: bool = False,
    control_variate: bool = False,
    workers: Optional[int] = None,
) -> SemigroupEstimate:
    bank = build_bank(model.dim, N, samples, rng, L=L, antithetic=antithetic, workers=workers)
    return estimate_from_bank(model, bank, t, control_variate=control_variate)


def approx_semigroup(
    model: MatrixModel,
    t: float,
    N: int,
    samples: int,
    rng: np.random.Generator,
    L: int = DEFAULT_GRID_LEVEL,
    antithetic: bool = False,
    control_variate: bool = False,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Monte-Carlo value of E exp(sum_{d(I) <= N} Lambda_I(B)_t A_I)."""
    return estimate_semigroup(
        model, t, N, samples, rng, L=L, antithetic=antithetic, control_variate=control_variate, workers=workers
    ).matrix


def conditional_semigroup(
    model: MatrixModel,
    t: float,
    N: int,
    samples: int,
    rng: np.random.Generator,
    L: int = DEFAULT_GRID_LEVEL,
    antithetic: bool = False,
    workers: Optional[int] = None,
) -> SemigroupEstimate:
    """E(exp(sum Lambda_I(B)_t A_I) | B_t = 0), averaged over Brownian bridges."""
    bank = build_bank(model.dim, N, samples, rng, L=L, antithetic=antithetic, bridge=True, workers=workers)
    return estimate_from_bank(model, bank, t)


def kernel_diagonal(
    model: MatrixModel,
    t: float,
    N: int,
    samples: int,
    rng: np.random.Generator,
    L: int = DEFAULT_GRID_LEVEL,
    workers: Optional[int] = None,
) -> SemigroupEstimate:
    """Conditional approximant times the flat heat kernel (2 pi t)^{-d/2} at the origin."""
    if not t > 0:
        raise DimensionError(f"kernel needs positive time, got {t}")
    density = (2.0 * math.pi * t) ** (-model.dim / 2.0)
    estimate = conditional_semigroup(model, t, N, samples, rng, L=L, workers=workers)
    return SemigroupEstimate(matrix=density * estimate.matrix, stderr=density * estimate.stderr, samples=estimate.samples)


def convergence_study(
    model: MatrixModel,
    N: int,
    t_list: Sequence[float],
    samples: int,
    rng: np.random.Generator,
    L: int = DEFAULT_GRID_LEVEL,
    antithetic: bool = True,
    control_variate: bool = True,
    workers: Optional[int] = None,
) -> ConvergenceReport:
    """Spectral-norm error of the approximant against the exact semigroup over shrinking times.

    One horizon-one bank serves every t. Times whose sampling error exceeds
    half the measured error are flagged and left out of the fit when at least
    two clean times remain.
    """
    times = sorted({float(t) for t in t_list}, reverse=True)
    if len(times) < 2 or times[-1] <= 0:
        raise DimensionError("a convergence study needs at least two positive times")
    bank = build_bank(model.dim, N, samples, rng, L=L, antithetic=antithetic, workers=workers)
    errors: List[float] = []
    stderrs: List[float] = []
    taylor_errors: List[float] = []
    flags: List[bool] = []
    for t in times:
        estimate = estimate_from_bank(model, bank, t, control_variate=control_variate)
        error = float(np.linalg.norm(exact_semigroup(model, t) - estimate.matrix, 2))
        gap = float(np.linalg.norm(estimate.matrix - taylor_reference(model, t, N), 2))
        noisy = estimate.stderr_norm > 0.5 * error
        if noisy:
            logger.warning("N=%d t=%g: sampling error %.3g exceeds half the bias %.3g", N, t, estimate.stderr_norm, error)
        else:
            logger.info("N=%d t=%g: error %.3g (stderr %.3g)", N, t, error, estimate.stderr_norm)
        errors.append(error)
        stderrs.append(estimate.stderr_norm)
        taylor_errors.append(gap)
        flags.append(noisy)
    clean = [n for n, flag in enumerate(flags) if not flag]
    fit = clean if len(clean) >= 2 else list(range(len(times)))
    fitted = log_log_slope([times[n] for n in fit], [errors[n] for n in fit])
    taylor_fit = log_log_slope(times, taylor_errors)
    return ConvergenceReport(
        N=N,
        times=times,
        errors=errors,
        stderrs=stderrs,
        taylor_errors=taylor_errors,
        noise_flags=flags,
        fitted_order=fitted,
        taylor_order=taylor_fit,
    )
