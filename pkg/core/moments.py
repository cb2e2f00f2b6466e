"""Expectations of iterated Stratonovich integrals of Brownian motion with time as letter 0."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import factorial

from .errors import DimensionError, WordError
from .model import MomentTable
from .stochastic_paths import iterated_integral_arrays, sample_brownian_batch
from .tensor_algebra import Word, all_words, words_up_to, zero_count
from .utils import batch_sizes, default_workers, map_batches, pairwise_mean

logger = logging.getLogger(__name__)


def in_concat_set(word: Sequence[int]) -> bool:
    """True when the word is a concatenation of blocks (0) and (i, i), i >= 1."""
    word = tuple(word)
    position = 0
    while position < len(word):
        letter = word[position]
        if letter == 0:
            position += 1
        elif position + 1 < len(word) and word[position + 1] == letter:
            position += 2
        else:
            return False
    return True


def stratonovich_moment(word: Sequence[int], t: float) -> float:
    word = tuple(word)
    if any(letter < 0 for letter in word):
        raise WordError(f"word {word} has negative letters")
    if t < 0:
        raise DimensionError(f"horizon must be non-negative, got {t}")
    if not in_concat_set(word):
        return 0.0
    length = len(word)
    zeros = zero_count(word)
    assert (length - zeros) % 2 == 0, f"word {word} breaks the length/zero parity"
    p = (length + zeros) // 2
    q = (length - zeros) // 2
    return float(t ** p / (2 ** q * factorial(p, exact=True)))


def moment_words(d: int, N: Optional[int] = None, max_length: Optional[int] = None) -> List[Word]:
    """Words with d(I) <= N, or with at most ``max_length`` letters when that is given."""
    if d < 1:
        raise DimensionError(f"need d >= 1, got d={d}")
    if max_length is not None:
        if max_length < 1:
            raise DimensionError(f"need max_length >= 1, got {max_length}")
        return all_words(d, max_length)
    if N is None or N < 1:
        raise DimensionError(f"need N >= 1, got N={N}")
    return words_up_to(d, N)


def moment_table(d: int, N: Optional[int], t: float, max_length: Optional[int] = None) -> MomentTable:
    entries: Dict[Word, float] = {word: stratonovich_moment(word, t) for word in moment_words(d, N, max_length)}
    return MomentTable(horizon=t, entries=entries)


def monte_carlo_moments(
    d: int,
    N: Optional[int],
    t: float,
    samples: int,
    L: int,
    rng: np.random.Generator,
    workers: Optional[int] = None,
    batch_size: int = 4096,
    max_length: Optional[int] = None,
) -> pd.DataFrame:
    """Empirical means of the iterated integrals next to the closed form.

    Columns: word, length, zeros, degree, expectation, mc_mean, mc_stderr, z.
    """
    workers = default_workers() if workers is None else workers
    table = moment_table(d, N, t, max_length)
    words = list(table.entries)

    def run(gen: np.random.Generator, size: int) -> np.ndarray:
        return iterated_integral_arrays(sample_brownian_batch(d, t, L, size, gen), words)

    sizes = batch_sizes(samples, batch_size)
    logger.info("moment sweep: %d samples in %d batches over %d words", samples, len(sizes), len(table.entries))
    values = np.concatenate(map_batches(run, rng, sizes, workers), axis=0)
    means, stderrs = pairwise_mean(values)
    frame = table.to_frame()
    frame["mc_mean"] = means
    frame["mc_stderr"] = stderrs
    gap = (frame["mc_mean"] - frame["expectation"]).abs()
    with np.errstate(divide="ignore", invalid="ignore"):
        frame["z"] = np.where(frame["mc_stderr"] > 0, gap / frame["mc_stderr"], np.where(gap > 0, np.inf, 0.0))
    return frame


def expected_word_sum(model, t: float, N: int) -> np.ndarray:
    """Identity plus the sum over d(I) <= N of E(int o dB^I) times A_i1 ... A_ik.

    ``model`` only needs ``dim``, ``size`` and ``word_product``. The result is
    the heat Taylor polynomial of order floor(N / 2).
    """
    total = np.eye(model.size)
    for word in words_up_to(model.dim, N):
        moment = stratonovich_moment(word, t)
        if moment:
            total = total + moment * model.word_product(word)
    return total
