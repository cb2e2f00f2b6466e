"""Truncated free tensor algebra over the indeterminates X_0, ..., X_d.

Words are tuples of letters. Letter 0 is the time direction and counts twice in
the degree ``d(I) = |I| + n(I)``; a series only keeps words whose degree is at
most its cap, which is the quotient by ``{X_I = 0, d(I) > cap}``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Number
from typing import Dict, Iterable, List, Mapping, Tuple

from .errors import ConstantTermError, DegreeCapMismatch, DimensionError, WordError

Word = Tuple[int, ...]

EMPTY_WORD: Word = ()
_LOG_UNIT_TOLERANCE = 1e-12


def zero_count(word: Word) -> int:
    return sum(1 for letter in word if letter == 0)


def word_degree(word: Word) -> int:
    return len(word) + zero_count(word)


def all_words(d: int, max_length: int) -> List[Word]:
    """Every non-empty word over {0..d} with at most ``max_length`` letters, length-lexicographic."""
    words: List[Word] = []
    for length in range(1, max_length + 1):
        words.extend(itertools.product(range(d + 1), repeat=length))
    return words


@lru_cache(maxsize=None)
def _words_up_to(d: int, cap: int) -> Tuple[Word, ...]:
    return tuple(word for word in all_words(d, cap) if word_degree(word) <= cap)


def words_up_to(d: int, cap: int) -> List[Word]:
    """Every non-empty word with ``d(I) <= cap``, the summation set of the approximants."""
    if d < 0 or cap < 0:
        raise DimensionError(f"invalid alphabet size d={d} or cap={cap}")
    return list(_words_up_to(d, cap))


@dataclass
class TensorSeries:
    """Element of the degree-truncated tensor algebra, stored sparsely as word -> coefficient."""

    dim: int
    degree_cap: int
    coeffs: Dict[Word, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim < 0 or self.degree_cap < 0:
            raise DimensionError(f"invalid series shape d={self.dim}, cap={self.degree_cap}")
        cleaned: Dict[Word, complex] = {}
        for word, value in self.coeffs.items():
            word = tuple(word)
            if any(letter < 0 or letter > self.dim for letter in word):
                raise WordError(f"word {word} has letters outside 0..{self.dim}")
            if word_degree(word) > self.degree_cap:
                raise WordError(f"word {word} exceeds degree cap {self.degree_cap}")
            if value != 0:
                cleaned[word] = value
        self.coeffs = cleaned

    @classmethod
    def zero(cls, dim: int, degree_cap: int) -> "TensorSeries":
        return cls(dim, degree_cap, {})

    @classmethod
    def unit(cls, dim: int, degree_cap: int) -> "TensorSeries":
        return cls(dim, degree_cap, {EMPTY_WORD: 1.0})

    @classmethod
    def generator(cls, dim: int, degree_cap: int, letter: int, scale: complex = 1.0) -> "TensorSeries":
        word = (letter,)
        if word_degree(word) > degree_cap:
            return cls.zero(dim, degree_cap)
        return cls(dim, degree_cap, {word: scale})

    def coeff(self, word: Iterable[int]) -> complex:
        return self.coeffs.get(tuple(word), 0.0)

    @property
    def constant_term(self) -> complex:
        return self.coeffs.get(EMPTY_WORD, 0.0)

    def words(self) -> List[Word]:
        return sorted(self.coeffs, key=lambda word: (len(word), word))

    def truncate(self, degree_cap: int) -> "TensorSeries":
        kept = {w: c for w, c in self.coeffs.items() if word_degree(w) <= degree_cap}
        return TensorSeries(self.dim, degree_cap, kept)

    def _check_compatible(self, other: "TensorSeries") -> None:
        if self.degree_cap != other.degree_cap:
            raise DegreeCapMismatch(f"degree caps differ: {self.degree_cap} != {other.degree_cap}")
        if self.dim != other.dim:
            raise DimensionError(f"alphabet sizes differ: {self.dim} != {other.dim}")

    def __add__(self, other: "TensorSeries") -> "TensorSeries":
        self._check_compatible(other)
        total: Dict[Word, complex] = dict(self.coeffs)
        for word, value in other.coeffs.items():
            total[word] = total.get(word, 0.0) + value
        return TensorSeries(self.dim, self.degree_cap, total)

    def __neg__(self) -> "TensorSeries":
        return self.scale(-1.0)

    def __sub__(self, other: "TensorSeries") -> "TensorSeries":
        return self + (-other)

    def scale(self, factor: complex) -> "TensorSeries":
        return TensorSeries(self.dim, self.degree_cap, {w: factor * c for w, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TensorSeries):
            return ts_mul(self, other)
        if isinstance(other, Number):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.scale(other)
        return NotImplemented

    def max_abs_diff(self, other: "TensorSeries") -> float:
        self._check_compatible(other)
        keys = set(self.coeffs) | set(other.coeffs)
        if not keys:
            return 0.0
        return max(abs(self.coeff(w) - other.coeff(w)) for w in keys)


def _by_degree(series: TensorSeries) -> Dict[int, List[Tuple[Word, complex]]]:
    buckets: Dict[int, List[Tuple[Word, complex]]] = defaultdict(list)
    for word, value in series.coeffs.items():
        buckets[word_degree(word)].append((word, value))
    return buckets


def ts_mul(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    """Concatenation product; words whose degree passes the cap are discarded."""
    a._check_compatible(b)
    cap = a.degree_cap
    right = _by_degree(b)
    product: Dict[Word, complex] = defaultdict(complex)
    for u, cu in a.coeffs.items():
        room = cap - word_degree(u)
        for degree, items in right.items():
            if degree > room:
                continue
            for v, cv in items:
                product[u + v] += cu * cv
    return TensorSeries(a.dim, cap, _realify(product))


def _realify(values: Mapping[Word, complex]) -> Dict[Word, complex]:
    out: Dict[Word, complex] = {}
    for word, value in values.items():
        if isinstance(value, complex) and value.imag == 0:
            value = value.real
        out[word] = value
    return out


def ts_bracket(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    return ts_mul(a, b) - ts_mul(b, a)


def ts_exp(a: TensorSeries) -> TensorSeries:
    if a.constant_term != 0:
        raise ConstantTermError("exponential needs a series with zero constant term")
    result = TensorSeries.unit(a.dim, a.degree_cap)
    term = TensorSeries.unit(a.dim, a.degree_cap)
    # each power raises the minimal degree by at least one
    for k in range(1, a.degree_cap + 1):
        term = ts_mul(term, a).scale(1.0 / k)
        if not term.coeffs:
            break
        result = result + term
    return result


def ts_log(a: TensorSeries) -> TensorSeries:
    if abs(a.constant_term - 1.0) > _LOG_UNIT_TOLERANCE:
        raise ConstantTermError("logarithm needs a series with constant term 1")
    unit = TensorSeries.unit(a.dim, a.degree_cap)
    x = TensorSeries(a.dim, a.degree_cap, {word: value for word, value in a.coeffs.items() if word})
    result = TensorSeries.zero(a.dim, a.degree_cap)
    power = unit
    for k in range(1, a.degree_cap + 1):
        power = ts_mul(power, x)
        if not power.coeffs:
            break
        result = result + power.scale((-1.0) ** (k + 1) / k)
    return result


@lru_cache(maxsize=None)
def bracket_terms(word: Word) -> Tuple[Tuple[Word, int], ...]:
    """Signed words of the right-nested bracket [X_i1, [X_i2, ..., [X_ik-1, X_ik]...]]."""
    if not word:
        raise WordError("the bracket of the empty word is undefined")
    terms: Dict[Word, int] = {(word[-1],): 1}
    for letter in reversed(word[:-1]):
        nested: Dict[Word, int] = defaultdict(int)
        for inner, sign in terms.items():
            nested[(letter,) + inner] += sign
            nested[inner + (letter,)] -= sign
        terms = {w: s for w, s in nested.items() if s}
    return tuple(sorted(terms.items()))


def commutator_expand(word: Iterable[int], dim: int | None = None, degree_cap: int | None = None) -> TensorSeries:
    word = tuple(word)
    if not word:
        raise WordError("the bracket of the empty word is undefined")
    dim = max(word) if dim is None else dim
    degree_cap = word_degree(word) if degree_cap is None else degree_cap
    if word_degree(word) > degree_cap:
        return TensorSeries.zero(dim, degree_cap)
    return TensorSeries(dim, degree_cap, {w: float(s) for w, s in bracket_terms(word)})


def lie_series(coeffs: Mapping[Word, float], dim: int, degree_cap: int) -> TensorSeries:
    """Sum of c_I * X_I over the given words, expanded in tensor coordinates."""
    total: Dict[Word, complex] = defaultdict(float)
    for word, value in coeffs.items():
        word = tuple(word)
        if not word or word_degree(word) > degree_cap or value == 0:
            continue
        for expanded, sign in bracket_terms(word):
            total[expanded] += sign * value
    return TensorSeries(dim, degree_cap, dict(total))
