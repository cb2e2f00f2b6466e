"""Clifford algebra Cl(R^d) with e_i e_j + e_j e_i = -2 delta_ij.

Elements are dense coefficient vectors over the 2**d bitmap blades (see
``blades``); ``coeffs`` gives the sorted-subset view.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from .blades import BladeLayout, Subset, blade_layout
from .errors import ConvergenceError, DimensionError, SkewnessError

logger = logging.getLogger(__name__)

EXP_TOLERANCE = 1e-14
MAX_EXP_TERMS = 400
SKEW_TOLERANCE = 1e-12


@dataclass
class CliffordElement:
    d: int
    values: np.ndarray

    def __post_init__(self) -> None:
        layout = blade_layout(self.d)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (layout.size,):
            raise DimensionError(f"expected {layout.size} coefficients for d={self.d}, got {self.values.shape}")

    @property
    def layout(self) -> BladeLayout:
        return blade_layout(self.d)

    @classmethod
    def zero(cls, d: int) -> "CliffordElement":
        return cls(d, np.zeros(blade_layout(d).size, dtype=complex))

    @classmethod
    def scalar(cls, d: int, value: complex = 1.0) -> "CliffordElement":
        element = cls.zero(d)
        element.values[0] = value
        return element

    @classmethod
    def blade(cls, d: int, subset: Iterable[int], value: complex = 1.0) -> "CliffordElement":
        """value * e_{i1} ... e_{ik} for the given generators, in the order given."""
        subset = tuple(subset)
        result = cls.scalar(d, value)
        for i in subset:
            result = cl_mul(result, cls.generator(d, i))
        return result

    @classmethod
    def generator(cls, d: int, i: int) -> "CliffordElement":
        element = cls.zero(d)
        element.values[blade_layout(d).index((i,))] = 1.0
        return element

    @classmethod
    def from_coeffs(cls, d: int, coeffs: Mapping[Subset, complex]) -> "CliffordElement":
        """Build from canonical sorted subsets, e.g. {(1, 2): 0.5}."""
        layout = blade_layout(d)
        element = cls.zero(d)
        for subset, value in coeffs.items():
            subset = tuple(subset)
            if list(subset) != sorted(subset):
                raise DimensionError(f"subset {subset} is not sorted")
            element.values[layout.index(subset)] += value
        return element

    @property
    def coeffs(self) -> Dict[Subset, complex]:
        layout = self.layout
        return {layout.subset(int(b)): complex(self.values[b]) for b in np.flatnonzero(self.values)}

    def coeff(self, subset: Iterable[int]) -> complex:
        return complex(self.values[self.layout.index(sorted(subset))])

    @property
    def top(self) -> complex:
        return complex(self.values[self.layout.top])

    def grade(self, k: int) -> "CliffordElement":
        return CliffordElement(self.d, np.where(self.layout.grades == k, self.values, 0))

    def grades(self) -> List[int]:
        return sorted({int(g) for g in self.layout.grades[np.flatnonzero(self.values)]})

    def even_part(self) -> "CliffordElement":
        return CliffordElement(self.d, np.where(self.layout.grades % 2 == 0, self.values, 0))

    def odd_part(self) -> "CliffordElement":
        return CliffordElement(self.d, np.where(self.layout.grades % 2 == 1, self.values, 0))

    def scalar_part(self) -> complex:
        return complex(self.values[0])

    def norm1(self) -> float:
        """Sum of coefficient moduli; submultiplicative under cl_mul."""
        return float(np.abs(self.values).sum())

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        _check_same(self, other)
        return CliffordElement(self.d, self.values + other.values)

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        _check_same(self, other)
        return CliffordElement(self.d, self.values - other.values)

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(self.d, -self.values)

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return cl_mul(self, other)
        if isinstance(other, Number):
            return CliffordElement(self.d, self.values * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return CliffordElement(self.d, self.values * other)
        return NotImplemented

    def max_abs_diff(self, other: "CliffordElement") -> float:
        _check_same(self, other)
        return float(np.max(np.abs(self.values - other.values)))


def _check_same(a: CliffordElement, b: CliffordElement) -> None:
    if a.d != b.d:
        raise DimensionError(f"Clifford dimensions differ: {a.d} != {b.d}")


def cl_mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    _check_same(a, b)
    return CliffordElement(a.d, a.layout.batch_product(a.values, b.values))


def commutator(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return cl_mul(a, b) - cl_mul(b, a)


def _check_even(d: int) -> None:
    if d % 2:
        raise DimensionError(f"the supertrace needs even d, got {d}")


def supertrace_factor(d: int) -> complex:
    _check_even(d)
    return (2 / 1j) ** (d // 2)


def supertrace(a: CliffordElement) -> complex:
    """(2/i)^{d/2} times the coefficient of e_1 ... e_d."""
    return supertrace_factor(a.d) * a.top


def d_map(psi: np.ndarray) -> CliffordElement:
    """1/2 sum_{i<j} <psi(e_i), e_j> e_i e_j for a skew matrix psi."""
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {psi.shape}")
    if not np.allclose(psi, -psi.T, rtol=0.0, atol=SKEW_TOLERANCE):
        raise SkewnessError("d_map needs a skew-symmetric matrix")
    d = psi.shape[0]
    coeffs = {(i + 1, j + 1): 0.5 * psi[j, i] for i in range(d) for j in range(i + 1, d)}
    return CliffordElement.from_coeffs(d, coeffs)


def _log_tail_bound(radius: float, terms: int) -> float:
    """log of an upper bound for sum_{k > terms} radius^k / k!."""
    if radius == 0:
        return -math.inf
    ratio = radius / (terms + 2)
    if ratio >= 1:
        return math.inf
    return (terms + 1) * math.log(radius) - float(gammaln(terms + 2)) - math.log1p(-ratio)


def exp_terms_needed(radius: float, tolerance: float = EXP_TOLERANCE, max_terms: int = MAX_EXP_TERMS) -> int:
    target = math.log(tolerance)
    for terms in range(max_terms + 1):
        if _log_tail_bound(radius, terms) < target:
            return terms
    raise ConvergenceError(f"exponential series of an element with norm {radius:.3g} needs more than {max_terms} terms")


def cl_exp(a: CliffordElement, terms: Optional[int] = None) -> CliffordElement:
    """Truncated exponential series; the tail is bounded through ``norm1``."""
    radius = a.norm1()
    if terms is None:
        terms = exp_terms_needed(radius)
    elif _log_tail_bound(radius, terms) >= math.log(EXP_TOLERANCE):
        raise ConvergenceError(f"{terms} terms leave a tail above {EXP_TOLERANCE} for norm {radius:.3g}")
    logger.debug("Clifford exponential with %d terms (norm %.3g)", terms, radius)
    result = CliffordElement.scalar(a.d)
    term = CliffordElement.scalar(a.d)
    for k in range(1, terms + 1):
        term = cl_mul(term, a) * (1.0 / k)
        result = result + term
    return result


def batch_mul(layout: BladeLayout, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Clifford products of stacked coefficient rows."""
    return layout.batch_product(left, right, kind="clifford")


def batch_power(layout: BladeLayout, values: np.ndarray, k: int, kind: str = "clifford") -> np.ndarray:
    if k < 0:
        raise DimensionError(f"power must be non-negative, got {k}")
    result = np.zeros(values.shape, dtype=np.result_type(values, float))
    result[..., 0] = 1.0
    for _ in range(k):
        result = layout.batch_product(result, values, kind=kind)
    return result


@lru_cache(maxsize=None)
def _spinor_generators(d: int) -> Tuple[np.ndarray, ...]:
    pauli_x = np.array([[0, 1], [1, 0]], dtype=complex)
    pauli_y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    pauli_z = np.array([[1, 0], [0, -1]], dtype=complex)
    identity = np.eye(2, dtype=complex)
    half = d // 2
    gammas = []
    for k in range(half):
        for pauli in (pauli_x, pauli_y):
            factors = [pauli_z] * k + [pauli] + [identity] * (half - k - 1)
            matrix = factors[0]
            for factor in factors[1:]:
                matrix = np.kron(matrix, factor)
            gammas.append(1j * matrix)
    return tuple(gammas)


def spinor_representation(d: int) -> Tuple[List[np.ndarray], np.ndarray]:
    """Matrices rho(e_1), ..., rho(e_d) on a 2^{d/2}-dimensional space, and the chirality operator.

    Built from Jordan-Wigner gamma matrices, rho(e_j) = i gamma_j, so that
    rho(e_j)^2 = -1. The chirality is i^{d/2} rho(e_1 ... e_d).
    """
    _check_even(d)
    if d < 2:
        raise DimensionError("the spinor module needs d >= 2")
    generators = list(_spinor_generators(d))
    volume = generators[0]
    for matrix in generators[1:]:
        volume = volume @ matrix
    return generators, (1j ** (d // 2)) * volume


def represent(a: CliffordElement, generators: List[np.ndarray]) -> np.ndarray:
    dim = generators[0].shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for subset, value in a.coeffs.items():
        matrix = np.eye(dim, dtype=complex)
        for i in subset:
            matrix = matrix @ generators[i - 1]
        total = total + value * matrix
    return total


def spinor_supertrace(a: CliffordElement) -> complex:
    """Supertrace through the spinor module: Tr(chirality * rho(a))."""
    generators, chirality = spinor_representation(a.d)
    return complex(np.trace(chirality @ represent(a, generators)))
