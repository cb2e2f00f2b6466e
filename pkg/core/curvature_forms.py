"""Algebraic curvature tensors, curvature 2-form matrices and the A-hat form.

Forms live in the exterior algebra of e*_1, ..., e*_d and share the bitmap
layout of ``blades``. The curvature form is Omega_kl = sum_{i<j} R_ijkl e*_i ^ e*_j.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number
from typing import Dict, Iterable, List, Mapping

import numpy as np
import sympy

from .blades import BladeLayout, Subset, blade_layout
from .errors import CurvatureSpecError, DimensionError, SymmetryError

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-9


@dataclass
class CurvatureTensor:
    """Components R_ijkl, stored 0-based as an array of shape (d, d, d, d)."""

    components: np.ndarray

    def __post_init__(self) -> None:
        self.components = np.asarray(self.components, dtype=float)
        shape = self.components.shape
        if len(shape) != 4 or len(set(shape)) != 1:
            raise DimensionError(f"curvature needs shape (d, d, d, d), got {shape}")
        residuals = check_symmetries(self)
        scale = max(1.0, float(np.max(np.abs(self.components))) if self.components.size else 1.0)
        worst = max(residuals.values())
        if worst > SYMMETRY_TOLERANCE * scale:
            raise SymmetryError(f"curvature breaks the Riemann symmetries (residual {worst:.3g})")

    @property
    def d(self) -> int:
        return self.components.shape[0]

    def __getitem__(self, index) -> float:
        return self.components[index]

    def scaled(self, factor: float) -> "CurvatureTensor":
        return CurvatureTensor(factor * self.components)


def check_symmetries(R) -> Dict[str, float]:
    """Largest residual of each Riemann identity."""
    comp = R.components if isinstance(R, CurvatureTensor) else np.asarray(R, dtype=float)
    if comp.size == 0:
        return {"first_pair": 0.0, "second_pair": 0.0, "pair_exchange": 0.0, "bianchi": 0.0}
    bianchi = comp + comp.transpose(0, 2, 3, 1) + comp.transpose(0, 3, 1, 2)
    return {
        "first_pair": float(np.max(np.abs(comp + comp.transpose(1, 0, 2, 3)))),
        "second_pair": float(np.max(np.abs(comp + comp.transpose(0, 1, 3, 2)))),
        "pair_exchange": float(np.max(np.abs(comp - comp.transpose(2, 3, 0, 1)))),
        "bianchi": float(np.max(np.abs(bianchi))),
    }


def _space_form(d: int, kappa: float) -> np.ndarray:
    delta = np.eye(d)
    return kappa * (np.einsum("ik,jl->ijkl", delta, delta) - np.einsum("il,jk->ijkl", delta, delta))


def _bianchi_projection(raw: np.ndarray) -> np.ndarray:
    skew = (raw - raw.transpose(1, 0, 2, 3) - raw.transpose(0, 1, 3, 2) + raw.transpose(1, 0, 3, 2)) / 4.0
    paired = (skew + skew.transpose(2, 3, 0, 1)) / 2.0
    cyclic = paired + paired.transpose(0, 2, 3, 1) + paired.transpose(0, 3, 1, 2)
    return paired - cyclic / 3.0


def _self_dual_weyl(kappa: float) -> np.ndarray:
    """Sum of lambda_a w_a (x) w_a over the self-dual 2-forms of R^4, lambda = kappa (2, -1, -1)."""
    basis = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))]
    comp = np.zeros((4, 4, 4, 4))
    for weight, planes in zip((2.0 * kappa, -kappa, -kappa), basis):
        form = np.zeros((4, 4))
        for i, j in planes:
            form[i, j], form[j, i] = 1.0, -1.0
        comp += weight * np.einsum("ij,kl->ijkl", form, form) / 2.0
    return comp


def make_curvature(kind: str, d: int, **params) -> CurvatureTensor:
    """Synthetic curvature tensors.

    kinds: ``constant`` (kappa), ``product`` (kappas, one per 2-plane),
    ``self_dual`` (kappa, d = 4 only), ``random`` (seed, scale) and ``zero``; the long names
    ``constant_curvature``, ``product_of_surfaces`` and ``random_bianchi``
    are accepted too.
    """
    if d < 1:
        raise DimensionError(f"dimension must be positive, got {d}")
    kind = _KIND_ALIASES.get(kind, kind)
    if kind == "zero":
        return CurvatureTensor(np.zeros((d, d, d, d)))
    if kind == "constant":
        return CurvatureTensor(_space_form(d, float(params.get("kappa", 1.0))))
    if kind == "product":
        if d % 2:
            raise DimensionError(f"a product of surfaces needs even d, got {d}")
        kappas = [float(k) for k in params.get("kappas", [1.0] * (d // 2))]
        if len(kappas) != d // 2:
            raise CurvatureSpecError(f"d={d} needs {d // 2} surface curvatures, got {len(kappas)}")
        comp = np.zeros((d, d, d, d))
        for block, kappa in enumerate(kappas):
            a, b = 2 * block, 2 * block + 1
            comp[a, b, a, b] = comp[b, a, b, a] = kappa
            comp[a, b, b, a] = comp[b, a, a, b] = -kappa
        return CurvatureTensor(comp)
    if kind == "self_dual":
        if d != 4:
            raise DimensionError(f"self-dual curvature is defined for d=4, got {d}")
        return CurvatureTensor(_self_dual_weyl(float(params.get("kappa", 1.0))))
    if kind == "random":
        rng = np.random.default_rng(params.get("seed", 0))
        raw = float(params.get("scale", 1.0)) * rng.standard_normal((d, d, d, d))
        return CurvatureTensor(_bianchi_projection(raw))
    raise CurvatureSpecError(f"unknown curvature kind {kind!r}")


_KIND_ALIASES = {
    "constant_curvature": "constant",
    "product_of_surfaces": "product",
    "random_bianchi": "random",
    "flat": "zero",
}


def parse_curvature_spec(spec: str, d: int) -> CurvatureTensor:
    """Parse ``constant:<k>``, ``product:<k1>,<k2>``, ``self_dual:<k>``, ``random:<seed>`` or ``random_bianchi``."""
    name, _, argument = spec.strip().partition(":")
    kind = _KIND_ALIASES.get(name, name)
    try:
        if kind in ("constant", "self_dual"):
            return make_curvature(kind, d, kappa=float(argument) if argument else 1.0)
        if kind == "product":
            if not argument:
                return make_curvature(kind, d)
            return make_curvature(kind, d, kappas=[float(k) for k in argument.split(",")])
        if kind == "random":
            return make_curvature(kind, d, seed=int(argument) if argument else 0)
        if kind == "zero" and not argument:
            return make_curvature(kind, d)
    except ValueError as exc:
        if isinstance(exc, (CurvatureSpecError, DimensionError)):
            raise
        raise CurvatureSpecError(f"malformed curvature spec {spec!r}: {exc}") from exc
    raise CurvatureSpecError(f"unknown curvature spec {spec!r}")


def rotate_curvature(R: CurvatureTensor, rotation: np.ndarray) -> CurvatureTensor:
    """Components in the frame rotated by the orthogonal matrix ``rotation``."""
    O = np.asarray(rotation, dtype=float)
    return CurvatureTensor(np.einsum("ai,bj,ck,dl,ijkl->abcd", O, O, O, O, R.components))


@dataclass
class FormElement:
    """Element of the exterior algebra, coefficients over bitmap blades."""

    d: int
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (blade_layout(self.d).size,):
            raise DimensionError(f"expected {blade_layout(self.d).size} coefficients, got {self.values.shape}")

    @classmethod
    def zero(cls, d: int) -> "FormElement":
        return cls(d, np.zeros(blade_layout(d).size))

    @classmethod
    def scalar(cls, d: int, value: complex = 1.0) -> "FormElement":
        element = cls.zero(d)
        element.values[0] = value
        return element

    @classmethod
    def from_coeffs(cls, d: int, coeffs: Mapping[Subset, complex]) -> "FormElement":
        layout = blade_layout(d)
        element = cls.zero(d)
        for subset, value in coeffs.items():
            if list(subset) != sorted(subset):
                raise DimensionError(f"subset {tuple(subset)} is not sorted")
            element.values[layout.index(subset)] += value
        return element

    @property
    def coeffs(self) -> Dict[Subset, complex]:
        layout = blade_layout(self.d)
        return {layout.subset(int(b)): complex(self.values[b]) for b in np.flatnonzero(self.values)}

    def coeff(self, subset: Iterable[int]) -> complex:
        return complex(self.values[blade_layout(self.d).index(tuple(subset))])

    @property
    def top(self) -> complex:
        return complex(self.values[-1])

    def degree_part(self, k: int) -> "FormElement":
        return FormElement(self.d, np.where(blade_layout(self.d).grades == k, self.values, 0))

    def __add__(self, other: "FormElement") -> "FormElement":
        _check_same_dimension(self, other)
        return FormElement(self.d, self.values + other.values)

    def __sub__(self, other: "FormElement") -> "FormElement":
        _check_same_dimension(self, other)
        return FormElement(self.d, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, Number):
            return FormElement(self.d, self.values * other)
        return NotImplemented

    __rmul__ = __mul__

    def __xor__(self, other: "FormElement") -> "FormElement":
        return wedge(self, other)


def _check_same_dimension(a: FormElement, b: FormElement) -> None:
    if a.d != b.d:
        raise DimensionError(f"form dimensions differ: {a.d} != {b.d}")


def wedge(a: FormElement, b: FormElement) -> FormElement:
    _check_same_dimension(a, b)
    return FormElement(a.d, blade_layout(a.d).batch_product(a.values, b.values, kind="wedge"))


def form_exp(a: FormElement) -> FormElement:
    """Exponential of a form with zero constant term; nilpotency ends the series at degree d."""
    if a.values[0] != 0:
        raise DimensionError("form exponential needs a zero constant term")
    result = FormElement.scalar(a.d)
    term = FormElement.scalar(a.d)
    for k in range(1, a.d + 1):
        term = wedge(term, a) * (1.0 / k)
        if not np.any(term.values):
            break
        result = result + term
    return result


@dataclass
class FormMatrix:
    """d x d matrix of forms; ``values`` has shape (d, d, 2**d)."""

    values: np.ndarray

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def entry(self, k: int, l: int) -> FormElement:
        """Entry (k, l) with 1-based indices."""
        return FormElement(self.d, self.values[k - 1, l - 1])

    def __matmul__(self, other: "FormMatrix") -> "FormMatrix":
        return form_matmul(self, other)

    def trace(self) -> FormElement:
        return FormElement(self.d, np.einsum("iib->b", self.values))


def form_matmul(a: FormMatrix, b: FormMatrix) -> FormMatrix:
    """(a b)_ik = sum_j a_ij ^ b_jk."""
    d = a.d
    layout = blade_layout(d)
    left = np.broadcast_to(a.values[:, None, :, :], (d, d, d, layout.size))
    right = np.broadcast_to(b.values.transpose(1, 0, 2)[None, :, :, :], (d, d, d, layout.size))
    products = layout.batch_product(left.reshape(-1, layout.size), right.reshape(-1, layout.size), kind="wedge")
    return FormMatrix(products.reshape(d, d, d, layout.size).sum(axis=2))


def _pair_columns(layout: BladeLayout) -> List[tuple]:
    d = layout.d
    return [(i, j, layout.index((i + 1, j + 1))) for i in range(d) for j in range(i + 1, d)]


def curvature_form(R: CurvatureTensor) -> FormMatrix:
    """Omega_kl = 1/2 sum_{i,j} R_ijkl e*_i ^ e*_j = sum_{i<j} R_ijkl e*_ij."""
    d = R.d
    layout = blade_layout(d)
    values = np.zeros((d, d, layout.size), dtype=complex)
    for i, j, column in _pair_columns(layout):
        values[:, :, column] = R.components[i, j]
    return FormMatrix(values)


@lru_cache(maxsize=None)
def a_hat_log_coefficients(order: int) -> Dict[int, sympy.Rational]:
    """Even Taylor coefficients of log(x / (2 sinh(x / 2))) up to x^order, exact."""
    if order < 0:
        raise DimensionError(f"order must be non-negative, got {order}")
    x = sympy.Symbol("x")
    expansion = sympy.series(sympy.log((x / 2) / sympy.sinh(x / 2)), x, 0, order + 1).removeO()
    return {n: sympy.Rational(expansion.coeff(x, n)) for n in range(2, order + 1, 2)}


def a_genus_form(R: CurvatureTensor) -> FormElement:
    """det^{1/2}(Omega / (2 sinh(Omega / 2))) as exp(1/2 sum_k c_2k tr Omega^2k)."""
    d = R.d
    omega = curvature_form(R)
    coefficients = a_hat_log_coefficients(d)
    exponent = FormElement.zero(d)
    square = omega @ omega
    power = square
    for n in range(2, d + 1, 2):
        if 2 * n > d:
            break
        exponent = exponent + power.trace() * (0.5 * float(coefficients[n]))
        power = power @ square
    return form_exp(exponent)


def a_genus_top(R: CurvatureTensor) -> complex:
    if R.d % 2:
        raise DimensionError(f"the A-hat top form needs even d, got {R.d}")
    return a_genus_form(R).top
