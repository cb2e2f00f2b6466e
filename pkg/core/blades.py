"""Bitmap blade tables shared by the Clifford and exterior algebras.

Blade e_{i1} ... e_{ik} with i1 < ... < ik is stored at the bitmap index whose
bit (i - 1) is set for every i in the subset. Multiplying two blades lands on
the XOR of their bitmaps; only the sign depends on the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np

from .errors import DimensionError

Subset = Tuple[int, ...]


def _reorder_parity(a: np.ndarray, b: np.ndarray, popcount: np.ndarray) -> np.ndarray:
    """Parity of the transpositions that sort e_A e_B into canonical order."""
    swaps = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    a = a >> 1
    while np.any(a):
        swaps += popcount[a & b]
        a = a >> 1
    return swaps & 1


@dataclass(frozen=True)
class BladeLayout:
    d: int
    popcount: np.ndarray
    xor: np.ndarray
    clifford_sign: np.ndarray
    wedge_sign: np.ndarray

    @property
    def size(self) -> int:
        return 1 << self.d

    @property
    def top(self) -> int:
        return self.size - 1

    @property
    def grades(self) -> np.ndarray:
        return self.popcount

    def index(self, subset: Iterable[int]) -> int:
        subset = tuple(subset)
        if len(set(subset)) != len(subset):
            raise DimensionError(f"repeated generator in {subset}")
        bitmap = 0
        for i in subset:
            if not 1 <= i <= self.d:
                raise DimensionError(f"generator e_{i} outside 1..{self.d}")
            bitmap |= 1 << (i - 1)
        return bitmap

    def subset(self, bitmap: int) -> Subset:
        return tuple(i + 1 for i in range(self.d) if bitmap >> i & 1)

    def batch_product(self, left: np.ndarray, right: np.ndarray, kind: str = "clifford") -> np.ndarray:
        """Row-wise products of two stacks of multivectors shaped (n, 2**d)."""
        signs = self.clifford_sign if kind == "clifford" else self.wedge_sign
        left = np.asarray(left)
        right = np.asarray(right)
        out = np.zeros(np.broadcast_shapes(left.shape, right.shape), dtype=np.result_type(left, right))
        for a in np.flatnonzero(np.any(left != 0, axis=tuple(range(left.ndim - 1)))):
            out[..., self.xor[a]] += left[..., a : a + 1] * (signs[a] * right)
        return out


@lru_cache(maxsize=None)
def blade_layout(d: int) -> BladeLayout:
    if d < 1 or d > 12:
        raise DimensionError(f"blade tables support 1 <= d <= 12, got {d}")
    size = 1 << d
    indices = np.arange(size, dtype=np.int64)
    popcount = np.array([bin(value).count("1") for value in range(size)], dtype=np.int64)
    a = indices[:, None]
    b = indices[None, :]
    parity = _reorder_parity(a, b, popcount)
    reorder = 1 - 2 * parity
    overlap = a & b
    clifford = reorder * (1 - 2 * (popcount[overlap] & 1))
    wedge = np.where(overlap == 0, reorder, 0)
    return BladeLayout(
        d=d,
        popcount=popcount,
        xor=(a ^ b),
        clifford_sign=clifford.astype(float),
        wedge_sign=wedge.astype(float),
    )
