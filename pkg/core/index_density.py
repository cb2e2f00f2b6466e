"""Monte-Carlo local index density from Brownian-bridge Levy areas.

Per bridge sample on [0, 1] the estimator forms X = sum_{i<j} DR(e_i, e_j) A_ij
in the Clifford algebra and takes Str(X^{d/2}) / ((4 pi)^{d/2} (d/2)!). The
same areas also drive the exterior-algebra form of the estimate, the top
piece of exp(sum_{i<j} 1/2 Omega_ij A_ij) times (1/(2 i pi))^{d/2}.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import factorial

from .blades import blade_layout
from .clifford import CliffordElement, batch_power, supertrace_factor
from .curvature_forms import CurvatureTensor, a_genus_top
from .errors import DimensionError
from .model import DensityEstimate, IndexReport
from .stochastic_paths import sample_bridge_batch
from .utils import batch_sizes, default_workers, map_batches, pairwise_mean

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 200_000
DEFAULT_GRID_LEVEL = 10
DEFAULT_BATCH_SIZE = 1024


def _check_even(d: int) -> None:
    if d % 2 or d < 2:
        raise DimensionError(f"the index density needs even d >= 2, got {d}")


def dr_element(R: CurvatureTensor, i: int, j: int) -> CliffordElement:
    """DR(e_i, e_j) = 1/2 sum_{k<l} R_ijkl e_k e_l, indices 1..d."""
    d = R.d
    if not (1 <= i <= d and 1 <= j <= d):
        raise DimensionError(f"indices ({i}, {j}) outside 1..{d}")
    coeffs = {
        (k + 1, l + 1): 0.5 * R.components[i - 1, j - 1, k, l] for k in range(d) for l in range(k + 1, d)
    }
    return CliffordElement.from_coeffs(d, coeffs)


def _pair_table(R: CurvatureTensor) -> Tuple[list, np.ndarray]:
    """Pairs (i, j), i < j, 0-based, and the matrix whose rows are the DR(e_i, e_j) coefficients."""
    d = R.d
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    rows = np.stack([dr_element(R, i + 1, j + 1).values.real for i, j in pairs])
    return pairs, rows


def mc_prefactor(d: int) -> float:
    return 1.0 / ((4.0 * math.pi) ** (d // 2) * factorial(d // 2, exact=True))


def form_prefactor(d: int) -> complex:
    return (1.0 / (2j * math.pi)) ** (d // 2)


def _sample_values(R: CurvatureTensor, power: int, L: int, size: int, gen: np.random.Generator):
    """Per-sample supertrace and form values of one bridge batch."""
    d = R.d
    layout = blade_layout(d)
    pairs, rows = _pair_table(R)
    areas = sample_bridge_batch(d, 1.0, L, size, gen).levy_areas()
    weights = np.stack([areas[:, i, j] for i, j in pairs], axis=1)
    element = weights @ rows
    clifford_top = batch_power(layout, element, power, kind="clifford")[:, layout.top]
    form_top = batch_power(layout, element, power, kind="wedge")[:, layout.top]
    return clifford_top, form_top


def _run_samples(
    R: CurvatureTensor,
    power: int,
    samples: int,
    L: int,
    rng: np.random.Generator,
    workers: Optional[int],
    batch_size: int,
):
    workers = default_workers() if workers is None else workers
    sizes = batch_sizes(samples, batch_size)
    logger.info("index density: %d bridge samples in %d batches, L=%d", samples, len(sizes), L)

    def run(gen: np.random.Generator, size: int):
        return _sample_values(R, power, L, size, gen)

    results = map_batches(run, rng, sizes, workers)
    clifford_top = np.concatenate([item[0] for item in results])
    form_top = np.concatenate([item[1] for item in results])
    return clifford_top, form_top


def _estimate(values: np.ndarray, samples: int, L: int) -> DensityEstimate:
    mean, stderr = pairwise_mean(values)
    return DensityEstimate(value=complex(mean), stderr=float(stderr), samples=samples, grid_level=L)


def _densities(R, samples, L, rng, workers, batch_size) -> Tuple[DensityEstimate, DensityEstimate]:
    _check_even(R.d)
    if samples < 1:
        raise DimensionError("at least one sample is required")
    power = R.d // 2
    clifford_top, form_top = _run_samples(R, power, samples, L, rng, workers, batch_size)
    mc = _estimate(mc_prefactor(R.d) * supertrace_factor(R.d) * clifford_top, samples, L)
    forms = _estimate(form_prefactor(R.d) * form_top / factorial(power, exact=True), samples, L)
    return mc, forms


def mc_density(
    R: CurvatureTensor,
    samples: int = DEFAULT_SAMPLES,
    L: int = DEFAULT_GRID_LEVEL,
    rng: Optional[np.random.Generator] = None,
    workers: Optional[int] = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> DensityEstimate:
    """Str E[(sum_{i<j} DR(e_i, e_j) A_ij)^{d/2} | B_1 = 0] / ((4 pi)^{d/2} (d/2)!)."""
    rng = np.random.default_rng() if rng is None else rng
    return _densities(R, samples, L, rng, workers, batch_size)[0]


def mc_form_density(
    R: CurvatureTensor,
    samples: int = DEFAULT_SAMPLES,
    L: int = DEFAULT_GRID_LEVEL,
    rng: Optional[np.random.Generator] = None,
    workers: Optional[int] = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> DensityEstimate:
    """(1/(2 i pi))^{d/2} E[top piece of exp(sum_{i<j} 1/2 Omega_ij A_ij) | B_1 = 0]."""
    rng = np.random.default_rng() if rng is None else rng
    return _densities(R, samples, L, rng, workers, batch_size)[1]


def grade_cancellation_residual(
    R: CurvatureTensor,
    k: int,
    samples: int,
    L: int,
    rng: np.random.Generator,
    workers: Optional[int] = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> float:
    """Largest |Str((sum DR A)^k)| over the samples; zero for every k < d/2."""
    _check_even(R.d)
    if k < 0:
        raise DimensionError(f"power must be non-negative, got {k}")
    clifford_top, _ = _run_samples(R, k, samples, L, rng, workers, batch_size)
    return float(np.max(np.abs(supertrace_factor(R.d) * clifford_top)))


def verify_local_index(
    R: CurvatureTensor,
    samples: int = DEFAULT_SAMPLES,
    L: int = DEFAULT_GRID_LEVEL,
    rng: Optional[np.random.Generator] = None,
    sigma: float = 3.0,
    bias_allowance: float = 0.02,
    workers: Optional[int] = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> IndexReport:
    """Monte-Carlo density against (1/(2 i pi))^{d/2} times the A-hat top coefficient."""
    rng = np.random.default_rng() if rng is None else rng
    mc, forms = _densities(R, samples, L, rng, workers, batch_size)
    top = a_genus_top(R)
    report = IndexReport(
        dim=R.d,
        mc=mc,
        form_side=forms,
        agenus_top=top,
        reference=form_prefactor(R.d) * top,
        sigma=sigma,
        bias_allowance=bias_allowance,
    )
    logger.info(
        "local index: mc=%s +/- %.3g, reference=%s, pass=%s", mc.value, mc.stderr, report.reference, report.passed
    )
    return report
