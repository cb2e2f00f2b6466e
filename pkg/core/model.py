"""Result and configuration records shared across the verification library."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .tensor_algebra import TensorSeries, Word, lie_series, word_degree, zero_count
from .utils import finite_or_none


def word_label(word: Word) -> str:
    return "(" + ",".join(str(letter) for letter in word) + ")"


def _complex_dict(value: complex) -> Dict[str, float]:
    return {"re": float(np.real(value)), "im": float(np.imag(value))}


@dataclass
class ChenCoefficients:
    """The Lambda_I(B)_t of one path for every word with d(I) <= degree_cap."""

    dim: int
    degree_cap: int
    values: Dict[Word, float] = field(default_factory=dict)

    def __getitem__(self, word: Word) -> float:
        return self.values.get(tuple(word), 0.0)

    def lie_series(self) -> TensorSeries:
        return lie_series(self.values, self.dim, self.degree_cap)


@dataclass
class MomentTable:
    """Closed-form expectations of iterated Stratonovich integrals at one horizon."""

    horizon: float
    entries: Dict[Word, float] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "word": word_label(word),
                "length": len(word),
                "zeros": zero_count(word),
                "degree": word_degree(word),
                "expectation": value,
            }
            for word, value in self.entries.items()
        ]
        return pd.DataFrame(rows, columns=["word", "length", "zeros", "degree", "expectation"])


@dataclass
class SemigroupEstimate:
    """Monte-Carlo estimate of a matrix expectation with entrywise standard errors."""

    matrix: np.ndarray
    stderr: np.ndarray
    samples: int

    @property
    def stderr_norm(self) -> float:
        return float(np.linalg.norm(self.stderr))


@dataclass
class ConvergenceReport:
    """Distances between the exact semigroup and its approximant over shrinking times."""

    N: int
    times: List[float]
    errors: List[float]
    stderrs: List[float] = field(default_factory=list)
    taylor_errors: List[float] = field(default_factory=list)
    noise_flags: List[bool] = field(default_factory=list)
    fitted_order: float = float("nan")
    taylor_order: float = float("nan")

    @property
    def target_order(self) -> float:
        return (self.N + 1) / 2.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.times,
                "error": self.errors,
                "stderr": self.stderrs,
                "taylor_error": self.taylor_errors,
                "noise_floor": self.noise_flags,
            }
        )

    def as_dict(self) -> Dict[str, object]:
        return {
            "N": self.N,
            "target_order": self.target_order,
            "fitted_order": finite_or_none(self.fitted_order),
            "taylor_order": finite_or_none(self.taylor_order),
            "noise_flagged_times": [t for t, flag in zip(self.times, self.noise_flags) if flag],
        }


@dataclass
class DensityEstimate:
    """Monte-Carlo estimate of the local index density at the frame centre."""

    value: complex
    stderr: float
    samples: int
    grid_level: int

    def as_dict(self) -> Dict[str, object]:
        return {
            "value": _complex_dict(self.value),
            "stderr": self.stderr,
            "samples": self.samples,
            "grid_level": self.grid_level,
        }


@dataclass
class IndexReport:
    """Side-by-side Monte-Carlo and A-hat values of the local index density."""

    dim: int
    mc: DensityEstimate
    form_side: DensityEstimate
    agenus_top: complex
    reference: complex
    sigma: float
    bias_allowance: float

    @property
    def discrepancy(self) -> float:
        return float(abs(self.mc.value - self.reference))

    @property
    def tolerance(self) -> float:
        return self.sigma * self.mc.stderr + self.bias_allowance * abs(self.reference)

    @property
    def discrepancy_sigmas(self) -> float:
        if self.mc.stderr == 0:
            return 0.0 if self.discrepancy == 0 else float("inf")
        return self.discrepancy / self.mc.stderr

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance

    def as_dict(self) -> Dict[str, object]:
        return {
            "dim": self.dim,
            "mc_value": _complex_dict(self.mc.value),
            "mc_stderr": self.mc.stderr,
            "form_value": _complex_dict(self.form_side.value),
            "agenus_value": _complex_dict(self.agenus_top),
            "reference": _complex_dict(self.reference),
            "discrepancy": self.discrepancy,
            "discrepancy_sigmas": finite_or_none(self.discrepancy_sigmas),
            "tolerance": self.tolerance,
            "samples": self.mc.samples,
            "grid_level": self.mc.grid_level,
            "pass": self.passed,
        }


@dataclass
class CheckResult:
    """Result from executing a single verification rule."""

    rule_name: str
    level: str
    summary: str
    details: Dict[str, object] = field(default_factory=dict)
    evidence: Dict[str, object] = field(default_factory=dict)
    metrics: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return {
            "rule": self.rule_name,
            "level": self.level,
            "summary": self.summary,
            "details": self.details,
            "evidence": self.evidence,
            "metrics": self.metrics,
        }


@dataclass
class RunConfig:
    """Resolved configuration of one CLI invocation."""

    subcommand: str
    dim: int
    truncation: Optional[int] = None
    samples: Optional[int] = None
    grid_level: Optional[int] = None
    seed: Optional[int] = None
    curvature: Optional[str] = None
    output_dir: Optional[str] = None
    output_format: str = "csv"
    workers: int = 1
    extra: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)
