"""Pass/fail rules applied to verification results."""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

import pandas as pd

from .model import CheckResult, ConvergenceReport, IndexReport
from .utils import finite_or_none

_LEVEL_ORDER = {"PASS": 0, "WARN": 1, "FAIL": 2}

# two-sided Gaussian tail beyond 3 sigma
_THREE_SIGMA_TAIL = 0.0027


def chen_identity_check(residuals: Sequence[float], thresholds: Dict) -> CheckResult:
    config = thresholds.get("verify_chen", {})
    tolerance = config.get("tolerance", 1e-10)
    worst = max(residuals) if residuals else float("nan")
    level = "PASS" if residuals and worst < tolerance else "FAIL"
    return CheckResult(
        rule_name="chen_identity",
        level=level,
        summary=f"Max coefficient discrepancy {worst:.3e} over {len(residuals)} paths",
        details={"tolerance": tolerance},
        metrics={"max_discrepancy": finite_or_none(worst)},
    )


def moment_agreement_check(frame: pd.DataFrame, thresholds: Dict) -> CheckResult:
    """Monte-Carlo means against the closed form.

    One word outside ``sigma`` standard errors is expected now and then in a
    sweep over many words; a handful within ``fail_sigma`` only warns.
    """
    config = thresholds.get("moments", {})
    sigma = config.get("sigma", 3.0)
    fail_sigma = config.get("fail_sigma", 5.0)
    bias = config.get("bias_allowance", 0.0)
    gap = (frame["mc_mean"] - frame["expectation"]).abs()
    slack = (gap - bias).clip(lower=0.0)
    stderr = frame["mc_stderr"]
    z = slack.where(slack == 0, slack / stderr.where(stderr > 0, float("nan"))).fillna(float("inf"))
    outside = frame.loc[z > sigma, "word"].tolist()
    worst = float(z.max()) if len(z) else 0.0
    expected = len(frame) * _THREE_SIGMA_TAIL
    allowed = max(1, math.ceil(expected + 3.0 * math.sqrt(expected)))
    if not outside:
        level = "PASS"
    elif worst <= fail_sigma and len(outside) <= allowed:
        level = "WARN"
    else:
        level = "FAIL"
    return CheckResult(
        rule_name="moment_agreement",
        level=level,
        summary=f"{len(outside)} of {len(frame)} words beyond {sigma:g} standard errors",
        details={"sigma": sigma, "fail_sigma": fail_sigma, "allowed_outliers": allowed},
        evidence={"outside_words": outside},
        metrics={"max_z": finite_or_none(worst)},
    )


def convergence_order_check(report: ConvergenceReport, thresholds: Dict) -> CheckResult:
    config = thresholds.get("converge", {})
    slack = config.get("order_slack", 0.3)
    floor = report.target_order - slack
    fitted_ok = not math.isnan(report.fitted_order) and report.fitted_order >= floor
    taylor_ok = not math.isnan(report.taylor_order) and report.taylor_order >= floor
    noisy = [t for t, flag in zip(report.times, report.noise_flags) if flag]
    if fitted_ok and taylor_ok:
        level = "WARN" if noisy else "PASS"
    else:
        level = "FAIL"
    return CheckResult(
        rule_name="convergence_order",
        level=level,
        summary=(
            f"N={report.N}: fitted order {report.fitted_order:.2f}, "
            f"Taylor gap order {report.taylor_order:.2f}, target {report.target_order:.1f}"
        ),
        details={"minimum_order": floor},
        evidence={"noise_flagged_times": noisy},
        metrics={
            "fitted_order": finite_or_none(report.fitted_order),
            "taylor_order": finite_or_none(report.taylor_order),
        },
    )


def local_index_check(report: IndexReport, thresholds: Dict) -> CheckResult:
    """Both sides of the local index identity, plus a realness warning when 4 divides d."""
    level = "PASS" if report.passed else "FAIL"
    evidence: Dict[str, object] = {}
    imaginary = abs(report.mc.value.imag)
    if level == "PASS" and report.dim % 4 == 0 and imaginary > 3.0 * report.mc.stderr:
        level = "WARN"
        evidence["imaginary_part"] = imaginary
    return CheckResult(
        rule_name="local_index",
        level=level,
        summary=(
            f"d={report.dim}: Monte-Carlo {report.mc.value.real:.6g}{report.mc.value.imag:+.6g}i "
            f"against {report.reference.real:.6g}{report.reference.imag:+.6g}i"
        ),
        details={"sigma": report.sigma, "bias_allowance": report.bias_allowance},
        evidence=evidence,
        metrics={
            "discrepancy": report.discrepancy,
            "tolerance": report.tolerance,
            "discrepancy_sigmas": finite_or_none(report.discrepancy_sigmas),
        },
    )


def grade_cancellation_check(residual: float, power: int, dim: int) -> CheckResult:
    level = "PASS" if residual == 0.0 else "FAIL"
    return CheckResult(
        rule_name="grade_cancellation",
        level=level,
        summary=f"max |Str(X^{power})| = {residual:.3e} for d={dim}",
        metrics={"max_supertrace": residual},
    )


def run_checks(results: List[CheckResult]) -> Tuple[List[CheckResult], str]:
    overall = "PASS"
    for result in results:
        if _LEVEL_ORDER[result.level] > _LEVEL_ORDER[overall]:
            overall = result.level
    return results, overall
