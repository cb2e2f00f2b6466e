"""Command line verification runs for the Chen-series and local index library."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from core import (
    ChenIndexError,
    MatrixModel,
    ResultStore,
    RunConfig,
    a_genus_top,
    chen_identity_check,
    chen_identity_residual,
    convergence_order_check,
    convergence_study,
    grade_cancellation_check,
    grade_cancellation_residual,
    local_index_check,
    moment_agreement_check,
    moment_table,
    monte_carlo_moments,
    parse_curvature_spec,
    run_checks,
    sample_brownian,
    verify_local_index,
)
from core.errors import DimensionError
from core.index_density import form_prefactor
from core.store import dumps
from core.utils import THREADS_ENV, default_workers

logger = logging.getLogger("verify_cli")

DEFAULT_CONFIG = Path(__file__).resolve().parent / "config" / "defaults.json"
STOCHASTIC = {"verify-chen", "converge", "index-density"}


def load_defaults(config_path: Path) -> dict:
    with open(config_path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _pick(value, section: Dict, key: str, fallback):
    return value if value is not None else section.get(key, fallback)


def resolve_config(args: argparse.Namespace, defaults: Dict) -> RunConfig:
    section = defaults.get(args.command.replace("-", "_"), {})
    general = defaults.get("general", {})
    if args.workers is not None:
        workers = args.workers
    elif THREADS_ENV in os.environ:
        workers = default_workers()
    else:
        workers = general.get("workers", 1)
    extra: Dict[str, object] = {"batch_size": general.get("batch_size", 2048)}
    config = RunConfig(
        subcommand=args.command,
        dim=_pick(getattr(args, "dim", None), section, "dim", 2),
        truncation=_pick(getattr(args, "N", None), section, "N", None),
        samples=_pick(getattr(args, "samples", None), section, "samples", None),
        grid_level=_pick(getattr(args, "grid", None), section, "grid", None),
        seed=getattr(args, "seed", None),
        curvature=_pick(getattr(args, "curvature", None), section, "curvature", None),
        output_dir=args.output_dir,
        output_format="csv",
        workers=max(1, int(workers)),
        extra=extra,
    )
    if args.command == "verify-chen":
        extra["seeds"] = _pick(args.seeds, section, "seeds", 1)
        extra["tolerance"] = section.get("tolerance", 1e-10)
    elif args.command == "moments":
        extra["t"] = _pick(args.t, section, "t", 1.0)
        extra["max_length"] = _pick(args.max_length, section, "max_length", None)
        config.samples = _pick(args.mc_samples, section, "mc_samples", 0)
        if config.samples and config.seed is None:
            raise DimensionError("a Monte-Carlo moment sweep needs --seed")
    elif args.command == "converge":
        extra["size"] = _pick(args.size, section, "size", 4)
        extra["tmin"] = _pick(args.tmin, section, "tmin", 2.0 ** -8)
        extra["tmax"] = _pick(args.tmax, section, "tmax", 0.25)
        extra["antithetic"] = section.get("antithetic", True) and not args.no_antithetic
        extra["control_variate"] = section.get("control_variate", True) and not args.no_control_variate
    elif args.command == "index-density":
        extra["sigma"] = section.get("sigma", 3.0)
        extra["bias_allowance"] = section.get("bias_allowance", 0.02)
        extra["grade_samples"] = section.get("grade_samples", 256)
    if args.command in STOCHASTIC and config.seed is None:
        raise DimensionError(f"{args.command} needs --seed")
    return config


def geometric_times(tmax: float, tmin: float) -> List[float]:
    if not (0 < tmin <= tmax):
        raise DimensionError(f"need 0 < tmin <= tmax, got tmin={tmin}, tmax={tmax}")
    count = int(math.floor(math.log2(tmax / tmin) + 1e-9)) + 1
    return [tmax / 2 ** k for k in range(count)]


def _csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


class Runner:
    """Executes one resolved configuration and writes its artifacts."""

    def __init__(self, config: RunConfig, thresholds: Dict) -> None:
        self.config = config
        self.thresholds = thresholds
        self.store = ResultStore(config.output_dir) if config.output_dir else None

    def run(self) -> int:
        handler = {
            "verify-chen": self.verify_chen,
            "moments": self.moments,
            "converge": self.converge,
            "agenus": self.agenus,
            "index-density": self.index_density,
        }[self.config.subcommand]
        return handler()

    def _finish(self, name: str, payload: Dict, checks=None, table: Optional[pd.DataFrame] = None) -> int:
        status = 0
        if checks:
            results, overall = run_checks(checks)
            payload["checks"] = [result.as_dict() for result in results]
            payload["overall"] = overall
            status = 1 if overall == "FAIL" else 0
        payload["config"] = self.config.as_dict()
        if self.store:
            if table is not None:
                self.store.save_table(name, table)
            self.store.save_summary(name, payload)
        return status

    def verify_chen(self) -> int:
        cfg = self.config
        first = int(cfg.seed)
        rows = []
        for seed in range(first, first + int(cfg.extra["seeds"])):
            path = sample_brownian(cfg.dim, 1.0, cfg.grid_level, np.random.default_rng(seed))
            residual = chen_identity_residual(path, cfg.truncation)
            logger.info("seed %d: discrepancy %.3e", seed, residual)
            rows.append({"seed": seed, "max_discrepancy": residual})
        table = pd.DataFrame(rows, columns=["seed", "max_discrepancy"])
        check = chen_identity_check(table["max_discrepancy"].tolist(), self.thresholds)
        print(f"max coefficient discrepancy: {table['max_discrepancy'].max():.3e}")
        print(f"{check.level}: {check.summary}")
        return self._finish("verify_chen", {"max_discrepancy": float(table["max_discrepancy"].max())}, [check], table)

    def moments(self) -> int:
        cfg = self.config
        t = float(cfg.extra["t"])
        max_length = cfg.extra["max_length"]
        if cfg.samples:
            rng = np.random.default_rng(cfg.seed)
            frame = monte_carlo_moments(
                cfg.dim,
                cfg.truncation,
                t,
                cfg.samples,
                cfg.grid_level,
                rng,
                workers=cfg.workers,
                batch_size=int(cfg.extra["batch_size"]),
                max_length=max_length,
            )
            checks = [moment_agreement_check(frame, self.thresholds)]
        else:
            frame = moment_table(cfg.dim, cfg.truncation, t, max_length).to_frame()
            checks = None
        sys.stdout.write(_csv(frame))
        payload = {"words": len(frame), "t": t, "max_length": max_length}
        return self._finish("moments", payload, checks, frame)

    def converge(self) -> int:
        cfg = self.config
        model_rng, sample_rng = np.random.default_rng(cfg.seed).spawn(2)
        model = MatrixModel.random(cfg.dim, int(cfg.extra["size"]), model_rng)
        times = geometric_times(float(cfg.extra["tmax"]), float(cfg.extra["tmin"]))
        report = convergence_study(
            model,
            cfg.truncation,
            times,
            cfg.samples,
            sample_rng,
            L=cfg.grid_level,
            antithetic=bool(cfg.extra["antithetic"]),
            control_variate=bool(cfg.extra["control_variate"]),
            workers=cfg.workers,
        )
        frame = report.to_frame()
        check = convergence_order_check(report, self.thresholds)
        payload = report.as_dict()
        status = self._finish("converge", payload, [check], frame)
        sys.stdout.write(_csv(frame[["t", "error", "stderr"]]))
        sys.stdout.write(dumps({key: payload[key] for key in ("N", "target_order", "fitted_order", "taylor_order", "overall")}))
        return status

    def agenus(self) -> int:
        cfg = self.config
        curvature = parse_curvature_spec(cfg.curvature, cfg.dim)
        top = a_genus_top(curvature)
        density = form_prefactor(cfg.dim) * top
        payload = {
            "dim": cfg.dim,
            "curvature": cfg.curvature,
            "agenus_top": {"re": top.real, "im": top.imag},
            "density": {"re": density.real, "im": density.imag},
        }
        sys.stdout.write(dumps(payload))
        return self._finish("agenus", payload)

    def index_density(self) -> int:
        cfg = self.config
        curvature = parse_curvature_spec(cfg.curvature, cfg.dim)
        rng = np.random.default_rng(cfg.seed)
        report = verify_local_index(
            curvature,
            samples=cfg.samples,
            L=cfg.grid_level,
            rng=rng,
            sigma=float(cfg.extra["sigma"]),
            bias_allowance=float(cfg.extra["bias_allowance"]),
            workers=cfg.workers,
            batch_size=int(cfg.extra["batch_size"]),
        )
        checks = [local_index_check(report, self.thresholds)]
        # powers below d/2 must leave no top-degree part, sample by sample
        for power in range(1, cfg.dim // 2):
            residual = grade_cancellation_residual(
                curvature, power, int(cfg.extra["grade_samples"]), cfg.grid_level, rng, workers=cfg.workers
            )
            checks.append(grade_cancellation_check(residual, power, cfg.dim))
        payload = report.as_dict()
        payload["curvature"] = cfg.curvature
        status = self._finish("index_density", payload, checks)
        sys.stdout.write(dumps(payload))
        return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Verify Chen-series heat approximations and the local index density")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG), help="Path to the defaults JSON configuration")
    parser.add_argument("--out", dest="output_dir", default=None, help="Directory for CSV/JSON artifacts")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output")
    parser.add_argument("--workers", type=int, default=None, help=f"Worker threads (default ${THREADS_ENV} or 1)")
    commands = parser.add_subparsers(dest="command", required=True)

    chen = commands.add_parser("verify-chen", help="Check exp of the Chen series against the path signature")
    chen.add_argument("--dim", type=int)
    chen.add_argument("--N", type=int)
    chen.add_argument("--grid", type=int)
    chen.add_argument("--seed", type=int)
    chen.add_argument("--seeds", type=int, help="Number of consecutive seeds to sweep")

    moments = commands.add_parser("moments", help="Expectations of iterated Stratonovich integrals as CSV")
    moments.add_argument("--dim", type=int)
    moments.add_argument("--N", type=int)
    moments.add_argument("--t", type=float)
    moments.add_argument("--max-length", dest="max_length", type=int, help="Select words by letter count instead of degree")
    moments.add_argument("--mc-samples", dest="mc_samples", type=int, help="Add Monte-Carlo columns")
    moments.add_argument("--grid", type=int)
    moments.add_argument("--seed", type=int)

    converge = commands.add_parser("converge", help="Convergence order of the approximants in a matrix model")
    converge.add_argument("--dim", type=int)
    converge.add_argument("--size", type=int)
    converge.add_argument("--N", type=int)
    converge.add_argument("--seed", type=int)
    converge.add_argument("--samples", type=int)
    converge.add_argument("--tmin", type=float)
    converge.add_argument("--tmax", type=float)
    converge.add_argument("--grid", type=int)
    converge.add_argument("--no-antithetic", action="store_true")
    converge.add_argument("--no-control-variate", action="store_true")

    agenus = commands.add_parser("agenus", help="Top coefficient of the A-hat form")
    agenus.add_argument("--dim", type=int)
    agenus.add_argument("--curvature")

    density = commands.add_parser("index-density", help="Monte-Carlo local index density against A-hat")
    density.add_argument("--dim", type=int)
    density.add_argument("--curvature")
    density.add_argument("--samples", type=int)
    density.add_argument("--grid", type=int)
    density.add_argument("--seed", type=int)
    return parser


def main(argv: List[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    config_path = Path(args.config)
    if not config_path.exists():
        parser.exit(2, f"error: configuration {config_path} does not exist\n")
    defaults = load_defaults(config_path)
    try:
        config = resolve_config(args, defaults)
        return Runner(config, defaults).run()
    except ChenIndexError as exc:
        parser.exit(2, f"error: {exc}\n")


if __name__ == "__main__":
    raise SystemExit(main())
