import logging
import sys
from argparse import ArgumentParser, Namespace
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from pathlib import Path
from typing import Any

from tqdm import tqdm
from ..config.base import (
    ConfigError,
    DimensionError,
    FormatError,
    InvalidInputError,
    NonConvergenceError,
    UsageError,
)
from ..config.enums import ExperimentKind
from ..config.experiment import ExperimentConfig, apply_overrides, load_config
from ..utils.logs import setup_logging
from .experiments import TrialRow, run_trial
from .report import write_summary_json, write_trials_csv

logger = logging.getLogger(__name__)

PROG = "rebasin-kit"
EXIT_ERROR = 2

# Errors that describe bad input rather than a bug; reported without a traceback
USER_ERRORS = (
    ConfigError,
    DimensionError,
    FormatError,
    InvalidInputError,
    NonConvergenceError,
    UsageError,
)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog=PROG, description="Neural network re-basin experiments")
    _ = parser.add_argument("experiment", choices=[kind.value for kind in ExperimentKind])
    _ = parser.add_argument("--config", type=Path, help="YAML or JSON experiment config")
    _ = parser.add_argument("--seed", type=int, help="base seed (trial r uses seed + r)")
    _ = parser.add_argument("--runs", type=int, help="number of independent trials")
    _ = parser.add_argument("--out", type=Path, help="output directory")
    _ = parser.add_argument("--workers", type=int, help="parallel trial processes")
    _ = parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key, e.g. --set rebasin.optim.learning_rate=0.05",
    )
    _ = parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args: Namespace) -> ExperimentConfig:
    raw: dict[str, Any] = load_config(args.config) if args.config is not None else {}
    raw = apply_overrides(raw, args.overrides)
    raw["experiment"] = args.experiment
    for key, value in (
        ("seed", args.seed),
        ("runs", args.runs),
        ("out_dir", None if args.out is None else str(args.out)),
        ("workers", args.workers),
    ):
        if value is not None:
            raw[key] = value
    return ExperimentConfig.from_dict(raw)


def run_experiment(cfg: ExperimentConfig) -> list[TrialRow]:
    """Run every trial, then write trials.csv and summary.json in trial order."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials = range(cfg.runs)
    desc = f"{cfg.experiment.value} trials"

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = pool.map(run_trial, repeat(cfg), trials, repeat(out_dir))
            rows = list(tqdm(results, total=cfg.runs, desc=desc, disable=None))
    else:
        rows = [run_trial(cfg, trial, out_dir) for trial in tqdm(trials, desc=desc, disable=None)]

    write_trials_csv(out_dir / "trials.csv", rows)
    summary = write_summary_json(out_dir / "summary.json", rows, cfg.to_dict())
    for metric, stats in summary["metrics"].items():
        logger.info("%s: %.6g +- %.6g", metric, stats["mean"], stats["sd"])
    return rows


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        cfg = resolve_config(args)
        _ = run_experiment(cfg)
    except USER_ERRORS as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return 0
