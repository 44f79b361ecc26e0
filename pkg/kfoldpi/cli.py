"""Command-line entry point: ``kfoldpi simulate``, ``kfoldpi analyze`` and ``kfoldpi selftest``"""

import argparse
import logging
import os
import platform
import sys
from datetime import datetime
from typing import List, Optional

import matplotlib
import numpy as np
import polars as pl
import pyarrow as pa

from kfoldpi import __version__
from kfoldpi.config import RunConfig, config_to_dict, resolve_config
from kfoldpi.data import RECORDS_SCHEMA_VERSION, load_manifest, write_file
from kfoldpi.exceptions import ConfigError, KfoldpiError, MissingBaseline
from kfoldpi.inference.conformal import KFOLD_CENTERS, IntervalOptions
from kfoldpi.inference.harness import BASELINE, Aggregator, RealDataRunner, SimulationRunner
from kfoldpi.inference.mlp import ACTIVATIONS
from kfoldpi.inference.report import ReportWriter
from kfoldpi.pipeline import Pipeline
from kfoldpi.selftest import run_selftest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2
_NN_FLAGS = ("hidden_layers", "activation", "learning_rate", "batch_size", "iterations")


def _check_baseline(config: RunConfig) -> None:
    if config.ratios is True and BASELINE not in [method.label for method in config.methods]:
        raise MissingBaseline(
            f"--ratios needs {BASELINE} among the methods as the width baseline; add sc to "
            "--methods or drop --ratios."
        )


def _write_meta(config: RunConfig, pipeline: Pipeline, failures: List[str]) -> None:
    meta = {
        "schema_version": RECORDS_SCHEMA_VERSION,
        "created": datetime.now().isoformat(timespec="seconds"),
        "seed": config.seed,
        "config": config_to_dict(config),
        "pipeline": pipeline.get_parameters(),
        "failures": failures,
        "versions": {
            "kfoldpi": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "polars": pl.__version__,
            "pyarrow": pa.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }
    write_file(meta, os.path.join(config.out_dir, "meta.json"), "json")


def _options(config: RunConfig) -> IntervalOptions:
    return IntervalOptions(config.signed_quantiles, config.kfold_center)


def cmd_simulate(config: RunConfig) -> int:
    """Run the simulation scenarios and write the report bundle to ``config.out_dir``

    Returns 0 on success, 1 if any cell failed (partial results are still written) and 2
    on configuration errors.
    """
    try:
        _check_baseline(config)
    except MissingBaseline as error:
        logger.error(str(error))
        return EXIT_USAGE
    os.makedirs(config.out_dir, exist_ok=True)
    logger.info(
        f"Simulating {len(config.scenarios)} scenario(s) with seed {config.seed}; "
        f"writing to {config.out_dir}"
    )

    pipeline = Pipeline(write_path=config.out_dir)
    pipeline.add_step(
        SimulationRunner(
            config.scenarios,
            config.methods,
            config.nn,
            master_seed=config.seed,
            alpha=config.alpha,
            options=_options(config),
            workers=config.workers,
            record_timings=config.record_timings,
        )
    )
    pipeline.add_step(Aggregator(ratios=config.ratios))
    pipeline.add_step(ReportWriter(nominal_coverage=1.0 - config.alpha))
    try:
        pipeline.run_pipeline()
    except MissingBaseline as error:
        logger.error(str(error))
        return EXIT_USAGE

    failures = [str(failure) for failure in pipeline.artifacts.get("failures", [])]
    _write_meta(config, pipeline, failures)
    if failures:
        logger.error(f"{len(failures)} cell(s) failed; see meta.json for the list.")
        return EXIT_FAILURES
    return EXIT_OK


def cmd_analyze(config: RunConfig) -> int:
    """Run the repeated cross-validation protocol on every manifest dataset

    A dataset that cannot be loaded is skipped with an error and the others proceed;
    the exit code is then 1.
    """
    try:
        _check_baseline(config)
        entries = load_manifest(config.manifest)
    except (MissingBaseline, OSError, ValueError) as error:
        logger.error(str(error))
        return EXIT_USAGE
    os.makedirs(config.out_dir, exist_ok=True)
    logger.info(f"Analyzing {len(entries)} dataset(s) with seed {config.seed}")

    labels = [method.label for method in config.methods]
    pipeline = Pipeline(write_path=config.out_dir)
    pipeline.add_step(
        RealDataRunner(
            entries,
            config.methods,
            config.nn,
            master_seed=config.seed,
            outer_folds=config.outer_folds,
            repeats=config.repeats,
            alpha=config.alpha,
            options=_options(config),
            workers=config.workers,
            record_timings=config.record_timings,
        )
    )
    pipeline.add_step(Aggregator(ratios=config.ratios))
    pipeline.add_step(
        ReportWriter(
            nominal_coverage=1.0 - config.alpha,
            scatter_method="k5" if "k5" in labels else None,
        )
    )
    try:
        pipeline.run_pipeline()
    except MissingBaseline as error:
        logger.error(str(error))
        return EXIT_USAGE

    failures = [str(failure) for failure in pipeline.artifacts.get("failures", [])]
    failures += [
        f"Dataset {failure['dataset']}: {failure['error']}"
        for failure in pipeline.artifacts.get("dataset_failures", [])
    ]
    _write_meta(config, pipeline, failures)
    if failures:
        logger.error(f"{len(failures)} failure(s); see meta.json for the list.")
        return EXIT_FAILURES
    return EXIT_OK


def cmd_selftest() -> int:
    """Run the oracle suites, print one PASS/FAIL line per suite, 0 iff all pass"""
    results = run_selftest()
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name}  ({result.seconds:.1f}s)  {result.detail}")
    passed = all(result.passed for result in results)
    print("selftest passed" if passed else "selftest FAILED")
    return EXIT_OK if passed else EXIT_FAILURES


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--seed", type=int, help="master seed (default 42)")
    parser.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")
    parser.add_argument("--methods", help="comma-separated methods, e.g. sc,k2,k5,k10")
    parser.add_argument("--alpha", type=float, help="miscoverage level (default 0.1)")
    parser.add_argument(
        "--paper-defaults",
        dest="paper_defaults",
        action="store_true",
        help="use the study's network recipe, ignoring network settings of --config",
    )
    parser.add_argument(
        "--signed-quantiles",
        dest="signed_quantiles",
        action="store_true",
        default=None,
        help="two-sided intervals from signed residual quantiles",
    )
    parser.add_argument("--kfold-center", dest="kfold_center", choices=KFOLD_CENTERS)
    parser.add_argument(
        "--ratios",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="compute log2 width ratios against SC (default: when SC is run)",
    )
    parser.add_argument(
        "--record-timings",
        dest="record_timings",
        action="store_true",
        default=None,
        help="write measured runtimes to records.csv (makes the file non-deterministic)",
    )
    parser.add_argument("--log-level", dest="log_level", default=None)
    nn = parser.add_argument_group("network")
    nn.add_argument("--hidden-layers", dest="hidden_layers", type=_int_list)
    nn.add_argument("--activation", choices=ACTIVATIONS)
    nn.add_argument("--learning-rate", dest="learning_rate", type=float)
    nn.add_argument("--batch-size", dest="batch_size", type=int)
    nn.add_argument("--iterations", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kfoldpi",
        description="Split conformal and k-fold conformal prediction intervals for "
        "neural-network regression.",
    )
    parser.add_argument("--version", action="version", version=f"kfoldpi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run the simulation study")
    _add_common_arguments(simulate)
    simulate.add_argument(
        "--scenarios", help="comma-separated mean:error:n scenarios (default: all 27)"
    )
    simulate.add_argument("--replicates", type=int, help="datasets per scenario (default 50)")
    simulate.add_argument("--n-test", dest="n_test", type=int, help="test points (default 500)")
    simulate.add_argument("--rho", type=float, help="AR(1) predictor correlation (default 0.6)")
    simulate.add_argument(
        "--het-as-sd",
        dest="het_as_sd",
        action="store_true",
        default=None,
        help="read the heteroscedastic scale as a standard deviation",
    )

    analyze = sub.add_parser("analyze", help="run repeated cross validation on real data")
    _add_common_arguments(analyze)
    analyze.add_argument("--manifest", help="JSON manifest of the datasets")
    analyze.add_argument("--outer-folds", dest="outer_folds", type=int, help="default 5")
    analyze.add_argument("--repeats", type=int, help="default 20")

    sub.add_parser("selftest", help="run the fast oracle suites")
    return parser


def _flag_settings(args: argparse.Namespace) -> dict:
    flags = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config", "paper_defaults") and value is not None
    }
    nn = {key: flags.pop(key) for key in list(flags) if key in _NN_FLAGS}
    if nn:
        flags["nn"] = nn
    return flags


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=getattr(logging, level.upper(), logging.INFO),
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        _configure_logging("INFO")
        return cmd_selftest()

    _configure_logging(args.log_level or "INFO")
    try:
        config = resolve_config(
            args.command, args.config, _flag_settings(args), args.paper_defaults
        )
    except ConfigError as error:
        logger.error(str(error))
        return EXIT_USAGE
    _configure_logging(config.log_level)

    try:
        if args.command == "simulate":
            return cmd_simulate(config)
        return cmd_analyze(config)
    except KfoldpiError as error:
        logger.error(str(error))
        return EXIT_FAILURES


if __name__ == "__main__":
    sys.exit(main())
