#!/usr/bin/env python3
"""
    CLI tool to generate synthetic graph tasks and run transfer experiments
"""

import argparse
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Optional

import yaml

from .checks import DEFAULT_SUITE, get_checks, run_suite
from .config import ExperimentConfig, GenerateConfig, load_config
from .exceptions import (
    DegenerateSampleException,
    GnnTransferException,
    InvalidConfigException,
    NumericException,
    UndefinedMetricException,
)
from .experiment import (
    REPORT_COLUMNS,
    SWEEP_PARAMETERS,
    ExperimentDir,
    generate,
    load_metrics,
    pretrain,
    report,
    run_transfer,
    sweep,
    write_sweep,
)
from .storage import load_dataset

EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_DEGENERATE = 3


def exit_code(exc: GnnTransferException) -> int:
    if isinstance(exc, DegenerateSampleException):
        return EXIT_DEGENERATE
    if isinstance(exc, (NumericException, UndefinedMetricException)):
        return EXIT_NUMERIC
    return EXIT_INPUT


def show_mapping(content: dict[str, Any]) -> None:
    print(yaml.safe_dump(content, sort_keys=False).rstrip())


def action_generate(
    config_path: Optional[Path],
    preset: Optional[int],
    output: Optional[Path],
    seed: Optional[int],
    calibrate: bool,
) -> None:
    if config_path is not None:
        config = load_config(config_path, GenerateConfig)
    elif output is not None:
        config = GenerateConfig(
            output=output, preset=preset, seed=seed, calibrate=calibrate
        )
    else:
        raise InvalidConfigException(
            "generate needs a config file or an output directory"
        )
    show_mapping(generate(config))


def action_pretrain(config_path: Path) -> None:
    checkpoint = pretrain(load_config(config_path, ExperimentConfig))
    print(checkpoint)


def action_transfer(config_path: Path) -> None:
    experiment = run_transfer(load_config(config_path, ExperimentConfig))
    print(experiment)
    for run in experiment:
        metrics = ", ".join(f"{k}={v:.4f}" for k, v in run.metrics.as_dict().items())
        print(f" - {run.root.name}: {metrics}")


def _format(value: Any) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.4f}"
    return str(value)


def action_report(
    experiment_paths: Sequence[Path],
    control_path: Optional[Path],
    output: Path,
    alpha: Optional[float],
) -> None:
    experiments = [ExperimentDir(x) for x in experiment_paths]
    if control_path is None:
        control_path = experiments[0].config.control
    control = ExperimentDir(control_path) if control_path is not None else None
    if alpha is None:
        alpha = experiments[0].config.alpha
    rows, written = report(experiments, output, control, alpha)
    print(" ".join(REPORT_COLUMNS))
    for row in rows:
        print(" ".join(_format(getattr(row, x)) for x in REPORT_COLUMNS))
    for path in written:
        print(f"wrote {path}")


def action_metrics(dataset_path: Path) -> None:
    show_mapping(load_metrics(dataset_path))


def action_sweep(
    parameter: str, values: Sequence[float], seeds: int, output: Path
) -> None:
    rows = sweep(parameter, values, range(seeds))
    for value, mean, std in rows:
        print(f"{parameter}={value}: {mean:.4f} +- {std:.4f}")
    for path in write_sweep(output, parameter, rows):
        print(f"wrote {path}")


def action_check(suite: str, *dataset_paths: Path) -> None:
    datasets = [load_dataset(x) for x in dataset_paths]
    for result in run_suite(datasets, suite_name=suite):
        print(result)


def action_check_list(suite: str) -> None:
    for check_type_name, checks in get_checks(suite).items():
        print(f"{check_type_name} checks:")
        for check in checks:
            display_name = check.__name__.removeprefix("check_")
            print(f" - {display_name}: {check.__doc__}")


def main() -> None:
    main_parser = argparse.ArgumentParser(
        description="Synthetic graph tasks and GNN transfer experiments",
    )
    main_parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="increase log verbosity"
    )
    main_subparsers = main_parser.add_subparsers(dest="action")

    # generate
    generate_parser = main_subparsers.add_parser(
        "generate",
        help="generate a synthetic dataset and measure its community structure",
    )
    generate_parser.add_argument(
        "config", nargs="?", type=Path, help="generation config file"
    )
    generate_parser.add_argument(
        "-p", "--preset", type=int, help="configuration preset (1-8)"
    )
    generate_parser.add_argument("-o", "--output", type=Path, help="dataset directory")
    generate_parser.add_argument("-s", "--seed", type=int, help="generator seed")
    generate_parser.add_argument(
        "--no-calibrate", action="store_true", help="skip node config calibration"
    )

    # pretrain
    pretrain_parser = main_subparsers.add_parser(
        "pretrain", help="train a source model and save its checkpoint"
    )
    pretrain_parser.add_argument("config", type=Path, help="experiment config file")

    # transfer
    transfer_parser = main_subparsers.add_parser(
        "transfer", help="run paired base and transfer runs on a target task"
    )
    transfer_parser.add_argument("config", type=Path, help="experiment config file")

    # report
    report_parser = main_subparsers.add_parser(
        "report", help="aggregate experiments into a CSV table and SVG charts"
    )
    report_parser.add_argument(
        "experiment", nargs="+", type=Path, help="experiment directories"
    )
    report_parser.add_argument(
        "-c", "--control", type=Path, help="control experiment directory"
    )
    report_parser.add_argument("-o", "--output", type=Path, default=Path("report"))
    report_parser.add_argument("-a", "--alpha", type=float, help="significance level")

    # metrics
    metrics_parser = main_subparsers.add_parser(
        "metrics", help="community metrics of a dataset"
    )
    metrics_parser.add_argument("dataset", type=Path, help="dataset directory")

    # sweep
    sweep_parser = main_subparsers.add_parser(
        "sweep", help="measure a generator parameter against community structure"
    )
    sweep_parser.add_argument("parameter", choices=SWEEP_PARAMETERS)
    sweep_parser.add_argument("values", nargs="+", type=float)
    sweep_parser.add_argument(
        "-n", "--seeds", type=int, default=10, help="seeds per value"
    )
    sweep_parser.add_argument("-o", "--output", type=Path, default=Path("sweep"))

    # check
    check_parser = main_subparsers.add_parser(
        "check", help="check validity of datasets"
    )
    check_parser.add_argument(
        "-s", "--suite", default=DEFAULT_SUITE, help="check suite to use"
    )
    check_parser.add_argument(
        "-l", "--list", action="store_true", help="list available checks"
    )
    check_parser.add_argument(
        "dataset", nargs="*", type=Path, help="dataset directories"
    )

    args = main_parser.parse_args()

    verbosity = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO}
    log = logging.getLogger(__package__)
    log.setLevel(verbosity.get(args.verbose, logging.DEBUG))
    handler = logging.StreamHandler()
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(name)-12s %(levelname)-8s %(message)s")
    )
    log.addHandler(handler)

    try:
        if args.action == "generate":
            action_generate(
                args.config, args.preset, args.output, args.seed, not args.no_calibrate
            )
        elif args.action == "pretrain":
            action_pretrain(args.config)
        elif args.action == "transfer":
            action_transfer(args.config)
        elif args.action == "report":
            action_report(args.experiment, args.control, args.output, args.alpha)
        elif args.action == "metrics":
            action_metrics(args.dataset)
        elif args.action == "sweep":
            action_sweep(args.parameter, args.values, args.seeds, args.output)
        elif args.action == "check":
            if args.list:
                action_check_list(args.suite)
            else:
                action_check(args.suite, *args.dataset)
        else:
            main_parser.print_help()
    except GnnTransferException as exc:
        print(f"{exc.__class__.__name__}: {exc}", file=sys.stderr)
        sys.exit(exit_code(exc))


if __name__ == "__main__":  # pragma: no cover
    main()
