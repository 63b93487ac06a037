"""
    Orchestration of dataset generation, pretraining and transfer experiments

A transfer experiment directory looks like:

    config.yaml                  the resolved ExperimentConfig
    transfer_metrics.csv         run,transfer_ratio,jumpstart,asymptotic
    run-000/
        metrics.csv              transfer metrics of this run
        base/curves.csv          run,epoch,split,metric,value
        base/checkpoint/
        transfer/curves.csv
        transfer/checkpoint/
        source/...               only when the source is pretrained per run
"""

import csv
import logging
import math
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .checks import run_suite
from .community import (
    attribute_within_inertia,
    community_report,
    structural_within_inertia,
)
from .config import ExperimentConfig, GenerateConfig
from .evaluation import (
    METRIC_NAMES,
    LearningCurve,
    TransferMetrics,
    transfer_metrics,
    welch_t_greater,
)
from .exceptions import (
    AggregationException,
    DegenerateSampleException,
    InvalidConfigException,
    InvalidDatasetException,
    InvalidInputException,
    ProtocolException,
)
from .graph import GraphDataset, damage_features, degrees, permute_labels, split_halves
from .layers import GnnModel, freeze_feature_layers, reinit_output_layer
from .plotting import plot_curves, plot_sweep
from .rng import derive_seed, make_rng
from .storage import load_dataset, save_dataset
from .synth import (
    GraphGenConfig,
    barabasi_albert,
    config_from_dict,
    generate_graph_dataset,
    preset,
)
from .synth import generate as generate_dataset
from .training import Dataset, RunRecord, output_dim, task_of, timed_train
from .utils import dump_yaml, load_yaml

log = logging.getLogger(__name__)

CURVES_FILE = "curves.csv"
METRICS_FILE = "metrics.csv"
CONFIG_FILE = "config.yaml"
SIDECAR_FILE = "generation.yaml"
CHECKPOINT_DIR = "checkpoint"
CURVE_COLUMNS = ["run", "epoch", "split", "metric", "value"]
BASE = "base"
TRANSFER = "transfer"
SOURCE = "source"


def write_curves(path: Path, run_id: int, curves: dict[str, LearningCurve]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(CURVE_COLUMNS)
        for split, curve in curves.items():
            for epoch, score in zip(curve.epochs.tolist(), curve.scores.tolist()):
                writer.writerow([run_id, int(epoch), split, curve.metric, repr(score)])


def read_curves(path: Path) -> dict[str, LearningCurve]:
    """
    :return: The learning curve of every split recorded in a curves.csv file
    """
    points: dict[str, list[tuple[float, float]]] = {}
    metrics: dict[str, str] = {}
    try:
        csv_file = path.open("r", newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise InvalidDatasetException(f"{path}: missing file") from exc
    with csv_file:
        reader = csv.DictReader(csv_file)
        if reader.fieldnames != CURVE_COLUMNS:
            raise InvalidDatasetException(
                f"{path}:1: unexpected header {reader.fieldnames}"
            )
        for row in reader:
            try:
                point = (float(row["epoch"]), float(row["value"]))
            except (TypeError, ValueError) as exc:
                raise InvalidDatasetException(
                    f"{path}:{reader.line_num}: malformed row"
                ) from exc
            points.setdefault(row["split"], []).append(point)
            metrics[row["split"]] = row["metric"]
    return {
        split: LearningCurve.from_points(x, metrics[split])
        for split, x in points.items()
    }


def _write_metrics(path: Path, rows: Sequence[tuple[int, TransferMetrics]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(["run", *METRIC_NAMES])
        for run_id, metrics in rows:
            writer.writerow([run_id, *(repr(x) for x in metrics.as_dict().values())])


def _read_metrics(path: Path) -> list[tuple[int, TransferMetrics]]:
    result = []
    try:
        csv_file = path.open("r", newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise InvalidDatasetException(f"{path}: missing file") from exc
    with csv_file:
        for row in csv.DictReader(csv_file):
            try:
                result.append(
                    (
                        int(row["run"]),
                        TransferMetrics(**{x: float(row[x]) for x in METRIC_NAMES}),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidDatasetException(f"{path}: malformed metrics row") from exc
    return result


class RunDir:
    """
    One paired run of a transfer experiment
    """

    PREFIX = "run-"

    def __init__(
        self, run_path: Union[str, Path], experiment: Optional["ExperimentDir"] = None
    ):
        log.debug("Loading run at %s", run_path)
        self._run_path = Path(run_path).resolve()
        if not self.probe(self._run_path):
            raise InvalidDatasetException(
                f"Not a valid run directory: {self._run_path}"
            )
        self.run_id = int(self._run_path.name.removeprefix(self.PREFIX))
        self._parent = experiment

    @classmethod
    def probe(cls, path: Path) -> bool:
        """
        :return: True if path looks like a run directory
        """
        return (
            path.is_dir()
            and path.name.startswith(cls.PREFIX)
            and path.name.removeprefix(cls.PREFIX).isdigit()
            and (path / BASE / CURVES_FILE).is_file()
        )

    @classmethod
    def name_for(cls, run_id: int) -> str:
        return f"{cls.PREFIX}{run_id:03d}"

    @property
    def root(self) -> Path:
        return self._run_path

    def arms(self) -> list[str]:
        return [
            x
            for x in (BASE, TRANSFER, SOURCE)
            if (self._run_path / x / CURVES_FILE).is_file()
        ]

    def curves(self, arm: str) -> dict[str, LearningCurve]:
        return read_curves(self._run_path / arm / CURVES_FILE)

    @cached_property
    def metrics(self) -> TransferMetrics:
        rows = _read_metrics(self._run_path / METRICS_FILE)
        if len(rows) != 1:
            raise InvalidDatasetException(
                f"{self._run_path / METRICS_FILE}: expected one row"
            )
        return rows[0][1]

    def checkpoint(self, arm: str) -> Path:
        return self._run_path / arm / CHECKPOINT_DIR

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, self.__class__):
            return False
        return self._run_path == other._run_path

    def __ne__(self, other: Any) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash(self._run_path)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._run_path.parent.name}/{self._run_path.name})"


class ExperimentDir:
    """
    The output directory of a transfer experiment
    """

    _run_cache: dict[int, RunDir]

    def __init__(self, experiment_path: Union[str, Path]):
        log.debug("Loading experiment at %s", experiment_path)
        self._experiment_path = Path(experiment_path).resolve()
        if not self.probe(self._experiment_path):
            raise InvalidDatasetException(
                f"Not a valid experiment directory: {self._experiment_path}"
            )
        self._run_cache = {}

    @classmethod
    def probe(cls, path: Path) -> bool:
        """
        :return: True if path looks like an experiment directory
        """
        return path.is_dir() and (path / CONFIG_FILE).is_file()

    @property
    def root(self) -> Path:
        return self._experiment_path

    @cached_property
    def config(self) -> ExperimentConfig:
        """
        :return: The configuration the experiment was run with
        """
        return ExperimentConfig.from_dict(
            load_yaml(self._experiment_path / CONFIG_FILE)
        )

    @property
    def name(self) -> str:
        return self.config.name

    def all_runs(self) -> Iterator[RunDir]:
        for run_path in sorted(self._experiment_path.iterdir()):
            if RunDir.probe(run_path):
                yield self.run(int(run_path.name.removeprefix(RunDir.PREFIX)))

    def run(self, run_id: int) -> RunDir:
        try:
            return self._run_cache[run_id]
        except KeyError:
            run = RunDir(self._experiment_path / RunDir.name_for(run_id), self)
            self._run_cache[run_id] = run
            return run

    def metric_values(self, metric: str) -> np.ndarray:
        """
        :return: The value of a transfer metric for every run
        """
        return np.array([getattr(x.metrics, metric) for x in self.all_runs()])

    def curves(self, arm: str, split: Optional[str] = None) -> list[LearningCurve]:
        """
        :return: The curve of every run for one arm and split

        Raises:
            AggregationException: if the runs were not evaluated on the same epochs
        """
        split = split or self.config.curve_split
        curves = []
        for run in self.all_runs():
            run_curves = run.curves(arm)
            if split not in run_curves:
                raise AggregationException(
                    f"{run} has no {split} curve for the {arm} arm"
                )
            curves.append(run_curves[split])
        for curve in curves[1:]:
            if not np.array_equal(curve.epochs, curves[0].epochs):
                raise AggregationException(
                    f"Runs of {self} were evaluated on different epochs"
                )
        return curves

    def __iter__(self) -> Iterator[RunDir]:
        yield from self.all_runs()

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, self.__class__):
            return False
        return self._experiment_path == other._experiment_path

    def __ne__(self, other: Any) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash(self._experiment_path)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._experiment_path})"


def _generator_config(config: GenerateConfig) -> Any:
    if config.preset is not None:
        gen_config = preset(config.preset)
        params = dict(config.params)
    else:
        gen_config = None
        params = {"kind": config.kind, **config.params}
    try:
        if gen_config is None:
            gen_config = config_from_dict(params)
        elif params:
            gen_config = config_from_dict({**gen_config.to_dict(), **params})
    except TypeError as exc:
        raise InvalidConfigException(f"Invalid generator parameters: {exc}") from exc
    if config.seed is not None:
        gen_config = replace(gen_config, seed=config.seed)
    return gen_config


def generate(config: GenerateConfig) -> dict[str, Any]:
    """
    Generate a dataset, save it and record the generator configuration and
    the measured community metrics in a sidecar file

    :return: the sidecar content
    """
    gen_config = _generator_config(config)
    dataset, gen_config = generate_dataset(gen_config, calibrate=config.calibrate)
    sidecar: dict[str, Any] = {
        "config": gen_config.to_dict(),
        "metrics": community_report(dataset),
    }
    if config.split_halves:
        if not isinstance(dataset, GraphDataset):
            raise InvalidConfigException("split_halves only applies to graph datasets")
        source, target = split_halves(dataset, make_rng(gen_config.seed, "halves"))
        save_dataset(config.output / SOURCE, source)
        save_dataset(config.output / "target", target)
        sidecar["halves"] = {
            SOURCE: community_report(source),
            "target": community_report(target),
        }
    else:
        save_dataset(config.output, dataset)
    dump_yaml(config.output / SIDECAR_FILE, sidecar)
    log.info("Generated %s in %s: %s", dataset, config.output, sidecar["metrics"])
    return sidecar


def require_valid(dataset: Dataset, origin: Path) -> None:
    """
    Raises:
        InvalidDatasetException: if any check of the default suite fails
    """
    results = sorted(run_suite([dataset]), reverse=True)
    for result in results:
        if not result.fatal:
            log.warning("%s: %s", origin, result)
    failures = [x.reason for x in results if x.fatal]
    if failures:
        raise InvalidDatasetException(f"{origin} failed checks: {'; '.join(failures)}")


def load_checked(path: Path, task: str) -> Dataset:
    """
    Load a dataset for training

    Raises:
        InvalidDatasetException: if any check of the default suite fails
        InvalidConfigException: if the dataset is not a `task` task
    """
    dataset = load_dataset(path)
    require_valid(dataset, path)
    if task_of(dataset) != task:
        raise InvalidConfigException(
            f"task: {path} holds a {task_of(dataset)} task, config says {task}"
        )
    return dataset


def prepare_source(
    dataset: Dataset, config: ExperimentConfig, rng: np.random.Generator
) -> Dataset:
    """
    Apply the source-side ablations of an experiment: feature damaging and
    label permutation
    """
    if config.damage_source:
        dataset = damage_features(dataset, rng)
    if config.permute_source_labels:
        dataset = permute_labels(dataset, rng)
    return dataset


def build_model(
    config: ExperimentConfig, dataset: Dataset, rng: np.random.Generator
) -> GnnModel:
    return GnnModel(
        kind=config.model,
        in_dim=dataset.num_features,
        hidden_dim=config.hidden_dim,
        out_dim=output_dim(dataset.num_classes),
        rng=rng,
        num_layers=config.num_layers,
        task=task_of(dataset),
        dropout_p=config.dropout,
        use_batch_norm=config.batch_norm,
    )


def _train_arm(
    model: GnnModel,
    dataset: Dataset,
    config: ExperimentConfig,
    rng: np.random.Generator,
    run_id: int,
    seed: int,
    arm: str,
    arm_dir: Optional[Path],
) -> RunRecord:
    curves, wall_time = timed_train(
        model,
        dataset,
        config.epochs,
        config.learning_rate,
        rng,
        eval_every=config.eval_every,
        batch_size=config.batch_size,
    )
    record = RunRecord(
        run_id=run_id, seed=seed, curves=curves, wall_time=wall_time, arm=arm
    )
    if arm_dir is not None:
        write_curves(arm_dir / CURVES_FILE, run_id, curves)
        record.checkpoint = model.save(
            arm_dir / CHECKPOINT_DIR,
            seed=seed,
            lr=config.learning_rate,
            epochs=config.epochs,
        )
    log.info(
        "Run %d %s arm done in %.1fs, final scores %s",
        run_id,
        arm,
        wall_time,
        record.final_scores,
    )
    return record


def pretrain(config: ExperimentConfig) -> Path:
    """
    Train a model on the (optionally damaged or label-permuted) source
    dataset and save it

    :return: the checkpoint directory
    """
    if config.source is None:
        raise InvalidConfigException("Pretraining needs a source dataset")
    output = config.output_dir
    source = load_checked(config.source, config.task)
    source = prepare_source(source, config, make_rng(config.seed, SOURCE))
    dump_yaml(output / CONFIG_FILE, config.to_dict())
    model = build_model(config, source, make_rng(config.seed, SOURCE, "init"))
    _train_arm(
        model,
        source,
        config,
        make_rng(config.seed, SOURCE, "train"),
        0,
        config.seed,
        SOURCE,
        output,
    )
    return output / CHECKPOINT_DIR


def transfer_model(
    source_model: GnnModel, target: Dataset, protocol: str, rng: np.random.Generator
) -> GnnModel:
    """
    Turn a pretrained model into the starting point of the transfer arm

    Raises:
        ProtocolException: if the model does not fit the target task
    """
    model = source_model.copy()
    if model.task != task_of(target) or model.in_dim != target.num_features:
        raise ProtocolException(
            f"Source model {model!r} does not fit the target {target!r}"
        )
    target_dim = output_dim(target.num_classes)
    if protocol == "fine_tune_old_layer":
        if model.out_dim != target_dim:
            raise ProtocolException(
                f"Old-layer transfer needs matching output dimensions,"
                f" source has {model.out_dim}, target needs {target_dim}"
            )
        return model
    reinit_output_layer(model, rng, out_dim=target_dim)
    if protocol == "frozen":
        freeze_feature_layers(model)
    return model


@dataclass(frozen=True)
class PairedRun:
    base: RunRecord
    transfer: RunRecord
    metrics: TransferMetrics


def run_pair(
    config: ExperimentConfig,
    target: Dataset,
    source: Optional[Dataset],
    run_id: int,
    run_dir: Optional[Path] = None,
) -> PairedRun:
    """
    Train the base arm from scratch and the transfer arm from the source
    model on the same target task, with identically seeded training streams
    """
    seed = derive_seed(config.seed, run_id)
    base = build_model(config, target, make_rng(config.seed, run_id, "init"))
    if config.protocol == "none":
        start = base.copy()
    else:
        if config.source_checkpoint is not None:
            source_model = GnnModel.load(config.source_checkpoint)
        else:
            if source is None:
                raise InvalidConfigException(
                    f"protocol {config.protocol} needs a source"
                )
            source_model = build_model(
                config, source, make_rng(config.seed, run_id, SOURCE, "init")
            )
            _train_arm(
                source_model,
                source,
                config,
                make_rng(config.seed, run_id, SOURCE, "train"),
                run_id,
                seed,
                SOURCE,
                None if run_dir is None else run_dir / SOURCE,
            )
        start = transfer_model(
            source_model, target, config.protocol, make_rng(config.seed, run_id, "head")
        )

    def arm_dir(arm: str) -> Optional[Path]:
        return None if run_dir is None else run_dir / arm

    base_record = _train_arm(
        base,
        target,
        config,
        make_rng(config.seed, run_id, "train"),
        run_id,
        seed,
        BASE,
        arm_dir(BASE),
    )
    transfer_record = _train_arm(
        start,
        target,
        config,
        make_rng(config.seed, run_id, "train"),
        run_id,
        seed,
        TRANSFER,
        arm_dir(TRANSFER),
    )
    metrics = transfer_metrics(
        transfer_record.curves[config.curve_split],
        base_record.curves[config.curve_split],
        config.tail,
    )
    if run_dir is not None:
        _write_metrics(run_dir / METRICS_FILE, [(run_id, metrics)])
    return PairedRun(base_record, transfer_record, metrics)


def _run_in_worker(
    args: tuple[ExperimentConfig, Dataset, Optional[Dataset], int, Path]
) -> TransferMetrics:
    config, target, source, run_id, run_dir = args
    return run_pair(config, target, source, run_id, run_dir).metrics


def run_transfer(config: ExperimentConfig) -> ExperimentDir:
    """
    Run all the paired runs of a transfer experiment and write them to the
    experiment directory
    """
    if config.epochs // config.eval_every + 1 < config.tail:
        raise InvalidConfigException(
            f"tail: {config.tail} evaluation points requested,"
            f" only {config.epochs // config.eval_every + 1} recorded"
        )
    output = config.output_dir
    log.info("Running transfer experiment %s into %s", config.name, output)
    target = load_checked(config.target, config.task)
    source = None
    if config.protocol != "none" and config.source_checkpoint is None:
        source_path = config.source
        if source_path is None:
            raise InvalidConfigException(f"protocol {config.protocol} needs a source")
        source = prepare_source(
            load_checked(source_path, config.task),
            config,
            make_rng(config.seed, SOURCE),
        )
    dump_yaml(output / CONFIG_FILE, config.to_dict())
    jobs = [
        (config, target, source, run_id, output / RunDir.name_for(run_id))
        for run_id in range(config.runs)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(_run_in_worker, jobs))
    else:
        results = [_run_in_worker(x) for x in jobs]
    _write_metrics(output / "transfer_metrics.csv", list(enumerate(results)))
    return ExperimentDir(output)


@dataclass(frozen=True)
class ReportRow:
    model: str
    source_task: str
    metric: str
    runs: int
    mean: float
    std: float
    p_vs_control: float = math.nan
    significant_vs_control: bool = False
    p_best_vs_row: float = math.nan
    not_worse_than_best: bool = False

    def as_row(self) -> list[Any]:
        return [
            self.model,
            self.source_task,
            self.metric,
            self.runs,
            repr(self.mean),
            repr(self.std),
            repr(self.p_vs_control),
            self.significant_vs_control,
            repr(self.p_best_vs_row),
            self.not_worse_than_best,
        ]


REPORT_COLUMNS = [
    "model",
    "source_task",
    "metric",
    "runs",
    "mean",
    "std",
    "p_vs_control",
    "significant_vs_control",
    "p_best_vs_row",
    "not_worse_than_best",
]


def _p_value(first: np.ndarray, second: np.ndarray, alpha: float, what: str) -> float:
    try:
        return welch_t_greater(first, second, alpha).p_value
    except DegenerateSampleException as exc:
        log.warning("No significance test for %s: %s", what, exc)
        return math.nan


def build_report(
    experiments: Sequence[ExperimentDir],
    control: Optional[ExperimentDir] = None,
    alpha: float = 0.1,
) -> list[ReportRow]:
    """
    Aggregate the transfer metrics of several experiments into one row per
    (model, source task, metric). Every row is compared one-sidedly against
    the control experiment (arm > control) and against the best arm of the
    same model and metric (best > arm).
    """
    if not experiments:
        raise InvalidInputException("Nothing to report")
    values: dict[tuple[ExperimentDir, str], np.ndarray] = {}
    for experiment in experiments:
        for metric in METRIC_NAMES:
            sample = experiment.metric_values(metric)
            if not sample.size:
                raise AggregationException(f"{experiment} has no completed runs")
            values[(experiment, metric)] = sample
    means = {key: float(np.mean(sample)) for key, sample in values.items()}
    rows = []
    for experiment in experiments:
        for metric in METRIC_NAMES:
            sample = values[(experiment, metric)]
            model = experiment.config.model
            peers = [x for x in experiments if x.config.model == model]
            best = max(peers, key=lambda x, m=metric: means[(x, m)])
            row = ReportRow(
                model=model,
                source_task=experiment.name,
                metric=metric,
                runs=int(sample.size),
                mean=means[(experiment, metric)],
                std=float(np.std(sample, ddof=1)) if sample.size > 1 else 0.0,
            )
            if control is not None and control != experiment:
                p_control = _p_value(
                    sample,
                    control.metric_values(metric),
                    alpha,
                    f"{experiment.name} vs control {metric}",
                )
                row = replace(
                    row,
                    p_vs_control=p_control,
                    significant_vs_control=bool(p_control < alpha),
                )
            if best == experiment:
                row = replace(row, not_worse_than_best=True)
            else:
                p_best = _p_value(
                    values[(best, metric)],
                    sample,
                    alpha,
                    f"best vs {experiment.name} {metric}",
                )
                row = replace(
                    row,
                    p_best_vs_row=p_best,
                    not_worse_than_best=not math.isnan(p_best) and p_best >= alpha,
                )
            rows.append(row)
    return rows


def write_report(path: Path, rows: Sequence[ReportRow]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(x.as_row() for x in rows)
    return path


def report(
    experiments: Sequence[ExperimentDir],
    output: Path,
    control: Optional[ExperimentDir] = None,
    alpha: float = 0.1,
) -> tuple[list[ReportRow], list[Path]]:
    """
    Write report.csv plus one SVG chart per experiment showing the mean base
    and transfer curves with their one standard deviation band

    :return: the report rows and the files written
    """
    rows = build_report(experiments, control, alpha)
    written = [write_report(output / "report.csv", rows)]
    for experiment in experiments:
        series = {arm: experiment.curves(arm) for arm in (BASE, TRANSFER)}
        if not np.array_equal(series[BASE][0].epochs, series[TRANSFER][0].epochs):
            raise AggregationException(f"Arms of {experiment} use different epochs")
        written.append(
            plot_curves(
                output / f"{experiment.name}.svg",
                series,
                title=f"{experiment.config.model} {experiment.name}",
                ylabel=series[BASE][0].metric,
            )
        )
    return rows, written


def load_metrics(path: Path) -> dict[str, Any]:
    """
    :return: The community metrics of the dataset stored at path
    """
    return community_report(load_dataset(path))


SWEEP_PARAMETERS = ("percent_swap", "percent_damage", "m")


def sweep(
    parameter: str,
    values: Sequence[float],
    seeds: Sequence[int],
    base: Optional[GraphGenConfig] = None,
) -> list[tuple[float, float, float]]:
    """
    Measure how a generator parameter drives community structure: structural
    inertia for percent_swap, attribute inertia for percent_damage and the
    Barabasi-Albert average degree for m

    :return: (value, mean, std) over the seeds for every value
    """
    if parameter not in SWEEP_PARAMETERS:
        raise InvalidInputException(
            f"Can't sweep {parameter!r}, expected one of {SWEEP_PARAMETERS}"
        )
    base = base or GraphGenConfig()
    result = []
    for value in values:
        measured = []
        for seed in seeds:
            if parameter == "m":
                adj = barabasi_albert(
                    base.nodes_per_graph, int(value), make_rng(seed, "sweep")
                )
                measured.append(float(degrees(adj).total.mean()))
                continue
            dataset = generate_graph_dataset(
                replace(base, **{parameter: value, "seed": seed})
            )
            if parameter == "percent_swap":
                measured.append(structural_within_inertia(dataset))
            else:
                measured.append(attribute_within_inertia(dataset))
        result.append((float(value), float(np.mean(measured)), float(np.std(measured))))
        log.info(
            "Sweep %s=%s: %.4f +- %.4f", parameter, value, result[-1][1], result[-1][2]
        )
    return result


def write_sweep(
    path: Path, parameter: str, rows: Sequence[tuple[float, float, float]]
) -> list[Path]:
    path.mkdir(parents=True, exist_ok=True)
    table = path / f"sweep_{parameter}.csv"
    with table.open("w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow([parameter, "mean", "std"])
        writer.writerows([value, repr(mean), repr(std)] for value, mean, std in rows)
    return [table, plot_sweep(path / f"sweep_{parameter}.svg", parameter, rows)]
