from collections.abc import Iterator

import numpy as np

from ..graph import GraphDataset, degrees
from . import CheckResult, Fail, Warn
from ._common import (
    coverage_problems,
    feature_problems,
    metric_problems,
    split_problems,
)


def check_splits(dataset: GraphDataset) -> Iterator[CheckResult]:
    """Training and test splits must contain graphs"""
    yield from split_problems(dataset.split, "graphs")


def check_class_coverage(dataset: GraphDataset) -> Iterator[CheckResult]:
    """Every class should have graphs, also in the training split"""
    yield from coverage_problems(dataset.labels, dataset.split, dataset.num_classes)


def check_metric_defined(dataset: GraphDataset) -> Iterator[CheckResult]:
    """Binary tasks need both classes in every split for ROC-AUC"""
    yield from metric_problems(dataset.labels, dataset.split, dataset.num_classes)


def check_empty_graphs(dataset: GraphDataset) -> Iterator[CheckResult]:
    """Graphs without nodes can't be pooled"""
    empty = [index for index, sample in enumerate(dataset) if sample.num_nodes == 0]
    if empty:
        yield Fail(f"Graphs {empty[:10]} have no nodes")


def check_features(dataset: GraphDataset) -> Iterator[CheckResult]:
    """Features must be finite"""
    if len(dataset):
        yield from feature_problems(np.concatenate([x.features for x in dataset]))


def check_isolated_nodes(dataset: GraphDataset) -> Iterator[CheckResult]:
    """Isolated nodes only see their own features"""
    affected = sum(
        1
        for sample in dataset
        if sample.num_nodes and (degrees(sample.adj).total == 0).any()
    )
    if affected:
        yield Warn(f"{affected} of {len(dataset)} graphs have isolated nodes")
