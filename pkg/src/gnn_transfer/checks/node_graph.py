from collections.abc import Iterator

import numpy as np

from ..graph import NodeGraph, degrees
from . import CheckResult, Warn
from ._common import (
    coverage_problems,
    feature_problems,
    metric_problems,
    split_problems,
)


def check_splits(graph: NodeGraph) -> Iterator[CheckResult]:
    """Training and test splits must contain nodes"""
    yield from split_problems(graph.split, "nodes")


def check_class_coverage(graph: NodeGraph) -> Iterator[CheckResult]:
    """Every class should have nodes, also in the training split"""
    yield from coverage_problems(graph.labels, graph.split, graph.num_classes)


def check_metric_defined(graph: NodeGraph) -> Iterator[CheckResult]:
    """Binary tasks need both classes in every split for ROC-AUC"""
    yield from metric_problems(graph.labels, graph.split, graph.num_classes)


def check_features(graph: NodeGraph) -> Iterator[CheckResult]:
    """Features must be finite"""
    yield from feature_problems(graph.features)


def check_isolated_nodes(graph: NodeGraph) -> Iterator[CheckResult]:
    """Isolated nodes only see their own features"""
    isolated = int(np.count_nonzero(degrees(graph.adj).total == 0))
    if isolated:
        yield Warn(f"{isolated} of {graph.num_nodes} nodes are isolated")
