"""
    Community structure measures

Modularity works on the node level and looks at edges only. Within inertia
compares the scatter of per-item property vectors inside each class with the
total scatter; its general form is specialized for graph datasets by using the
mean attribute vector (attribute inertia) or the mean degree (structural
inertia) of every graph as the property vector.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidInputException, UndefinedMetricException
from .graph import Adjacency, GraphDataset, NodeGraph, degrees, symmetrize

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Assignment of every item (node or graph) to one of num_classes classes
    """

    assignment: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        if self.assignment.ndim != 1:
            raise InvalidInputException("Partition assignment must be a vector")
        if self.assignment.size and (
            self.assignment.min() < 0 or self.assignment.max() >= self.num_classes
        ):
            raise InvalidInputException(
                f"Partition assignment outside [0, {self.num_classes})"
            )

    @classmethod
    def from_labels(
        cls, labels: np.ndarray, num_classes: Optional[int] = None
    ) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64)
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if labels.size else 0
        return cls(labels, num_classes)

    def __len__(self) -> int:
        return int(self.assignment.shape[0])


@dataclass(frozen=True, eq=False)
class InertiaInput:
    """
    Property vectors of the items of a partition, one row per item
    """

    vectors: np.ndarray
    partition: Partition

    def __post_init__(self) -> None:
        if self.vectors.shape[0] != len(self.partition):
            raise InvalidInputException(
                f"{self.vectors.shape[0]} property vectors for {len(self.partition)} items"
            )


def modularity(adj: Adjacency, partition: Partition) -> float:
    """
    Modularity of a node partition.

    Directed graphs are symmetrized first. Pairs i == j are part of the double
    sum: they contribute no edge but their degree product is still subtracted.

    Raises:
        UndefinedMetricException: if the graph has no edges
    """
    if len(partition) != adj.num_nodes:
        raise InvalidInputException(
            f"Partition of {len(partition)} items for {adj.num_nodes} nodes"
        )
    adj = symmetrize(adj)
    two_m = float(adj.neighbors.shape[0])
    if two_m == 0:
        raise UndefinedMetricException(
            "Modularity is undefined on a graph without edges"
        )
    assignment = partition.assignment
    within = float(
        np.count_nonzero(assignment[adj.sources] == assignment[adj.neighbors])
    )
    degree_per_class = np.bincount(
        assignment,
        weights=degrees(adj).total.astype(np.float64),
        minlength=partition.num_classes,
    )
    return within / two_m - float(np.sum(degree_per_class**2)) / two_m**2


def general_within_inertia(
    vectors: Union[np.ndarray, InertiaInput], partition: Optional[Partition] = None
) -> float:
    """
    Ratio of the within-class squared Euclidean scatter to the total squared
    scatter about the global centroid. Scalar properties are treated as 1-D
    vectors and empty classes contribute nothing.

    Raises:
        UndefinedMetricException: if there are fewer than two items or all
            items coincide
    """
    if isinstance(vectors, InertiaInput):
        partition = vectors.partition
        vectors = vectors.vectors
    if partition is None:
        raise InvalidInputException("A partition is required")
    rho = np.asarray(vectors, dtype=np.float64)
    if rho.ndim == 1:
        rho = rho.reshape(-1, 1)
    InertiaInput(rho, partition)
    if rho.shape[0] < 2:
        raise UndefinedMetricException("Within inertia needs at least two items")
    assignment = partition.assignment
    total = float(np.sum((rho - rho.mean(axis=0)) ** 2))
    scale = float(np.sum(rho**2))
    if total <= 1e-12 * max(scale, 1.0):
        raise UndefinedMetricException(
            "Within inertia is undefined with zero total scatter"
        )
    counts = np.bincount(assignment, minlength=partition.num_classes)
    sums = np.zeros((partition.num_classes, rho.shape[1]))
    np.add.at(sums, assignment, rho)
    centroids = sums / np.maximum(counts, 1)[:, None]
    within = float(np.sum((rho - centroids[assignment]) ** 2))
    return float(np.clip(within / total, 0.0, 1.0))


def within_inertia(item: Union[InertiaInput, NodeGraph]) -> float:
    """
    Within inertia of raw property vectors, or of the node features of a
    node graph partitioned by its labels
    """
    if isinstance(item, NodeGraph):
        item = InertiaInput(item.features, Partition(item.labels, item.num_classes))
    return general_within_inertia(item)


def _dataset_partition(dataset: GraphDataset) -> Partition:
    return Partition(dataset.labels, dataset.num_classes)


def attribute_within_inertia(dataset: GraphDataset) -> float:
    """
    :return: Within inertia of the per-graph mean attribute vectors
    """
    if any(x.num_nodes == 0 for x in dataset):
        raise InvalidInputException("Attribute inertia needs non-empty graphs")
    means = np.stack([x.features.mean(axis=0) for x in dataset])
    return general_within_inertia(means, _dataset_partition(dataset))


def structural_within_inertia(dataset: GraphDataset) -> float:
    """
    :return: Within inertia of the per-graph average node degree
    """
    if any(x.num_nodes == 0 for x in dataset):
        raise InvalidInputException("Structural inertia needs non-empty graphs")
    mean_degree = np.array([degrees(x.adj).total.mean() for x in dataset])
    return general_within_inertia(mean_degree, _dataset_partition(dataset))


def _guarded(name: str, func: Callable[[], float]) -> Optional[float]:
    try:
        return func()
    except UndefinedMetricException as exc:
        log.warning("%s is undefined: %s", name, exc)
        return None


def community_report(
    dataset: Union[NodeGraph, GraphDataset],
) -> dict[str, Optional[float]]:
    """
    Measure all the community metrics that apply to a dataset. Metrics that do
    not apply to the dataset kind, or are undefined on it, are reported as None.
    """
    if isinstance(dataset, NodeGraph):
        partition = Partition(dataset.labels, dataset.num_classes)
        return {
            "modularity": _guarded(
                "modularity", lambda: modularity(dataset.adj, partition)
            ),
            "within_inertia": _guarded(
                "within_inertia", lambda: within_inertia(dataset)
            ),
            "I_S": None,
            "I_A": None,
        }
    return {
        "modularity": None,
        "within_inertia": None,
        "I_S": _guarded("I_S", lambda: structural_within_inertia(dataset)),
        "I_A": _guarded("I_A", lambda: attribute_within_inertia(dataset)),
    }
