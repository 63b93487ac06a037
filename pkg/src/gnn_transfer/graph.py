"""
    Definition of Adjacency, NodeGraph, GraphSample and GraphDataset
"""

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Optional, TypeVar, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import InvalidInputException
from .rng import standard_normal

log = logging.getLogger(__name__)

TRAIN = "train"
VALID = "valid"
TEST = "test"
SPLITS = (TRAIN, VALID, TEST)
DEFAULT_FRACTIONS = (0.6, 0.2, 0.2)


@dataclass(frozen=True, eq=False)
class Adjacency:
    """
    Graph structure in compressed sparse row form: the out-neighbours of node v are
    neighbors[offsets[v]:offsets[v + 1]], sorted ascending without duplicates.
    Self-loops are never stored.
    """

    num_nodes: int
    offsets: np.ndarray
    neighbors: np.ndarray
    directed: bool = False
    _cache: dict[str, Any] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    @property
    def num_edges(self) -> int:
        """
        :return: Number of directed edges, or of undirected edges if not directed
        """
        stored = int(self.neighbors.shape[0])
        return stored if self.directed else stored // 2

    def neighbors_of(self, node: int) -> np.ndarray:
        return self.neighbors[self.offsets[node] : self.offsets[node + 1]]

    @cached_property
    def sources(self) -> np.ndarray:
        """
        :return: Source node of every stored edge, aligned with neighbors
        """
        return np.repeat(
            np.arange(self.num_nodes, dtype=np.int64), np.diff(self.offsets)
        )

    def edge_pairs(self) -> np.ndarray:
        """
        :return: (E, 2) array of edges; undirected edges are listed once as (u, v) with u < v
        """
        pairs = np.stack([self.sources, self.neighbors], axis=1)
        if not self.directed:
            pairs = pairs[pairs[:, 0] < pairs[:, 1]]
        return pairs

    def to_csr(self) -> sp.csr_matrix:
        """
        :return: The 0/1 adjacency matrix, a_ij = 1 for every stored edge i -> j
        """
        data = np.ones(self.neighbors.shape[0], dtype=np.float64)
        return sp.csr_matrix(
            (data, self.neighbors, self.offsets), shape=(self.num_nodes,) * 2
        )

    def cached(self, key: str, factory: Callable[[], Any]) -> Any:
        """
        Memoize a value derived from this (immutable) structure
        """
        try:
            return self._cache[key]
        except KeyError:
            value = factory()
            self._cache[key] = value
            return value

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, Adjacency):
            return False
        return (
            self.num_nodes == other.num_nodes
            and self.directed == other.directed
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"{self.__class__.__name__}({self.num_nodes} nodes, {self.num_edges} {kind} edges)"


def build_adjacency(
    edge_list: Union[Iterable[tuple[int, int]], np.ndarray],
    num_nodes: int,
    directed: bool = False,
) -> Adjacency:
    """
    Build a CSR adjacency out of an edge list.

    Duplicate edges are merged and self-loops dropped. Undirected graphs store
    both directions of every edge.

    Args:
        edge_list: pairs of node indices
        num_nodes (int): number of nodes
        directed (bool): keep the edges as given instead of symmetrizing them

    Raises:
        InvalidInputException: if any index is outside [0, num_nodes)
    """
    if num_nodes < 0:
        raise InvalidInputException(f"Negative node count: {num_nodes}")
    if not isinstance(edge_list, np.ndarray):
        edge_list = list(edge_list)
    edges = np.asarray(edge_list, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
        bad = edges[(edges < 0).any(axis=1) | (edges >= num_nodes).any(axis=1)][0]
        raise InvalidInputException(
            f"Edge ({bad[0]}, {bad[1]}) out of range for {num_nodes} nodes"
        )
    src, dst = edges[:, 0], edges[:, 1]
    loops = src == dst
    if loops.any():
        log.debug("Dropping %d self-loops", int(loops.sum()))
        src, dst = src[~loops], dst[~loops]
    if not directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    keys = np.unique(src * num_nodes + dst)
    src, dst = keys // max(num_nodes, 1), keys % max(num_nodes, 1)
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(np.bincount(src, minlength=num_nodes))
    return Adjacency(num_nodes, offsets, dst.astype(np.int64), directed)


def symmetrize(adj: Adjacency) -> Adjacency:
    """
    :return: The undirected graph holding {u, v} whenever (u, v) or (v, u) is an edge
    """
    if not adj.directed:
        return adj
    return build_adjacency(
        np.stack([adj.sources, adj.neighbors], axis=1), adj.num_nodes, directed=False
    )


@dataclass(frozen=True, eq=False)
class DegreeVector:
    """
    Per-node degrees. For undirected graphs total, in and out degree coincide;
    for directed graphs the total degree is in-degree plus out-degree.
    """

    total: np.ndarray
    in_degree: np.ndarray
    out_degree: np.ndarray
    renormalized: np.ndarray
    renormalized_in: np.ndarray


def degrees(adj: Adjacency) -> DegreeVector:
    out_degree = np.diff(adj.offsets)
    in_degree = np.bincount(adj.neighbors, minlength=adj.num_nodes).astype(np.int64)
    total = in_degree + out_degree if adj.directed else out_degree
    return DegreeVector(
        total=total,
        in_degree=in_degree,
        out_degree=out_degree,
        renormalized=total + 1,
        renormalized_in=in_degree + 1,
    )


def _check_features(features: np.ndarray, rows: int) -> None:
    if features.ndim != 2 or features.shape[0] != rows:
        raise InvalidInputException(
            f"Feature matrix of shape {features.shape} does not match {rows} nodes"
        )


def _check_split(split: np.ndarray, length: int) -> None:
    if split.shape != (length,):
        raise InvalidInputException(
            f"Split of shape {split.shape}, expected ({length},)"
        )
    unknown = set(np.unique(split).tolist()) - set(SPLITS)
    if unknown:
        raise InvalidInputException(f"Unknown split tags: {sorted(unknown)}")


@dataclass(frozen=True, eq=False)
class NodeGraph:
    """
    A single attributed graph for node classification
    """

    adj: Adjacency
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: np.ndarray

    def __post_init__(self) -> None:
        _check_features(self.features, self.adj.num_nodes)
        _check_split(self.split, self.adj.num_nodes)
        if self.labels.shape != (self.adj.num_nodes,):
            raise InvalidInputException(
                f"Label vector of shape {self.labels.shape} does not match {self.adj.num_nodes} nodes"
            )
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.num_classes
        ):
            raise InvalidInputException(
                f"Labels outside [0, {self.num_classes}) in node graph"
            )

    @property
    def num_nodes(self) -> int:
        return self.adj.num_nodes

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    def mask(self, tag: str) -> np.ndarray:
        return np.asarray(self.split == tag)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, NodeGraph):
            return False
        return (
            self.adj == other.adj
            and self.num_classes == other.num_classes
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.split, other.split)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}({self.num_nodes} nodes, {self.adj.num_edges} edges,"
            f" {self.num_features} features, {self.num_classes} classes)"
        )


@dataclass(frozen=True, eq=False)
class GraphSample:
    """
    One labelled graph of a graph classification dataset
    """

    adj: Adjacency
    features: np.ndarray
    label: int

    def __post_init__(self) -> None:
        _check_features(self.features, self.adj.num_nodes)

    @property
    def num_nodes(self) -> int:
        return self.adj.num_nodes

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, GraphSample):
            return False
        return (
            self.label == other.label
            and self.adj == other.adj
            and np.array_equal(self.features, other.features)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class GraphDataset:
    """
    A collection of labelled graphs sharing the same feature width
    """

    samples: tuple[GraphSample, ...]
    num_classes: int
    num_features: int
    split: np.ndarray

    def __post_init__(self) -> None:
        _check_split(self.split, len(self.samples))
        for index, sample in enumerate(self.samples):
            if sample.features.shape[1] != self.num_features:
                raise InvalidInputException(
                    f"Graph {index} has {sample.features.shape[1]} features,"
                    f" expected {self.num_features}"
                )
            if not 0 <= sample.label < self.num_classes:
                raise InvalidInputException(
                    f"Graph {index} label {sample.label} outside [0, {self.num_classes})"
                )

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([x.label for x in self.samples], dtype=np.int64)

    def indices(self, tag: str) -> np.ndarray:
        return np.flatnonzero(self.split == tag)

    def subset(
        self, indices: Sequence[int], split: Optional[np.ndarray] = None
    ) -> "GraphDataset":
        """
        :return: A dataset holding the selected graphs, in the given order
        """
        indices = np.asarray(indices, dtype=np.int64)
        return GraphDataset(
            samples=tuple(self.samples[i] for i in indices),
            num_classes=self.num_classes,
            num_features=self.num_features,
            split=self.split[indices] if split is None else split,
        )

    def with_samples(self, samples: Sequence[GraphSample]) -> "GraphDataset":
        return replace(self, samples=tuple(samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[GraphSample]:
        yield from self.samples

    def __getitem__(self, index: int) -> GraphSample:
        return self.samples[index]

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, GraphDataset):
            return False
        return (
            self.num_classes == other.num_classes
            and self.num_features == other.num_features
            and np.array_equal(self.split, other.split)
            and self.samples == other.samples
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}({len(self.samples)} graphs,"
            f" {self.num_features} features, {self.num_classes} classes)"
        )


Attributed = TypeVar("Attributed", NodeGraph, GraphSample, GraphDataset)


def damage_features(item: Attributed, rng: np.random.Generator) -> Attributed:
    """
    Replace every node attribute with an independent standard normal draw.
    Structure, labels and splits are left untouched.
    """
    if isinstance(item, GraphDataset):
        return item.with_samples([damage_features(x, rng) for x in item.samples])
    return replace(item, features=standard_normal(rng, item.features.shape))


def permute_labels(item: Attributed, rng: np.random.Generator) -> Attributed:
    """
    Shuffle the label vector, destroying any relation between labels and data
    while keeping the class frequencies
    """
    if isinstance(item, NodeGraph):
        return replace(item, labels=rng.permutation(item.labels))
    if isinstance(item, GraphDataset):
        shuffled = rng.permutation(item.labels)
        return item.with_samples(
            [replace(x, label=int(y)) for x, y in zip(item.samples, shuffled)]
        )
    raise InvalidInputException(f"Can't permute labels of {item!r}")


def stratified_split(
    labels: np.ndarray,
    rng: np.random.Generator,
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
) -> np.ndarray:
    """
    Assign train/valid/test tags so that every class contributes its share
    to each split.

    Classes with fewer than three members put their first (shuffled) member in
    the training split so that train always covers every occupied class.
    """
    if abs(sum(fractions) - 1.0) > 1e-9 or min(fractions) < 0:
        raise InvalidInputException(f"Invalid split fractions {fractions}")
    split = np.empty(labels.shape[0], dtype="<U5")
    for label in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == label))
        count = members.shape[0]
        n_train = max(1, int(round(fractions[0] * count)))
        n_valid = int(round(fractions[1] * count))
        n_valid = min(n_valid, count - n_train)
        split[members[:n_train]] = TRAIN
        split[members[n_train : n_train + n_valid]] = VALID
        split[members[n_train + n_valid :]] = TEST
    return split


def split_halves(
    dataset: GraphDataset, rng: np.random.Generator
) -> tuple[GraphDataset, GraphDataset]:
    """
    Randomly divide a graph dataset into two disjoint halves, each with its own
    stratified split. The first half receives the extra graph on odd sizes.
    """
    order = rng.permutation(len(dataset))
    middle = (len(dataset) + 1) // 2
    halves = []
    for indices in (np.sort(order[:middle]), np.sort(order[middle:])):
        labels = dataset.labels[indices]
        halves.append(dataset.subset(indices, split=stratified_split(labels, rng)))
    return halves[0], halves[1]
