"""
    Synthetic dataset generators

Graph classification datasets follow a four step pipeline: an attribute-level
classification task is drawn, its vectors are spread over Barabasi-Albert
graphs whose attachment parameter depends on the class, then labels of random
pairs of graphs are swapped and the attributes of random graphs are replaced
with noise. Node classification graphs come from a planted partition model
that can be calibrated towards a target modularity and within inertia.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Optional, Union

import networkx as nx
import numpy as np

from .community import Partition, modularity, within_inertia
from .exceptions import (
    CalibrationException,
    GenerationException,
    InvalidInputException,
)
from .graph import (
    Adjacency,
    GraphDataset,
    GraphSample,
    NodeGraph,
    build_adjacency,
    stratified_split,
)
from .rng import make_rng, python_seed, standard_normal

log = logging.getLogger(__name__)


def _check_percent(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise InvalidInputException(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class GraphGenConfig:
    """
    Parameters of the synthetic graph classification generator
    """

    num_classes: int = 3
    n_per_class: int = 200
    n_features: int = 8
    percent_swap: float = 0.0
    percent_damage: float = 0.0
    nodes_per_graph: int = 30
    class_separation: float = 2.0
    seed: int = 0

    def __post_init__(self) -> None:
        _check_percent("percent_swap", self.percent_swap)
        _check_percent("percent_damage", self.percent_damage)
        if self.num_classes < 1 or self.n_per_class < 1 or self.n_features < 1:
            raise InvalidInputException(f"Invalid dataset size in {self}")
        if self.nodes_per_graph < self.num_classes + 1:
            raise InvalidInputException(
                f"nodes_per_graph must be at least {self.num_classes + 1}"
                f" to attach {self.num_classes} edges per new node"
            )
        if self.class_separation < 0:
            raise InvalidInputException("class_separation must not be negative")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "graph", **asdict(self)}


@dataclass(frozen=True)
class NodeGenConfig:
    """
    Parameters of the planted partition node classification generator.
    The optional targets are the community metrics calibration aims for.
    """

    num_nodes: int = 1000
    num_communities: int = 5
    p_in: float = 0.05
    p_out: float = 0.002
    attr_noise: float = 1.0
    centroid_separation: float = 1.0
    n_features: int = 16
    seed: int = 0
    target_modularity: Optional[float] = None
    target_inertia: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise InvalidInputException(
                f"Edge probabilities must satisfy 0 <= p_out <= p_in <= 1,"
                f" got p_in={self.p_in}, p_out={self.p_out}"
            )
        if self.num_communities < 1 or self.num_nodes < self.num_communities:
            raise InvalidInputException(
                f"Can't split {self.num_nodes} nodes into {self.num_communities} communities"
            )
        if self.attr_noise < 0:
            raise InvalidInputException("attr_noise must not be negative")

    @property
    def expected_degree(self) -> float:
        size = self.num_nodes / self.num_communities
        return self.p_in * (size - 1) + self.p_out * (self.num_nodes - size)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "node", **asdict(self)}


GenConfig = Union[GraphGenConfig, NodeGenConfig]


def config_from_dict(content: dict[str, Any]) -> GenConfig:
    """
    Build a generator config from a mapping with a `kind` key (graph or node)

    Raises:
        InvalidInputException: on unknown kinds or keys
    """
    content = dict(content)
    kind = content.pop("kind", "graph")
    cls: Any = {"graph": GraphGenConfig, "node": NodeGenConfig}.get(kind)
    if cls is None:
        raise InvalidInputException(f"Unknown generator kind {kind!r}")
    known = {x.name for x in fields(cls)}
    unknown = set(content) - known
    if unknown:
        raise InvalidInputException(f"Unknown {kind} generator keys: {sorted(unknown)}")
    return cls(**content)  # type: ignore[no-any-return]


def barabasi_albert(n: int, m: int, rng: np.random.Generator) -> Adjacency:
    """
    Grow an undirected graph by preferential attachment: every new node is
    connected to m distinct existing nodes chosen with probability
    proportional to their degree. The result has exactly m * (n - m) edges.

    Raises:
        InvalidInputException: unless 1 <= m < n
    """
    if not 1 <= m < n:
        raise InvalidInputException(
            f"Barabasi-Albert needs 1 <= m < n, got m={m}, n={n}"
        )
    graph = nx.barabasi_albert_graph(n, m, seed=python_seed(rng))
    return build_adjacency(list(graph.edges()), n)


def hypercube_centroids(num_classes: int, n_features: int, scale: float) -> np.ndarray:
    """
    One centroid per class at distinct vertices of a signed hypercube spanning
    the first ceil(log2(num_classes)) feature dimensions; the remaining
    dimensions are zero.
    """
    dims = math.ceil(math.log2(num_classes)) if num_classes > 1 else 0
    if n_features < dims:
        raise InvalidInputException(
            f"{num_classes} classes need at least {dims} features, got {n_features}"
        )
    centroids = np.zeros((num_classes, n_features))
    for label in range(num_classes):
        bits = (label >> np.arange(dims)) & 1
        centroids[label, :dims] = np.where(bits == 1, 1.0, -1.0)
    return centroids * scale


def make_attribute_task(
    num_classes: int,
    count_per_class: int,
    n_features: int,
    class_separation: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw a labelled attribute-level classification task: every vector is its
    class centroid plus standard normal noise.

    :return: vectors (num_classes * count_per_class, n_features) and their labels
    """
    centroids = hypercube_centroids(num_classes, n_features, class_separation)
    labels = rng.permutation(np.repeat(np.arange(num_classes), count_per_class))
    vectors = centroids[labels] + standard_normal(rng, (labels.shape[0], n_features))
    return vectors, labels.astype(np.int64)


def choose_swap_pairs(
    num_graphs: int, percent: float, rng: np.random.Generator
) -> np.ndarray:
    """
    Sample floor(percent * N / 2) disjoint pairs of graphs uniformly at random

    :return: (P, 2) array of graph indices
    """
    _check_percent("percent_swap", percent)
    count = math.floor(percent * num_graphs / 2 + 1e-9)
    order = rng.permutation(num_graphs)
    return order[: 2 * count].reshape(count, 2)


def apply_swaps(dataset: GraphDataset, pairs: np.ndarray) -> GraphDataset:
    """
    Exchange the labels of every pair of graphs. Graphs keep their structure
    and attributes, so applying the same pairs twice restores the dataset.
    """
    labels = dataset.labels.copy()
    for first, second in pairs:
        labels[first], labels[second] = labels[second], labels[first]
    changed = int(np.count_nonzero(labels != dataset.labels))
    log.debug("Swapped %d pairs, %d graphs changed label", len(pairs), changed)
    return dataset.with_samples(
        [replace(x, label=int(y)) for x, y in zip(dataset.samples, labels)]
    )


def swap_labels(
    dataset: GraphDataset, percent: float, rng: np.random.Generator
) -> GraphDataset:
    """
    Weaken the structural community structure by exchanging the labels of
    random pairs of graphs. Pairs whose graphs already share a label are left
    as they are.
    """
    pairs = choose_swap_pairs(len(dataset), percent, rng)
    if not len(pairs):
        return dataset
    return apply_swaps(dataset, pairs)


def damage_graph_attributes(
    dataset: GraphDataset, percent: float, rng: np.random.Generator
) -> GraphDataset:
    """
    Replace the whole feature matrix of floor(percent * N) random graphs with
    standard normal noise
    """
    _check_percent("percent_damage", percent)
    count = math.floor(percent * len(dataset) + 1e-9)
    if count == 0:
        return dataset
    chosen = set(rng.choice(len(dataset), size=count, replace=False).tolist())
    samples = [
        (
            replace(x, features=standard_normal(rng, x.features.shape))
            if i in chosen
            else x
        )
        for i, x in enumerate(dataset.samples)
    ]
    return dataset.with_samples(samples)


def generate_graph_dataset(config: GraphGenConfig) -> GraphDataset:
    log.info("Generating graph dataset with %s", config)
    rng = make_rng(config.seed)
    per_class = config.n_per_class * config.nodes_per_graph
    vectors, vector_labels = make_attribute_task(
        config.num_classes, per_class, config.n_features, config.class_separation, rng
    )
    samples = []
    for label in range(config.num_classes):
        pool = vectors[vector_labels == label]
        for index in range(config.n_per_class):
            adj = barabasi_albert(config.nodes_per_graph, label + 1, rng)
            start = index * config.nodes_per_graph
            samples.append(
                GraphSample(
                    adj=adj,
                    features=pool[start : start + config.nodes_per_graph].copy(),
                    label=label,
                )
            )
    dataset = GraphDataset(
        samples=tuple(samples),
        num_classes=config.num_classes,
        num_features=config.n_features,
        split=np.full(len(samples), "train", dtype="<U5"),
    )
    dataset = swap_labels(dataset, config.percent_swap, rng)
    dataset = damage_graph_attributes(dataset, config.percent_damage, rng)
    return replace(dataset, split=stratified_split(dataset.labels, rng))


def planted_partition(
    config: NodeGenConfig, rng: Optional[np.random.Generator] = None
) -> NodeGraph:
    """
    Sample a node classification graph with evenly sized communities: pairs
    inside a community are linked with probability p_in, pairs across
    communities with p_out. Features are the community centroid plus
    attr_noise scaled normal noise.

    Raises:
        GenerationException: if the sampled graph has no edges
    """
    if rng is None:
        rng = make_rng(config.seed)
    base, extra = divmod(config.num_nodes, config.num_communities)
    sizes = [base + (1 if i < extra else 0) for i in range(config.num_communities)]
    graph = nx.random_partition_graph(
        sizes, config.p_in, config.p_out, seed=python_seed(rng)
    )
    if graph.number_of_edges() == 0:
        raise GenerationException(f"Planted partition graph without edges for {config}")
    labels = np.repeat(np.arange(config.num_communities), sizes).astype(np.int64)
    centroids = hypercube_centroids(
        config.num_communities, config.n_features, config.centroid_separation
    )
    noise = standard_normal(rng, (config.num_nodes, config.n_features))
    isolated = nx.number_of_isolates(graph)
    if isolated:
        log.warning("Planted partition graph has %d isolated nodes", isolated)
    return NodeGraph(
        adj=build_adjacency(list(graph.edges()), config.num_nodes),
        features=centroids[labels] + config.attr_noise * noise,
        labels=labels,
        num_classes=config.num_communities,
        split=stratified_split(labels, rng),
    )


CALIBRATION_SEEDS = 5
CALIBRATION_TOLERANCE = 0.05
MAX_ITERATIONS = 40


def _measure(config: NodeGenConfig, metric: str) -> float:
    values = []
    for offset in range(CALIBRATION_SEEDS):
        graph = planted_partition(config, make_rng(config.seed, offset, "calibrate"))
        if metric == "modularity":
            values.append(
                modularity(graph.adj, Partition(graph.labels, graph.num_classes))
            )
        else:
            values.append(within_inertia(graph))
    return float(np.mean(values))


def _with_ratio(config: NodeGenConfig, ratio: float, degree: float) -> NodeGenConfig:
    size = config.num_nodes / config.num_communities
    p_in = min(1.0, degree / ((size - 1) + ratio * (config.num_nodes - size)))
    return replace(config, p_in=p_in, p_out=ratio * p_in)


def _bisect(
    name: str,
    measure: Any,
    low: float,
    high: float,
    target: float,
    increasing: bool,
) -> tuple[float, float]:
    """
    Bisect a monotone measure between low and high.

    :return: the best argument found and its measured value
    """
    best = (low, measure(low))
    for iteration in range(MAX_ITERATIONS):
        middle = (low + high) / 2
        value = measure(middle)
        log.info(
            "Calibrating %s: iteration %d, %.6g -> %.4f", name, iteration, middle, value
        )
        if abs(value - target) < abs(best[1] - target):
            best = (middle, value)
        if abs(value - target) < CALIBRATION_TOLERANCE / 5:
            break
        if (value < target) == increasing:
            low = middle
        else:
            high = middle
    if abs(best[1] - target) > CALIBRATION_TOLERANCE:
        raise CalibrationException(
            f"Could not reach {name} {target}, closest was {best[1]:.4f}",
            closest=best[1],
        )
    return best


def calibrate_node_config(
    target_modularity: Optional[float],
    target_inertia: Optional[float],
    base: NodeGenConfig,
) -> NodeGenConfig:
    """
    Tune a planted partition config until its measured modularity and within
    inertia (means over several seeds) are close to the targets.

    Modularity is tuned first through the ratio p_out / p_in at a fixed
    expected degree, then within inertia through attr_noise. Either target
    may be None to leave the corresponding parameters untouched.

    Raises:
        CalibrationException: if a target is not reached; carries the closest
            measured value
    """
    config = replace(
        base, target_modularity=target_modularity, target_inertia=target_inertia
    )
    if target_modularity is not None:
        degree = base.expected_degree
        ratio, value = _bisect(
            "modularity",
            lambda x: _measure(_with_ratio(config, x, degree), "modularity"),
            0.0,
            1.0,
            target_modularity,
            increasing=False,
        )
        config = _with_ratio(config, ratio, degree)
        log.info(
            "Calibrated p_in=%.6g p_out=%.6g, modularity %.4f",
            config.p_in,
            config.p_out,
            value,
        )
    if target_inertia is not None:
        high = max(config.attr_noise, 1.0)
        for _ in range(MAX_ITERATIONS):
            if _measure(replace(config, attr_noise=high), "inertia") >= target_inertia:
                break
            high *= 2
        noise, value = _bisect(
            "within inertia",
            lambda x: _measure(replace(config, attr_noise=x), "inertia"),
            0.0,
            high,
            target_inertia,
            increasing=True,
        )
        config = replace(config, attr_noise=noise)
        log.info("Calibrated attr_noise=%.6g, within inertia %.4f", noise, value)
    return config


_NODE_PRESETS = {
    1: (0.64, 0.37),
    2: (0.64, 0.47),
    3: (0.32, 0.39),
    4: (0.28, 0.99),
}
_GRAPH_PRESETS = {
    5: (0.95, 0.95),
    6: (0.92, 0.95),
    7: (0.95, 0.92),
    8: (0.92, 0.92),
}


def preset(name: Union[int, str]) -> GenConfig:
    """
    Configurations 1-4 are node classification graphs carrying their
    calibration targets (modularity, within inertia); configurations 5-8 are
    graph classification datasets (percent_swap, percent_damage).
    """
    try:
        key = int(name)
    except (TypeError, ValueError) as exc:
        raise InvalidInputException(f"Unknown preset {name!r}") from exc
    if key in _NODE_PRESETS:
        target_modularity, target_inertia = _NODE_PRESETS[key]
        return NodeGenConfig(
            target_modularity=target_modularity, target_inertia=target_inertia
        )
    if key in _GRAPH_PRESETS:
        percent_swap, percent_damage = _GRAPH_PRESETS[key]
        return GraphGenConfig(percent_swap=percent_swap, percent_damage=percent_damage)
    raise InvalidInputException(f"Unknown preset {name!r}, expected 1 to 8")


def generate(
    config: GenConfig, calibrate: bool = True
) -> tuple[Union[NodeGraph, GraphDataset], GenConfig]:
    """
    Generate the dataset described by a config, calibrating node configs that
    carry targets first when asked to

    :return: the dataset and the config it was finally generated with
    """
    if isinstance(config, GraphGenConfig):
        return generate_graph_dataset(config), config
    if calibrate and (
        config.target_modularity is not None or config.target_inertia is not None
    ):
        config = calibrate_node_config(
            config.target_modularity, config.target_inertia, config
        )
    return planted_partition(config), config
