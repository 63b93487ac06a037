import logging
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest

from gnn_transfer.graph import GraphDataset, NodeGraph
from gnn_transfer.storage import save_dataset
from tests import make_graph_dataset, make_node_graph


@pytest.fixture(autouse=True)
def package_logger() -> Iterator[None]:
    """
    Undo the level and handlers the CLI installs on the package logger
    """
    logger = logging.getLogger("gnn_transfer")
    level, handlers = logger.level, list(logger.handlers)
    yield
    logger.setLevel(level)
    logger.handlers = handlers


@pytest.fixture
def two_triangles() -> NodeGraph:
    """
    Two disjoint triangles, one class each
    """
    return make_node_graph(
        [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
        [0, 0, 0, 1, 1, 1],
        split=["train", "train", "test", "train", "valid", "test"],
    )


@pytest.fixture
def small_node_graph() -> NodeGraph:
    """
    A 12 node graph with three well separated communities and noisy features
    """
    rng = np.random.default_rng(7)
    labels = np.repeat([0, 1, 2], 4)
    edges = [
        (u, v)
        for u in range(12)
        for v in range(u + 1, 12)
        if labels[u] == labels[v] or (u, v) in ((3, 4), (7, 8))
    ]
    features = np.eye(3)[labels] * 2.0 + rng.normal(scale=0.3, size=(12, 3))
    split = np.array(["train", "train", "valid", "test"] * 3)
    return make_node_graph(edges, labels, features=features, split=split)


@pytest.fixture
def tiny_graph_dataset() -> GraphDataset:
    return make_graph_dataset()


@pytest.fixture
def saved_graph_dataset(tmp_path: Path, tiny_graph_dataset: GraphDataset) -> Path:
    return save_dataset(tmp_path / "dataset", tiny_graph_dataset)


@pytest.fixture
def saved_node_graph(tmp_path: Path, small_node_graph: NodeGraph) -> Path:
    return save_dataset(tmp_path / "node_graph", small_node_graph)
