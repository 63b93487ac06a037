from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import yaml

from gnn_transfer.graph import (
    GraphDataset,
    GraphSample,
    NodeGraph,
    build_adjacency,
    stratified_split,
)


def create_files(path: Union[str, Path], *contents: dict[str, Any]) -> None:
    """
    Create files and directories under path. Each mapping associates a
    relative file name with its content: None creates a directory, str and
    bytes are written as they are and anything else is dumped as yaml.

    Example:
        create_files(
            tmp_path, {"meta.yaml": {"version": "1.0.0"}}, {"edges.csv": "src,dst\n"}
        )
    """
    root = Path(path)
    for element in contents:
        for file_name, content in element.items():
            full_path = root / file_name
            if content is None:
                full_path.mkdir(parents=True, exist_ok=True)
                continue
            full_path.parent.mkdir(parents=True, exist_ok=True)
            if isinstance(content, str):
                full_path.write_text(content)
            elif isinstance(content, bytes):
                full_path.write_bytes(content)
            else:
                full_path.write_text(yaml.safe_dump(content))


def random_edges(
    rng: np.random.Generator, num_nodes: int, p: float = 0.4
) -> np.ndarray:
    """
    Edges of an Erdos-Renyi style random graph, each unordered pair kept
    with probability p
    """
    rows, cols = np.triu_indices(num_nodes, k=1)
    keep = rng.random(rows.shape[0]) < p
    return np.stack([rows[keep], cols[keep]], axis=1)


def make_node_graph(
    edges: Sequence[tuple[int, int]],
    labels: Sequence[int],
    features: Optional[np.ndarray] = None,
    num_classes: Optional[int] = None,
    split: Optional[Sequence[str]] = None,
    directed: bool = False,
) -> NodeGraph:
    """
    Build a node graph; features default to a one-hot encoding of the labels
    and every node goes to the training split unless given otherwise
    """
    label_array = np.asarray(labels, dtype=np.int64)
    num_nodes = label_array.shape[0]
    if num_classes is None:
        num_classes = int(label_array.max()) + 1
    if features is None:
        features = np.eye(num_classes)[label_array]
    return NodeGraph(
        adj=build_adjacency(edges, num_nodes, directed=directed),
        features=np.asarray(features, dtype=np.float64),
        labels=label_array,
        num_classes=num_classes,
        split=np.asarray(split if split is not None else ["train"] * num_nodes),
    )


def make_graph_dataset(
    num_graphs: int = 24,
    num_classes: int = 2,
    num_features: int = 3,
    seed: int = 0,
    nodes_per_graph: int = 6,
) -> GraphDataset:
    """
    Small random graphs whose features are shifted by their label, so the
    task is learnable, with a stratified split
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(num_graphs) % num_classes
    samples = []
    for label in labels:
        edges = random_edges(rng, nodes_per_graph, 0.5)
        features = rng.normal(size=(nodes_per_graph, num_features)) + 2.0 * label
        samples.append(
            GraphSample(
                adj=build_adjacency(edges, nodes_per_graph),
                features=features,
                label=int(label),
            )
        )
    return GraphDataset(
        samples=tuple(samples),
        num_classes=num_classes,
        num_features=num_features,
        split=stratified_split(labels, rng),
    )
