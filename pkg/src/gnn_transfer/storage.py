"""
    On-disk persistence of node graphs, graph datasets and model checkpoints

Node graph directory:
    meta.yaml      version, kind, num_nodes, num_features, num_classes, directed
    edges.csv      src,dst (undirected edges listed once)
    features.bin   row-major little-endian float64, num_nodes * num_features values
    labels.csv     node,label
    splits.csv     node,tag

Graph dataset directory:
    meta.yaml      version, kind, num_graphs, num_features, num_classes, offsets
    graphs.jsonl   one record per graph: num_nodes, edges, label, split
    features.bin   node features of all graphs stacked; graph i owns rows
                   offsets[i]:offsets[i + 1]
"""

import csv
import json
import logging
from collections.abc import Iterator, Sequence
from pathlib import Path
from typing import Any, Union

import numpy as np
from semver import Version

from .exceptions import InvalidDatasetException, InvalidInputException
from .graph import SPLITS, GraphDataset, GraphSample, NodeGraph, build_adjacency
from .utils import dump_yaml, load_meta

log = logging.getLogger(__name__)

FORMAT_VERSION = Version(1, 0, 0)
META_FILE = "meta.yaml"
FEATURES_FILE = "features.bin"
NODE_GRAPH = "node_graph"
GRAPH_DATASET = "graph_dataset"
FLOAT = np.dtype("<f8")

Dataset = Union[NodeGraph, GraphDataset]


def _write_features(path: Path, features: np.ndarray) -> None:
    path.write_bytes(np.ascontiguousarray(features, dtype=FLOAT).tobytes())


def read_float_block(path: Path, count: int) -> np.ndarray:
    """
    Read exactly `count` little-endian float64 values

    Raises:
        InvalidDatasetException: If the file holds a different amount of data
    """
    try:
        payload = path.read_bytes()
    except FileNotFoundError as exc:
        raise InvalidDatasetException(f"{path}: missing file") from exc
    expected = count * FLOAT.itemsize
    if len(payload) != expected:
        raise InvalidDatasetException(
            f"{path}: expected {expected} bytes ({count} float64 values),"
            f" found {len(payload)} (mismatch at byte offset {min(len(payload), expected)})"
        )
    return np.frombuffer(payload, dtype=FLOAT).astype(np.float64)


def _write_csv(path: Path, header: list[str], rows: Any) -> None:
    with path.open("w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(header)
        writer.writerows(rows)


def _read_csv(path: Path, header: list[str]) -> Iterator[tuple[int, list[str]]]:
    """
    Yield (line number, fields) for every data row of a csv file after checking
    its header
    """
    try:
        csv_file = path.open("r", newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise InvalidDatasetException(f"{path}: missing file") from exc
    with csv_file:
        reader = csv.reader(csv_file)
        first = next(reader, None)
        if first != header:
            raise InvalidDatasetException(
                f"{path}:1: expected header {','.join(header)}, found {first}"
            )
        for row in reader:
            if len(row) != len(header):
                raise InvalidDatasetException(
                    f"{path}:{reader.line_num}: expected {len(header)} fields, found {len(row)}"
                )
            yield reader.line_num, row


def _parse_int(path: Path, line: int, value: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise InvalidDatasetException(
            f"{path}:{line}: {value!r} is not an integer"
        ) from exc


def _meta_int(meta: dict[str, Any], key: str, path: Path) -> int:
    try:
        return int(meta[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDatasetException(f"{path}: invalid or missing {key}") from exc


def _per_node_column(path: Path, header: list[str], num_nodes: int) -> list[str]:
    values: list[Any] = [None] * num_nodes
    for line, (node, value) in _read_csv(path, header):
        index = _parse_int(path, line, node)
        if not 0 <= index < num_nodes:
            raise InvalidDatasetException(f"{path}:{line}: node {index} out of range")
        values[index] = value
    missing = [i for i, x in enumerate(values) if x is None]
    if missing:
        raise InvalidDatasetException(
            f"{path}: no entry for {len(missing)} nodes (first missing: {missing[0]})"
        )
    return values


def save_node_graph(path: Union[str, Path], graph: NodeGraph) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    log.debug("Saving %s to %s", graph, root)
    dump_yaml(
        root / META_FILE,
        {
            "version": str(FORMAT_VERSION),
            "kind": NODE_GRAPH,
            "num_nodes": graph.num_nodes,
            "num_features": graph.num_features,
            "num_classes": graph.num_classes,
            "directed": graph.adj.directed,
        },
    )
    _write_csv(root / "edges.csv", ["src", "dst"], graph.adj.edge_pairs().tolist())
    _write_features(root / FEATURES_FILE, graph.features)
    _write_csv(root / "labels.csv", ["node", "label"], enumerate(graph.labels.tolist()))
    _write_csv(root / "splits.csv", ["node", "tag"], enumerate(graph.split.tolist()))
    return root


def _load_node_graph(root: Path, meta: dict[str, Any]) -> NodeGraph:
    meta_path = root / META_FILE
    num_nodes = _meta_int(meta, "num_nodes", meta_path)
    num_features = _meta_int(meta, "num_features", meta_path)
    num_classes = _meta_int(meta, "num_classes", meta_path)
    directed = bool(meta.get("directed", False))
    edges_path = root / "edges.csv"
    edges = []
    for line, (src, dst) in _read_csv(edges_path, ["src", "dst"]):
        pair = (_parse_int(edges_path, line, src), _parse_int(edges_path, line, dst))
        if not (0 <= pair[0] < num_nodes and 0 <= pair[1] < num_nodes):
            raise InvalidDatasetException(
                f"{edges_path}:{line}: edge {pair} out of range"
            )
        edges.append(pair)
    features = read_float_block(root / FEATURES_FILE, num_nodes * num_features)
    labels_path = root / "labels.csv"
    labels = np.array(
        [
            _parse_int(labels_path, 0, x)
            for x in _per_node_column(labels_path, ["node", "label"], num_nodes)
        ],
        dtype=np.int64,
    )
    splits_path = root / "splits.csv"
    split = _per_node_column(splits_path, ["node", "tag"], num_nodes)
    unknown = set(split) - set(SPLITS)
    if unknown:
        raise InvalidDatasetException(f"{splits_path}: unknown tags {sorted(unknown)}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidDatasetException(
            f"{labels_path}: labels outside [0, {num_classes})"
        )
    return NodeGraph(
        adj=build_adjacency(edges, num_nodes, directed=directed),
        features=features.reshape(num_nodes, num_features),
        labels=labels,
        num_classes=num_classes,
        split=np.array(split, dtype="<U5"),
    )


def save_graph_dataset(path: Union[str, Path], dataset: GraphDataset) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    log.debug("Saving %s to %s", dataset, root)
    offsets = np.zeros(len(dataset) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([x.num_nodes for x in dataset])
    dump_yaml(
        root / META_FILE,
        {
            "version": str(FORMAT_VERSION),
            "kind": GRAPH_DATASET,
            "num_graphs": len(dataset),
            "num_features": dataset.num_features,
            "num_classes": dataset.num_classes,
            "offsets": offsets.tolist(),
        },
    )
    with (root / "graphs.jsonl").open("w", encoding="utf-8") as records:
        for sample, tag in zip(dataset, dataset.split.tolist()):
            record = {
                "num_nodes": sample.num_nodes,
                "edges": sample.adj.edge_pairs().tolist(),
                "label": sample.label,
                "split": tag,
            }
            records.write(json.dumps(record, separators=(",", ":")) + "\n")
    stacked = (
        np.concatenate([x.features for x in dataset])
        if len(dataset)
        else np.zeros((0, dataset.num_features))
    )
    _write_features(root / FEATURES_FILE, stacked)
    return root


def _load_graph_dataset(root: Path, meta: dict[str, Any]) -> GraphDataset:
    meta_path = root / META_FILE
    num_graphs = _meta_int(meta, "num_graphs", meta_path)
    num_features = _meta_int(meta, "num_features", meta_path)
    num_classes = _meta_int(meta, "num_classes", meta_path)
    offsets = np.asarray(meta.get("offsets", []), dtype=np.int64)
    if offsets.shape != (num_graphs + 1,) or (np.diff(offsets) < 0).any():
        raise InvalidDatasetException(f"{meta_path}: invalid offsets")
    features = read_float_block(
        root / FEATURES_FILE, int(offsets[-1]) * num_features
    ).reshape(-1, num_features)
    records_path = root / "graphs.jsonl"
    samples = []
    split = []
    try:
        lines = records_path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as exc:
        raise InvalidDatasetException(f"{records_path}: missing file") from exc
    if len(lines) != num_graphs:
        raise InvalidDatasetException(
            f"{records_path}:{len(lines) + 1}: expected {num_graphs} records, found {len(lines)}"
        )
    for index, line in enumerate(lines):
        try:
            record = json.loads(line)
            num_nodes = int(record["num_nodes"])
            edges = record["edges"]
            label = int(record["label"])
            tag = str(record["split"])
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidDatasetException(
                f"{records_path}:{index + 1}: malformed record"
            ) from exc
        if num_nodes != offsets[index + 1] - offsets[index]:
            raise InvalidDatasetException(
                f"{records_path}:{index + 1}: {num_nodes} nodes but meta offsets"
                f" reserve {offsets[index + 1] - offsets[index]}"
            )
        if tag not in SPLITS or not 0 <= label < num_classes:
            raise InvalidDatasetException(
                f"{records_path}:{index + 1}: invalid label or split tag"
            )
        try:
            adj = build_adjacency(edges, num_nodes)
        except (InvalidInputException, TypeError, ValueError) as exc:
            raise InvalidDatasetException(
                f"{records_path}:{index + 1}: invalid edge list ({exc})"
            ) from exc
        samples.append(
            GraphSample(
                adj=adj,
                features=features[offsets[index] : offsets[index + 1]].copy(),
                label=label,
            )
        )
        split.append(tag)
    return GraphDataset(
        samples=tuple(samples),
        num_classes=num_classes,
        num_features=num_features,
        split=np.array(split, dtype="<U5"),
    )


def save_dataset(path: Union[str, Path], dataset: Dataset) -> Path:
    if isinstance(dataset, NodeGraph):
        return save_node_graph(path, dataset)
    return save_graph_dataset(path, dataset)


def load_dataset(path: Union[str, Path]) -> Dataset:
    """
    Load a node graph or a graph dataset from its directory

    Raises:
        InvalidDatasetException: If any of the files is malformed; the message
            names the file and the offending line or byte offset.
        UnsupportedVersionException: If the directory was written by an
            incompatible format version.
    """
    root = Path(path)
    log.debug("Loading dataset at %s", root)
    meta = load_meta(root / META_FILE, FORMAT_VERSION)
    kind = meta.get("kind")
    if kind == NODE_GRAPH:
        return _load_node_graph(root, meta)
    if kind == GRAPH_DATASET:
        return _load_graph_dataset(root, meta)
    raise InvalidDatasetException(f"{root / META_FILE}: unknown dataset kind {kind!r}")


def probe_dataset(path: Union[str, Path]) -> bool:
    """
    :return: True if path looks like a dataset directory
    """
    root = Path(path)
    return (root / META_FILE).is_file() and (root / FEATURES_FILE).is_file()


WEIGHTS_FILE = "weights.bin"


def save_checkpoint(
    path: Union[str, Path], meta: dict[str, Any], tensors: Sequence[np.ndarray]
) -> Path:
    """
    Write a checkpoint directory: meta.yaml plus the tensors concatenated in the
    given order into weights.bin. Tensor shapes are recorded in meta.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    content = {
        "version": str(FORMAT_VERSION),
        "kind": "checkpoint",
        **meta,
        "shapes": [list(x.shape) for x in tensors],
    }
    dump_yaml(root / META_FILE, content)
    with (root / WEIGHTS_FILE).open("wb") as weights:
        for tensor in tensors:
            weights.write(np.ascontiguousarray(tensor, dtype=FLOAT).tobytes())
    return root


def load_checkpoint(path: Union[str, Path]) -> tuple[dict[str, Any], list[np.ndarray]]:
    """
    Read a checkpoint directory written by save_checkpoint

    :return: the meta mapping and the tensors in declaration order
    """
    root = Path(path)
    log.debug("Loading checkpoint at %s", root)
    meta = load_meta(root / META_FILE, FORMAT_VERSION)
    if meta.get("kind") != "checkpoint":
        raise InvalidDatasetException(f"{root / META_FILE}: not a checkpoint")
    try:
        shapes = [tuple(int(d) for d in shape) for shape in meta["shapes"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDatasetException(f"{root / META_FILE}: invalid shapes") from exc
    sizes = [int(np.prod(shape)) for shape in shapes]
    flat = read_float_block(root / WEIGHTS_FILE, sum(sizes))
    tensors = []
    start = 0
    for shape, size in zip(shapes, sizes):
        tensors.append(flat[start : start + size].reshape(shape).copy())
        start += size
    return meta, tensors
