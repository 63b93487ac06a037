import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from gnn_transfer.exceptions import InvalidDatasetException, UnsupportedVersionException
from gnn_transfer.graph import GraphDataset, NodeGraph
from gnn_transfer.storage import (
    load_checkpoint,
    load_dataset,
    probe_dataset,
    read_float_block,
    save_checkpoint,
    save_dataset,
)
from tests import create_files, make_node_graph


def test_node_graph_persistence(tmp_path: Path, small_node_graph: NodeGraph) -> None:
    root = save_dataset(tmp_path / "graph", small_node_graph)
    assert probe_dataset(root)
    assert not probe_dataset(tmp_path)
    assert (root / "edges.csv").read_text().splitlines()[0] == "src,dst"
    assert (root / "features.bin").stat().st_size == 12 * 3 * 8
    loaded = load_dataset(root)
    assert isinstance(loaded, NodeGraph)
    assert loaded == small_node_graph


def test_directed_node_graph_persistence(tmp_path: Path) -> None:
    graph = make_node_graph([(0, 1), (2, 1), (1, 0)], [0, 1, 1], directed=True)
    loaded = load_dataset(save_dataset(tmp_path / "graph", graph))
    assert isinstance(loaded, NodeGraph)
    assert loaded.adj.directed
    assert loaded == graph


def test_graph_dataset_persistence(
    saved_graph_dataset: Path, tiny_graph_dataset: GraphDataset
) -> None:
    meta = yaml.safe_load((saved_graph_dataset / "meta.yaml").read_text())
    assert meta["kind"] == "graph_dataset"
    assert meta["offsets"][-1] == 24 * 6
    assert len((saved_graph_dataset / "graphs.jsonl").read_text().splitlines()) == 24
    loaded = load_dataset(saved_graph_dataset)
    assert isinstance(loaded, GraphDataset)
    assert loaded == tiny_graph_dataset


def test_save_is_deterministic(
    tmp_path: Path, tiny_graph_dataset: GraphDataset
) -> None:
    first = save_dataset(tmp_path / "a", tiny_graph_dataset)
    second = save_dataset(tmp_path / "b", tiny_graph_dataset)
    for name in ("meta.yaml", "graphs.jsonl", "features.bin"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_read_float_block(tmp_path: Path) -> None:
    create_files(tmp_path, {"data.bin": np.arange(3, dtype="<f8").tobytes()})
    assert read_float_block(tmp_path / "data.bin", 3).tolist() == [0.0, 1.0, 2.0]
    with pytest.raises(InvalidDatasetException, match="mismatch at byte offset 24"):
        read_float_block(tmp_path / "data.bin", 4)
    with pytest.raises(InvalidDatasetException, match="missing file"):
        read_float_block(tmp_path / "other.bin", 4)


def test_truncated_features(saved_node_graph: Path) -> None:
    features = saved_node_graph / "features.bin"
    features.write_bytes(features.read_bytes()[:-5])
    with pytest.raises(InvalidDatasetException, match="features.bin"):
        load_dataset(saved_node_graph)


def test_malformed_edges(saved_node_graph: Path) -> None:
    create_files(saved_node_graph, {"edges.csv": "src,dst\n0,1\n1,x\n"})
    with pytest.raises(
        InvalidDatasetException, match=r"edges.csv:3: 'x' is not an integer"
    ):
        load_dataset(saved_node_graph)
    create_files(saved_node_graph, {"edges.csv": "src,dst\n0,99\n"})
    with pytest.raises(
        InvalidDatasetException, match=r"edges.csv:2: edge \(0, 99\) out of range"
    ):
        load_dataset(saved_node_graph)
    create_files(saved_node_graph, {"edges.csv": "from,to\n"})
    with pytest.raises(InvalidDatasetException, match="edges.csv:1: expected header"):
        load_dataset(saved_node_graph)


def test_malformed_labels(saved_node_graph: Path) -> None:
    create_files(saved_node_graph, {"labels.csv": "node,label\n0,1\n"})
    with pytest.raises(InvalidDatasetException, match="no entry for 11 nodes"):
        load_dataset(saved_node_graph)
    rows = "".join(f"{i},7\n" for i in range(12))
    create_files(saved_node_graph, {"labels.csv": "node,label\n" + rows})
    with pytest.raises(InvalidDatasetException, match="labels outside"):
        load_dataset(saved_node_graph)


def test_malformed_records(saved_graph_dataset: Path) -> None:
    records = saved_graph_dataset / "graphs.jsonl"
    lines = records.read_text().splitlines()
    create_files(saved_graph_dataset, {"graphs.jsonl": "\n".join(lines[:-1]) + "\n"})
    with pytest.raises(InvalidDatasetException, match="expected 24 records, found 23"):
        load_dataset(saved_graph_dataset)
    broken = json.loads(lines[2])
    broken["edges"] = [[0, 50]]
    records = lines[:2] + [json.dumps(broken)] + lines[3:]
    create_files(saved_graph_dataset, {"graphs.jsonl": "\n".join(records) + "\n"})
    with pytest.raises(
        InvalidDatasetException, match="graphs.jsonl:3: invalid edge list"
    ):
        load_dataset(saved_graph_dataset)
    create_files(
        saved_graph_dataset,
        {"graphs.jsonl": "\n".join(lines[:2] + ["{not json"] + lines[3:]) + "\n"},
    )
    with pytest.raises(
        InvalidDatasetException, match="graphs.jsonl:3: malformed record"
    ):
        load_dataset(saved_graph_dataset)


def test_meta_versions(saved_graph_dataset: Path) -> None:
    meta_path = saved_graph_dataset / "meta.yaml"
    meta = yaml.safe_load(meta_path.read_text())
    create_files(saved_graph_dataset, {"meta.yaml": {**meta, "version": "1.4.2"}})
    assert len(load_dataset(saved_graph_dataset)) == 24
    create_files(saved_graph_dataset, {"meta.yaml": {**meta, "version": "2.0.0"}})
    with pytest.raises(
        UnsupportedVersionException, match="unsupported format version 2.0.0"
    ):
        load_dataset(saved_graph_dataset)
    create_files(saved_graph_dataset, {"meta.yaml": {**meta, "version": "one"}})
    with pytest.raises(InvalidDatasetException, match="not valid semver"):
        load_dataset(saved_graph_dataset)
    create_files(saved_graph_dataset, {"meta.yaml": {**meta, "kind": "hypergraph"}})
    with pytest.raises(InvalidDatasetException, match="unknown dataset kind"):
        load_dataset(saved_graph_dataset)


def test_missing_meta(tmp_path: Path) -> None:
    with pytest.raises(InvalidDatasetException, match="missing meta file"):
        load_dataset(tmp_path)


def test_checkpoint(tmp_path: Path) -> None:
    tensors = [np.arange(6, dtype=np.float64).reshape(2, 3), np.ones((1, 3))]
    root = save_checkpoint(tmp_path / "ckpt", {"seed": 3}, tensors)
    meta, loaded = load_checkpoint(root)
    assert meta["seed"] == 3
    assert meta["shapes"] == [[2, 3], [1, 3]]
    assert all(np.array_equal(a, b) for a, b in zip(tensors, loaded))
    with pytest.raises(InvalidDatasetException, match="not a checkpoint"):
        load_checkpoint(
            save_dataset(tmp_path / "data", make_node_graph([(0, 1)], [0, 1]))
        )
