from collections.abc import Callable
from pathlib import Path
from typing import Optional
from unittest.mock import patch

import numpy as np
import pytest

from gnn_transfer.exceptions import InvalidDatasetException, InvalidInputException
from gnn_transfer.graph import (
    Adjacency,
    GraphDataset,
    GraphSample,
    NodeGraph,
    build_adjacency,
)
from gnn_transfer.layers import (
    GRAPH_TASK,
    GnnLayerKind,
    GnnModel,
    collate,
    freeze_feature_layers,
    gcn_forward,
    gin_forward,
    mean_pool,
    pooling_matrix,
    reinit_output_layer,
    sage_forward,
)
from gnn_transfer.nn import Parameter, Tensor, gradient_check, softmax_cross_entropy
from gnn_transfer.rng import make_rng
from gnn_transfer.storage import save_checkpoint
from tests import random_edges

ONE = Tensor(np.ones((1, 1)))
ZERO = Tensor(np.zeros((1, 1)))


def dense_forward(
    kind: str,
    h: np.ndarray,
    a: np.ndarray,
    directed: bool = False,
    epsilon: float = 0.0,
) -> np.ndarray:
    """
    Reference aggregation over the dense adjacency, a_ij = 1 for i -> j
    """
    incoming = a.T
    count = a.shape[0]
    if kind == "gcn":
        degree = a.sum(axis=0) + a.sum(axis=1) if directed else a.sum(axis=1)
        scale = np.diag(1.0 / np.sqrt(degree + 1.0))
        return scale @ (incoming + np.eye(count)) @ scale @ h
    if kind == "sage":
        return np.diag(1.0 / (incoming.sum(axis=1) + 1.0)) @ (
            incoming + np.eye(count)
        ) @ h
    return (1.0 + epsilon) * h + incoming @ h


def test_two_node_path() -> None:
    adj = build_adjacency([(0, 1)], 2)
    h = Tensor(np.array([[1.0], [3.0]]))
    assert gcn_forward(h, adj, ONE).data[:, 0].tolist() == pytest.approx([2.0, 2.0])
    assert sage_forward(h, adj, ONE).data[:, 0].tolist() == [2.0, 2.0]
    assert gin_forward(h, adj, ONE, ZERO).data[:, 0].tolist() == [4.0, 4.0]


def test_isolated_node() -> None:
    adj = build_adjacency([(0, 1)], 3)
    h = Tensor(np.array([[1.0], [3.0], [5.0]]))
    for forward in (gcn_forward, sage_forward):
        assert forward(h, adj, ONE).data[2, 0] == pytest.approx(5.0)
    epsilon = Tensor(np.array([[0.5]]))
    assert gin_forward(h, adj, ONE, epsilon).data[2, 0] == pytest.approx(7.5)


def test_bias() -> None:
    adj = build_adjacency([(0, 1)], 2)
    h = Tensor(np.array([[1.0], [3.0]]))
    bias = Tensor(np.array([[0.5]]))
    assert sage_forward(h, adj, ONE, bias).data[:, 0].tolist() == [2.5, 2.5]


@pytest.mark.parametrize("directed", [False, True])
def test_sparse_matches_dense(directed: bool) -> None:
    rng = np.random.default_rng(17)
    for _ in range(50):
        num_nodes = int(rng.integers(1, 12))
        edges = random_edges(rng, num_nodes, 0.3)
        if directed:
            flip = rng.random(edges.shape[0]) < 0.5
            edges[flip] = edges[flip][:, ::-1]
        adj = build_adjacency(edges, num_nodes, directed=directed)
        dense = adj.to_csr().toarray()
        h = rng.normal(size=(num_nodes, 4))
        weight = rng.normal(size=(4, 2))
        epsilon = float(rng.normal())
        for kind, forward in (("gcn", gcn_forward), ("sage", sage_forward)):
            out = forward(Tensor(h), adj, Tensor(weight)).data
            expected = dense_forward(kind, h, dense, directed) @ weight
            assert np.allclose(out, expected, atol=1e-12, rtol=0)
        out = gin_forward(
            Tensor(h), adj, Tensor(weight), Tensor(np.array([[epsilon]]))
        ).data
        expected = dense_forward("gin", h, dense, directed, epsilon) @ weight
        assert np.allclose(out, expected, atol=1e-12, rtol=0)


def test_collate_and_pool(tiny_graph_dataset: GraphDataset) -> None:
    samples = [tiny_graph_dataset[i] for i in range(3)]
    batch = collate(samples)
    assert batch.num_graphs == 3
    assert batch.adj.num_nodes == 18
    assert batch.adj.num_edges == sum(x.adj.num_edges for x in samples)
    assert batch.labels.tolist() == [0, 1, 0]
    # edges never cross graph boundaries
    pairs = batch.adj.edge_pairs()
    assert (pairs[:, 0] // 6 == pairs[:, 1] // 6).all()
    pooled = mean_pool(Tensor(batch.features), batch.sizes).data
    expected = np.stack([x.features.mean(axis=0) for x in samples])
    assert np.allclose(pooled, expected)
    with pytest.raises(InvalidInputException, match="empty graph"):
        pooling_matrix([3, 0])


def _loss_fn(
    model: GnnModel,
    features: np.ndarray,
    adj: Adjacency,
    labels: np.ndarray,
    sizes: Optional[np.ndarray] = None,
) -> Callable[[], Tensor]:
    return lambda: softmax_cross_entropy(
        model.forward(features, adj, train=True, sizes=sizes), labels
    )


def _random_graph(
    rng: np.random.Generator, num_nodes: int = 5, num_features: int = 3
) -> tuple[np.ndarray, Adjacency]:
    adj = build_adjacency(random_edges(rng, num_nodes, 0.5), num_nodes)
    return rng.normal(size=(num_nodes, num_features)), adj


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("kind", list(GnnLayerKind))
def test_node_model_gradients(kind: GnnLayerKind, seed: int) -> None:
    rng = np.random.default_rng(seed)
    features, adj = _random_graph(rng)
    model = GnnModel(kind, 3, 4, 3, make_rng(seed), dropout_p=0.0)
    loss = _loss_fn(model, features, adj, np.array([0, 1, 2, 0, 1]))
    assert gradient_check(loss, model.parameters()) < 1e-4


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("kind", list(GnnLayerKind))
def test_graph_model_gradients(kind: GnnLayerKind, seed: int) -> None:
    rng = np.random.default_rng(seed)
    samples = []
    for label in (0, 1):
        features, adj = _random_graph(rng)
        samples.append(GraphSample(adj=adj, features=features, label=label))
    batch = collate(samples)
    model = GnnModel(kind, 3, 4, 2, make_rng(seed), task=GRAPH_TASK, dropout_p=0.0)
    loss = _loss_fn(model, batch.features, batch.adj, batch.labels, batch.sizes)
    assert gradient_check(loss, model.parameters()) < 1e-4


@pytest.mark.parametrize("kind", list(GnnLayerKind))
def test_permutation_equivariance(kind: GnnLayerKind) -> None:
    rng = np.random.default_rng(23)
    for _ in range(10):
        num_nodes = int(rng.integers(2, 9))
        edges = random_edges(rng, num_nodes, 0.4)
        h = rng.normal(size=(num_nodes, 3))
        order = rng.permutation(num_nodes)
        # node j of the permuted graph is node order[j] of the original
        position = np.argsort(order)
        adj = build_adjacency(edges, num_nodes)
        permuted = build_adjacency(position[edges], num_nodes)
        model = GnnModel(kind, 3, 4, 2, make_rng(0), dropout_p=0.0)
        out = model.forward(h, adj).data
        moved = model.forward(h[order], permuted).data
        assert np.allclose(moved, out[order], atol=1e-12, rtol=0)


@pytest.mark.parametrize("kind", list(GnnLayerKind))
def test_batch_matches_single_graphs(
    kind: GnnLayerKind, tiny_graph_dataset: GraphDataset
) -> None:
    samples = [tiny_graph_dataset[i] for i in range(5)]
    batch = collate(samples)
    model = GnnModel(kind, 3, 4, 2, make_rng(4), task=GRAPH_TASK)
    batched = model.forward(batch.features, batch.adj, sizes=batch.sizes).data
    single = np.concatenate([model.forward(x.features, x.adj).data for x in samples])
    assert np.allclose(batched, single, atol=1e-12, rtol=0)


def test_model_layout() -> None:
    node = GnnModel("gin", 5, 8, 3, make_rng(0))
    names = [x.name for x in node.parameters()]
    assert names[:5] == [
        "conv0.weight", "conv0.bias", "conv0.eps", "norm0.gamma", "norm0.beta"
    ]
    assert [x.name for x in node.output_parameters()] == [
        "conv2.weight",
        "conv2.bias",
        "conv2.eps",
    ]
    assert node.parameter("conv2.weight").shape == (8, 3)
    assert sorted(node.norms) == ["norm0", "norm1"]
    graph = GnnModel("gcn", 5, 8, 1, make_rng(0), task=GRAPH_TASK)
    assert [x.name for x in graph.output_parameters()] == ["head.weight", "head.bias"]
    assert sorted(graph.norms) == ["norm0", "norm1", "norm2"]
    assert repr(graph) == "GnnModel(gcn, graph, 5->8x3->1)"


def test_model_invalid() -> None:
    with pytest.raises(InvalidInputException, match="Unknown task kind"):
        GnnModel("gcn", 3, 4, 2, make_rng(0), task="edge")
    with pytest.raises(InvalidInputException, match="must be positive"):
        GnnModel("gcn", 3, 4, 2, make_rng(0), num_layers=0)
    with pytest.raises(ValueError):
        GnnModel("gat", 3, 4, 2, make_rng(0))
    model = GnnModel("sage", 3, 4, 2, make_rng(0))
    with pytest.raises(InvalidInputException, match="expects 3 features, got 2"):
        model.forward(np.zeros((4, 2)), build_adjacency([], 4))


def test_model_deterministic(small_node_graph: NodeGraph) -> None:
    first = GnnModel("gcn", 3, 4, 3, make_rng(5))
    second = GnnModel("gcn", 3, 4, 3, make_rng(5))
    args = (small_node_graph.features, small_node_graph.adj)
    assert np.array_equal(first.forward(*args).data, second.forward(*args).data)
    trained = first.forward(*args, train=True, rng=make_rng(1)).data
    assert np.array_equal(
        trained, second.forward(*args, train=True, rng=make_rng(1)).data
    )


def test_save_load(tmp_path: Path, small_node_graph: NodeGraph) -> None:
    model = GnnModel("gin", 3, 4, 3, make_rng(2))
    model.forward(
        small_node_graph.features, small_node_graph.adj, train=True, rng=make_rng(0)
    )
    path = model.save(tmp_path / "model", seed=2)
    loaded = GnnModel.load(path)
    assert repr(loaded) == repr(model)
    for a, b in zip(model.parameters(), loaded.parameters()):
        assert a.name == b.name
        assert np.array_equal(a.data, b.data)
    for (name_a, a), (name_b, b) in zip(model.buffers(), loaded.buffers()):
        assert name_a == name_b
        assert np.array_equal(a, b)
    args = (small_node_graph.features, small_node_graph.adj)
    assert np.array_equal(model.forward(*args).data, loaded.forward(*args).data)


def test_load_init_stream(tmp_path: Path) -> None:
    path = GnnModel("sage", 3, 4, 2, make_rng(2)).save(tmp_path / "model")
    with patch("gnn_transfer.layers.make_rng", wraps=make_rng) as mock_make_rng:
        GnnModel.load(path)
    mock_make_rng.assert_called_once_with(0)


def test_load_mismatch(tmp_path: Path) -> None:
    model = GnnModel("gcn", 3, 4, 2, make_rng(0), num_layers=2)
    meta = model.checkpoint_meta()
    tensors = [x.data for x in model.parameters()] + [x for _, x in model.buffers()]
    path = save_checkpoint(
        tmp_path / "a", {**meta, "parameters": meta["parameters"][:-1]}, tensors
    )
    with pytest.raises(InvalidDatasetException, match="do not match the model"):
        GnnModel.load(path)
    path = save_checkpoint(tmp_path / "b", {**meta, "task": "edge"}, tensors)
    with pytest.raises(InvalidDatasetException, match="invalid checkpoint meta"):
        GnnModel.load(path)
    path = save_checkpoint(tmp_path / "c", meta, [np.zeros((2, 2))] + tensors[1:])
    with pytest.raises(InvalidDatasetException, match="conv0.weight has shape"):
        GnnModel.load(path)


def test_reinit_output_layer() -> None:
    model = GnnModel("gcn", 3, 4, 2, make_rng(0), task=GRAPH_TASK)
    features = [x.data.copy() for x in model.feature_parameters()]
    head = model.parameter("head.weight").data.copy()
    reinit_output_layer(model, make_rng(9), out_dim=5)
    assert model.out_dim == 5
    assert model.parameter("head.weight").shape == (4, 5)
    assert model.parameter("head.bias").shape == (1, 5)
    assert not np.array_equal(model.parameter("head.weight").data[:, :2], head)
    assert all(
        np.array_equal(a, b.data) for a, b in zip(features, model.feature_parameters())
    )


def test_freeze_feature_layers(small_node_graph: NodeGraph) -> None:
    model = freeze_feature_layers(GnnModel("sage", 3, 4, 3, make_rng(0)))
    assert all(not x.trainable for x in model.feature_parameters())
    assert all(x.trainable for x in model.output_parameters())
    assert all(x.frozen for x in model.norms.values())
    before = [x.copy() for _, x in model.buffers()]
    logits = model.forward(
        small_node_graph.features, small_node_graph.adj, train=True, rng=make_rng(0)
    )
    softmax_cross_entropy(logits, small_node_graph.labels).backward()
    assert all(x.grad is None for x in model.feature_parameters())
    assert all(x.grad is not None for x in model.output_parameters())
    assert all(np.array_equal(a, b) for a, (_, b) in zip(before, model.buffers()))


def test_copy_is_independent() -> None:
    model = GnnModel("gcn", 3, 4, 2, make_rng(0))
    clone = model.copy()
    clone.parameter("conv0.weight").data += 1.0
    assert not np.array_equal(
        clone.parameter("conv0.weight").data, model.parameter("conv0.weight").data
    )
    assert isinstance(clone.parameter("conv0.weight"), Parameter)
