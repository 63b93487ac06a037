import numpy as np

from gnn_transfer.checks import Fail, Warn
from gnn_transfer.checks.node_graph import (
    check_class_coverage,
    check_features,
    check_isolated_nodes,
    check_metric_defined,
    check_splits,
)
from gnn_transfer.graph import NodeGraph
from tests import make_node_graph


def test_splits(two_triangles: NodeGraph) -> None:
    assert not set(check_splits(two_triangles))
    graph = make_node_graph([(0, 1)], [0, 1])
    assert set(check_splits(graph)) == {
        Warn("The valid split has no nodes"),
        Fail("The test split has no nodes"),
    }


def test_class_coverage() -> None:
    graph = make_node_graph(
        [(0, 1), (1, 2)], [0, 1, 1], num_classes=3, split=["train", "test", "test"]
    )
    assert set(check_class_coverage(graph)) == {
        Warn("Classes [2] have no members"),
        Warn("Classes [1] are missing from the train split"),
    }


def test_metric_defined(two_triangles: NodeGraph, small_node_graph: NodeGraph) -> None:
    assert set(check_metric_defined(two_triangles)) == {
        Fail("ROC-AUC is undefined on the valid split: only one class present"),
    }
    assert not set(check_metric_defined(small_node_graph))


def test_features() -> None:
    features = np.array([[1.0, np.nan], [0.0, 1.0]])
    graph = make_node_graph([(0, 1)], [0, 1], features=features)
    assert set(check_features(graph)) == {
        Fail("Features contain NaN or infinite values")
    }
    same = make_node_graph([(0, 1)], [0, 1], features=np.ones((2, 3)))
    assert set(check_features(same)) == {Warn("All feature vectors are identical")}


def test_isolated_nodes(two_triangles: NodeGraph) -> None:
    assert not set(check_isolated_nodes(two_triangles))
    graph = make_node_graph([(0, 1)], [0, 1, 0, 1])
    assert set(check_isolated_nodes(graph)) == {Warn("2 of 4 nodes are isolated")}
