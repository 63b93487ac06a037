from .graph import Adjacency, GraphDataset, GraphSample, NodeGraph
from .layers import GnnLayerKind, GnnModel
from .storage import load_dataset, save_dataset

__all__ = [
    "Adjacency",
    "NodeGraph",
    "GraphSample",
    "GraphDataset",
    "GnnLayerKind",
    "GnnModel",
    "load_dataset",
    "save_dataset",
]
