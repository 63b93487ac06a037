"""
    Message passing layers, model assembly and graph readout

All three layers aggregate over the in-neighbours of every node and then apply
a single weight matrix:

    GCN   h'_v = W sum_{u in N(v) + v} h_u / sqrt(d~_u d~_v)
    SAGE  h'_v = W (1 / d~in_v) sum_{u in N(v) + v} h_u
    GIN   h'_v = W ((1 + eps) h_v + sum_{u in N(v)} h_u)

where d~ = d + 1 is the renormalized degree. The activation is applied by the
enclosing block.
"""

import copy
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import InvalidDatasetException, InvalidInputException
from .graph import Adjacency, GraphSample, degrees
from .nn import (
    BatchNormState,
    Parameter,
    Tensor,
    add,
    add_bias,
    batch_norm,
    dropout,
    glorot_uniform,
    matmul,
    relu,
    scale_by_one_plus,
    sparse_matmul,
)
from .rng import make_rng
from .storage import load_checkpoint, save_checkpoint

log = logging.getLogger(__name__)

NODE_TASK = "node"
GRAPH_TASK = "graph"


class GnnLayerKind(str, Enum):
    GCN = "gcn"
    SAGE = "sage"
    GIN = "gin"


def _incoming(adj: Adjacency) -> sp.csr_matrix:
    return sp.csr_matrix(adj.to_csr().T)


def gcn_propagation(adj: Adjacency) -> sp.csr_matrix:
    """
    :return: D~^-1/2 (A^T + I) D~^-1/2 using the renormalized total degree
    """

    def build() -> sp.csr_matrix:
        scale = sp.diags(1.0 / np.sqrt(degrees(adj).renormalized))
        return sp.csr_matrix(
            scale @ (_incoming(adj) + sp.identity(adj.num_nodes)) @ scale
        )

    return adj.cached("gcn", build)  # type: ignore[no-any-return]


def sage_propagation(adj: Adjacency) -> sp.csr_matrix:
    """
    :return: diag(1 / d~in) (A^T + I)
    """

    def build() -> sp.csr_matrix:
        scale = sp.diags(1.0 / degrees(adj).renormalized_in)
        return sp.csr_matrix(scale @ (_incoming(adj) + sp.identity(adj.num_nodes)))

    return adj.cached("sage", build)  # type: ignore[no-any-return]


def gin_propagation(adj: Adjacency) -> sp.csr_matrix:
    return adj.cached("gin", lambda: _incoming(adj))  # type: ignore[no-any-return]


def _transform(aggregated: Tensor, weight: Tensor, bias: Optional[Tensor]) -> Tensor:
    out = matmul(aggregated, weight)
    return out if bias is None else add_bias(out, bias)


def gcn_forward(
    h: Tensor, adj: Adjacency, weight: Tensor, bias: Optional[Tensor] = None
) -> Tensor:
    return _transform(sparse_matmul(gcn_propagation(adj), h), weight, bias)


def sage_forward(
    h: Tensor, adj: Adjacency, weight: Tensor, bias: Optional[Tensor] = None
) -> Tensor:
    return _transform(sparse_matmul(sage_propagation(adj), h), weight, bias)


def gin_forward(
    h: Tensor,
    adj: Adjacency,
    weight: Tensor,
    epsilon: Tensor,
    bias: Optional[Tensor] = None,
) -> Tensor:
    neighbours = sparse_matmul(gin_propagation(adj), h)
    own = scale_by_one_plus(h, epsilon)
    return _transform(add(own, neighbours), weight, bias)


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """
    Disjoint union of several graphs, node rows ordered graph after graph
    """

    adj: Adjacency
    features: np.ndarray
    sizes: np.ndarray
    labels: np.ndarray

    @property
    def num_graphs(self) -> int:
        return int(self.sizes.shape[0])


def collate(samples: Sequence[GraphSample]) -> GraphBatch:
    sizes = np.array([x.num_nodes for x in samples], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    offsets = [np.zeros(1, dtype=np.int64)]
    neighbors = []
    edge_base = 0
    for sample, start in zip(samples, starts[:-1]):
        offsets.append(sample.adj.offsets[1:] + edge_base)
        neighbors.append(sample.adj.neighbors + start)
        edge_base += sample.adj.neighbors.shape[0]
    if not samples:
        neighbors.append(np.zeros(0, dtype=np.int64))
    adj = Adjacency(
        num_nodes=int(starts[-1]),
        offsets=np.concatenate(offsets),
        neighbors=np.concatenate(neighbors),
        directed=any(x.adj.directed for x in samples),
    )
    width = samples[0].features.shape[1] if samples else 0
    features = [x.features for x in samples] or [np.zeros((0, width))]
    return GraphBatch(
        adj=adj,
        features=np.concatenate(features),
        sizes=sizes,
        labels=np.array([x.label for x in samples], dtype=np.int64),
    )


def pooling_matrix(sizes: Sequence[int]) -> sp.csr_matrix:
    """
    :return: (graphs x nodes) matrix averaging the node rows of every graph

    Raises:
        InvalidInputException: if any graph is empty
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if (sizes <= 0).any():
        raise InvalidInputException("Can't pool an empty graph")
    rows = np.repeat(np.arange(sizes.shape[0]), sizes)
    data = np.repeat(1.0 / sizes, sizes)
    return sp.csr_matrix(
        (data, (rows, np.arange(rows.shape[0]))), shape=(sizes.shape[0], rows.shape[0])
    )


def mean_pool(h: Tensor, sizes: Sequence[int]) -> Tensor:
    """
    Column-wise mean of the node rows of every graph of a batch
    """
    return sparse_matmul(pooling_matrix(sizes), h)


class GnnModel:
    """
    A stack of message passing layers of one kind.

    Node tasks: every layer but the last is followed by batch norm, ReLU and
    dropout; the last layer produces the logits. Graph tasks: every layer is a
    full block, node embeddings are mean pooled and a linear head produces the
    logits. The output layer is the last layer or the head respectively.
    """

    def __init__(
        self,
        kind: Union[GnnLayerKind, str],
        in_dim: int,
        hidden_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        num_layers: int = 3,
        task: str = NODE_TASK,
        dropout_p: float = 0.5,
        use_batch_norm: bool = True,
    ):
        if task not in (NODE_TASK, GRAPH_TASK):
            raise InvalidInputException(f"Unknown task kind {task!r}")
        if num_layers < 1 or min(in_dim, hidden_dim, out_dim) < 1:
            raise InvalidInputException(
                "Model dimensions and layer count must be positive"
            )
        self.kind = GnnLayerKind(kind)
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        self.out_dim = out_dim
        self.num_layers = num_layers
        self.task = task
        self.dropout_p = dropout_p
        self.use_batch_norm = use_batch_norm
        self._params: dict[str, Parameter] = {}
        self.norms: dict[str, BatchNormState] = {}
        conv_out = [hidden_dim] * num_layers
        if task == NODE_TASK:
            conv_out[-1] = out_dim
        width = in_dim
        for index, dim in enumerate(conv_out):
            self._add(f"conv{index}.weight", glorot_uniform(rng, width, dim))
            self._add(f"conv{index}.bias", np.zeros((1, dim)))
            if self.kind == GnnLayerKind.GIN:
                self._add(f"conv{index}.eps", np.zeros((1, 1)))
            if use_batch_norm and self._is_block(index):
                self._add(f"norm{index}.gamma", np.ones((1, dim)))
                self._add(f"norm{index}.beta", np.zeros((1, dim)))
                self.norms[f"norm{index}"] = BatchNormState.fresh(dim)
            width = dim
        if task == GRAPH_TASK:
            self._add("head.weight", glorot_uniform(rng, hidden_dim, out_dim))
            self._add("head.bias", np.zeros((1, out_dim)))

    def _add(self, name: str, value: np.ndarray) -> None:
        self._params[name] = Parameter(value, name=name)

    def _is_block(self, index: int) -> bool:
        return self.task == GRAPH_TASK or index < self.num_layers - 1

    @property
    def output_prefix(self) -> str:
        return "head." if self.task == GRAPH_TASK else f"conv{self.num_layers - 1}."

    def parameters(self) -> list[Parameter]:
        """
        :return: All parameters in declaration order
        """
        return list(self._params.values())

    def parameter(self, name: str) -> Parameter:
        return self._params[name]

    def output_parameters(self) -> list[Parameter]:
        return [x for x in self.parameters() if x.name.startswith(self.output_prefix)]

    def feature_parameters(self) -> list[Parameter]:
        return [
            x for x in self.parameters() if not x.name.startswith(self.output_prefix)
        ]

    def buffers(self) -> list[tuple[str, np.ndarray]]:
        """
        :return: Batch norm running statistics in declaration order
        """
        result = []
        for name, state in self.norms.items():
            result.append((f"{name}.running_mean", state.running_mean))
            result.append((f"{name}.running_var", state.running_var))
        return result

    def _conv(self, index: int, h: Tensor, adj: Adjacency) -> Tensor:
        weight = self._params[f"conv{index}.weight"]
        bias = self._params[f"conv{index}.bias"]
        if self.kind == GnnLayerKind.GCN:
            return gcn_forward(h, adj, weight, bias)
        if self.kind == GnnLayerKind.SAGE:
            return sage_forward(h, adj, weight, bias)
        return gin_forward(h, adj, weight, self._params[f"conv{index}.eps"], bias)

    def forward(
        self,
        features: np.ndarray,
        adj: Adjacency,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
        sizes: Optional[Sequence[int]] = None,
    ) -> Tensor:
        """
        Compute the logits: one row per node for node tasks, one row per graph
        (as delimited by sizes) for graph tasks
        """
        if features.shape[1] != self.in_dim:
            raise InvalidInputException(
                f"Model expects {self.in_dim} features, got {features.shape[1]}"
            )
        h = Tensor(features)
        for index in range(self.num_layers):
            h = self._conv(index, h, adj)
            if not self._is_block(index):
                continue
            if self.use_batch_norm:
                h = batch_norm(
                    h,
                    self._params[f"norm{index}.gamma"],
                    self._params[f"norm{index}.beta"],
                    self.norms[f"norm{index}"],
                    train,
                )
            h = relu(h)
            h = dropout(h, self.dropout_p, rng, train)
        if self.task == GRAPH_TASK:
            pooled = mean_pool(h, [adj.num_nodes] if sizes is None else sizes)
            h = add_bias(
                matmul(pooled, self._params["head.weight"]), self._params["head.bias"]
            )
        return h

    def copy(self) -> "GnnModel":
        return copy.deepcopy(self)

    def checkpoint_meta(self) -> dict[str, Any]:
        return {
            "layer_kind": self.kind.value,
            "task": self.task,
            "in_dim": self.in_dim,
            "hidden_dim": self.hidden_dim,
            "out_dim": self.out_dim,
            "num_layers": self.num_layers,
            "dropout": self.dropout_p,
            "batch_norm": self.use_batch_norm,
            "parameters": [x.name for x in self.parameters()],
            "buffers": [name for name, _ in self.buffers()],
        }

    def save(self, path: Union[str, Path], **extra: Any) -> Path:
        """
        Write the model as a checkpoint; extra keys (seed, hyperparameters)
        are recorded in the meta file
        """
        tensors = [x.data for x in self.parameters()] + [x for _, x in self.buffers()]
        return save_checkpoint(path, {**self.checkpoint_meta(), **extra}, tensors)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "GnnModel":
        meta, tensors = load_checkpoint(path)
        try:
            model = cls(
                kind=meta["layer_kind"],
                in_dim=int(meta["in_dim"]),
                hidden_dim=int(meta["hidden_dim"]),
                out_dim=int(meta["out_dim"]),
                rng=make_rng(0),
                num_layers=int(meta["num_layers"]),
                task=meta["task"],
                dropout_p=float(meta["dropout"]),
                use_batch_norm=bool(meta["batch_norm"]),
            )
        except (KeyError, TypeError, ValueError, InvalidInputException) as exc:
            raise InvalidDatasetException(
                f"{path}: invalid checkpoint meta ({exc})"
            ) from exc
        names = [x.name for x in model.parameters()] + [
            name for name, _ in model.buffers()
        ]
        if list(meta.get("parameters", [])) + list(meta.get("buffers", [])) != names:
            raise InvalidDatasetException(
                f"{path}: checkpoint tensors do not match the model"
            )
        for param, value in zip(model.parameters(), tensors):
            if param.data.shape != value.shape:
                raise InvalidDatasetException(
                    f"{path}: {param.name} has shape {value.shape}, expected {param.data.shape}"
                )
            param.data = value
        for (name, buffer), value in zip(
            model.buffers(), tensors[len(model.parameters()) :]
        ):
            state = model.norms[name.rsplit(".", 1)[0]]
            if name.endswith("running_mean"):
                state.running_mean = value.reshape(buffer.shape)
            else:
                state.running_var = value.reshape(buffer.shape)
        return model

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}({self.kind.value}, {self.task},"
            f" {self.in_dim}->{self.hidden_dim}x{self.num_layers}->{self.out_dim})"
        )


def reinit_output_layer(
    model: GnnModel, rng: np.random.Generator, out_dim: Optional[int] = None
) -> GnnModel:
    """
    Replace the output layer with a fresh Glorot-uniform initialization, in
    place. Feature layers are left untouched.
    """
    if out_dim is not None:
        model.out_dim = out_dim
    for param in model.output_parameters():
        if param.name.endswith(".weight"):
            fan_in = param.data.shape[0]
            param.data = glorot_uniform(rng, fan_in, model.out_dim)
        elif param.name.endswith(".bias"):
            param.data = np.zeros((1, model.out_dim))
        else:
            param.data = np.zeros_like(param.data)
        param.zero_grad()
    return model


def freeze_feature_layers(model: GnnModel) -> GnnModel:
    """
    Mark every parameter but the output layer as non-trainable, in place.
    Batch norm layers keep their transferred running statistics.
    """
    for param in model.feature_parameters():
        param.trainable = False
    for state in model.norms.values():
        state.frozen = True
    return model
