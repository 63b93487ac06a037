"""
    Training loops recording learning curves
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .evaluation import ACCURACY, ROC_AUC, LearningCurve, accuracy, roc_auc
from .exceptions import InvalidInputException
from .graph import SPLITS, TRAIN, GraphDataset, NodeGraph
from .layers import GRAPH_TASK, NODE_TASK, GnnModel, GraphBatch, collate
from .nn import Adam, Tensor, binary_logistic_loss, softmax_cross_entropy, take_rows

log = logging.getLogger(__name__)

Dataset = Union[NodeGraph, GraphDataset]


@dataclass
class RunRecord:
    """
    Outcome of one training run: a curve per split, measured on the same epochs
    """

    run_id: int
    seed: int
    curves: dict[str, LearningCurve]
    checkpoint: Optional[Path] = None
    wall_time: float = 0.0
    arm: str = "base"
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def final_scores(self) -> dict[str, float]:
        return {split: float(curve.scores[-1]) for split, curve in self.curves.items()}


def task_of(dataset: Dataset) -> str:
    return NODE_TASK if isinstance(dataset, NodeGraph) else GRAPH_TASK


def output_dim(num_classes: int) -> int:
    """
    Binary tasks use a single logit, everything else one logit per class
    """
    return 1 if num_classes == 2 else num_classes


def metric_of(model: GnnModel) -> str:
    return ROC_AUC if model.out_dim == 1 else ACCURACY


def _loss(logits: Tensor, labels: np.ndarray) -> Tensor:
    if logits.shape[1] == 1:
        return binary_logistic_loss(logits, labels)
    return softmax_cross_entropy(logits, labels)


def _score(logits: np.ndarray, labels: np.ndarray, metric: str) -> float:
    if metric == ROC_AUC:
        return roc_auc(logits[:, 0], labels)
    return accuracy(np.argmax(logits, axis=1), labels)


def check_compatible(model: GnnModel, dataset: Dataset) -> None:
    if model.task != task_of(dataset):
        raise InvalidInputException(f"{model!r} can't be trained on {dataset!r}")
    if model.in_dim != dataset.num_features:
        raise InvalidInputException(
            f"{model!r} expects {model.in_dim} features, dataset has {dataset.num_features}"
        )
    if model.out_dim != output_dim(dataset.num_classes):
        raise InvalidInputException(
            f"{model!r} has {model.out_dim} outputs, dataset has {dataset.num_classes} classes"
        )


class Evaluator:
    """
    Scores a model on every split of a dataset. Graph datasets are collated
    once per split.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._batches: dict[str, GraphBatch] = {}
        if isinstance(dataset, GraphDataset):
            for split in SPLITS:
                indices = dataset.indices(split)
                if indices.size:
                    self._batches[split] = collate([dataset[i] for i in indices])

    def __call__(self, model: GnnModel) -> dict[str, float]:
        metric = metric_of(model)
        scores = {}
        if isinstance(self.dataset, NodeGraph):
            logits = model.forward(self.dataset.features, self.dataset.adj).data
            for split in SPLITS:
                mask = self.dataset.mask(split)
                if mask.any():
                    scores[split] = _score(
                        logits[mask], self.dataset.labels[mask], metric
                    )
            return scores
        for split, batch in self._batches.items():
            logits = model.forward(batch.features, batch.adj, sizes=batch.sizes).data
            scores[split] = _score(logits, batch.labels, metric)
        return scores


def train_epoch(
    model: GnnModel,
    dataset: Dataset,
    optimizer: Adam,
    rng: np.random.Generator,
    batch_size: int = 32,
) -> float:
    """
    One pass over the training split: a single full-batch step for node tasks,
    shuffled mini-batches of disjoint graph unions for graph tasks

    :return: the mean training loss
    """
    if isinstance(dataset, NodeGraph):
        rows = np.flatnonzero(dataset.mask(TRAIN))
        if not rows.size:
            raise InvalidInputException("Empty training split")
        logits = model.forward(dataset.features, dataset.adj, train=True, rng=rng)
        loss = _loss(take_rows(logits, rows), dataset.labels[rows])
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        return loss.item()
    indices = rng.permutation(dataset.indices(TRAIN))
    if not indices.size:
        raise InvalidInputException("Empty training split")
    losses = []
    for start in range(0, indices.size, batch_size):
        batch = collate([dataset[i] for i in indices[start : start + batch_size]])
        logits = model.forward(
            batch.features, batch.adj, train=True, rng=rng, sizes=batch.sizes
        )
        loss = _loss(logits, batch.labels)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        losses.append(loss.item())
    return float(np.mean(losses))


def train(
    model: GnnModel,
    dataset: Dataset,
    epochs: int,
    lr: float,
    rng: np.random.Generator,
    eval_every: int = 1,
    batch_size: int = 32,
) -> dict[str, LearningCurve]:
    """
    Train a model in place with Adam, scoring every split before the first
    update (epoch 0), every eval_every epochs and after the last epoch

    :return: one learning curve per split present in the dataset
    """
    check_compatible(model, dataset)
    evaluate = Evaluator(dataset)
    optimizer = Adam(model.parameters(), lr=lr)
    points: dict[str, list[tuple[float, float]]] = {}

    def record(epoch: int) -> None:
        for split, score in evaluate(model).items():
            points.setdefault(split, []).append((epoch, score))

    record(0)
    for epoch in range(1, epochs + 1):
        loss = train_epoch(model, dataset, optimizer, rng, batch_size)
        if epoch % eval_every == 0 or epoch == epochs:
            record(epoch)
            log.debug(
                "Epoch %d: loss %.5f, %s",
                epoch,
                loss,
                {k: v[-1][1] for k, v in points.items()},
            )
    metric = metric_of(model)
    return {split: LearningCurve.from_points(x, metric) for split, x in points.items()}


def timed_train(
    model: GnnModel,
    dataset: Dataset,
    epochs: int,
    lr: float,
    rng: np.random.Generator,
    eval_every: int = 1,
    batch_size: int = 32,
) -> tuple[dict[str, LearningCurve], float]:
    started = time.perf_counter()
    curves = train(model, dataset, epochs, lr, rng, eval_every, batch_size)
    return curves, time.perf_counter() - started
