"""
    Scores, learning curves, transfer metrics and significance testing
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, stats

from .exceptions import (
    DegenerateSampleException,
    InvalidInputException,
    UndefinedMetricException,
)

log = logging.getLogger(__name__)

ACCURACY = "accuracy"
ROC_AUC = "roc_auc"
DEFAULT_ALPHA = 0.1
DEFAULT_TAIL = 10


def accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if predicted.shape != labels.shape:
        raise InvalidInputException(
            f"{predicted.shape[0]} predictions for {labels.shape[0]} labels"
        )
    if labels.size == 0:
        raise UndefinedMetricException("Accuracy of an empty set")
    return float(np.mean(predicted == labels))


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """
    Probability that a random positive scores higher than a random negative,
    ties counting one half. Computed from the Mann-Whitney rank statistic
    with average ranks for ties.

    Raises:
        UndefinedMetricException: unless both classes are present
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    positive = np.asarray(labels).ravel() == 1
    if scores.shape != positive.shape:
        raise InvalidInputException(
            f"{scores.shape[0]} scores for {positive.shape[0]} labels"
        )
    n_pos = int(positive.sum())
    n_neg = int(positive.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricException(
            "ROC-AUC needs both positive and negative samples"
        )
    ranks = stats.rankdata(scores, method="average")
    statistic = float(ranks[positive].sum()) - n_pos * (n_pos + 1) / 2.0
    return statistic / (n_pos * n_neg)


@dataclass(frozen=True, eq=False)
class LearningCurve:
    """
    Scores of one run on one split, measured at strictly increasing epochs
    """

    epochs: np.ndarray
    scores: np.ndarray
    metric: str = ACCURACY

    def __post_init__(self) -> None:
        if self.epochs.shape != self.scores.shape or self.epochs.ndim != 1:
            raise InvalidInputException(
                "Curve epochs and scores must be matching vectors"
            )
        if (np.diff(self.epochs) <= 0).any():
            raise InvalidInputException("Curve epochs must be strictly increasing")

    @classmethod
    def from_points(
        cls, points: Sequence[tuple[float, float]], metric: str = ACCURACY
    ) -> "LearningCurve":
        array = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        return cls(array[:, 0].copy(), array[:, 1].copy(), metric)

    def __len__(self) -> int:
        return int(self.epochs.shape[0])

    def score_at(self, epoch: float) -> float:
        matches = np.flatnonzero(self.epochs == epoch)
        if not matches.size:
            raise InvalidInputException(f"Curve has no point at epoch {epoch}")
        return float(self.scores[matches[0]])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LearningCurve):
            return False
        return (
            self.metric == other.metric
            and np.array_equal(self.epochs, other.epochs)
            and np.array_equal(self.scores, other.scores)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.metric}, {len(self)} points)"


def auc_trapezoid(curve: LearningCurve) -> float:
    """
    :return: Area under the curve by the trapezoidal rule over the epoch axis
    """
    if len(curve) < 2:
        raise InvalidInputException("Area under a curve needs at least two points")
    return float(integrate.trapezoid(curve.scores, curve.epochs))


def _same_grid(first: LearningCurve, second: LearningCurve) -> None:
    if not np.array_equal(first.epochs, second.epochs):
        raise InvalidInputException("Curves are not measured on the same epochs")


def transfer_ratio(transfer: LearningCurve, base: LearningCurve) -> float:
    """
    :return: (AUC_transfer - AUC_base) / AUC_base, 0 meaning no transfer
    """
    _same_grid(transfer, base)
    base_area = auc_trapezoid(base)
    if base_area == 0:
        raise UndefinedMetricException(
            "Transfer ratio is undefined for a base curve of zero area"
        )
    return (auc_trapezoid(transfer) - base_area) / base_area


def jumpstart(transfer: LearningCurve, base: LearningCurve) -> float:
    """
    :return: Score difference before any training on the target task
    """
    return transfer.score_at(0) - base.score_at(0)


def asymptotic_performance(
    transfer: LearningCurve, base: LearningCurve, tail: int = DEFAULT_TAIL
) -> float:
    """
    :return: Difference of the mean of the last `tail` scores of both curves
    """
    if tail < 1 or len(transfer) < tail or len(base) < tail:
        raise InvalidInputException(f"Curves need at least {tail} points")
    return float(np.mean(transfer.scores[-tail:]) - np.mean(base.scores[-tail:]))


@dataclass(frozen=True)
class TransferMetrics:
    transfer_ratio: float
    jumpstart: float
    asymptotic: float

    def as_dict(self) -> dict[str, float]:
        return {
            "transfer_ratio": self.transfer_ratio,
            "jumpstart": self.jumpstart,
            "asymptotic": self.asymptotic,
        }


METRIC_NAMES = ("transfer_ratio", "jumpstart", "asymptotic")


def transfer_metrics(
    transfer: LearningCurve, base: LearningCurve, tail: int = DEFAULT_TAIL
) -> TransferMetrics:
    result = TransferMetrics(
        transfer_ratio=transfer_ratio(transfer, base),
        jumpstart=jumpstart(transfer, base),
        asymptotic=asymptotic_performance(transfer, base, tail),
    )
    if not all(math.isfinite(x) for x in result.as_dict().values()):
        raise UndefinedMetricException(f"Non-finite transfer metrics {result}")
    return result


@dataclass(frozen=True)
class TTestResult:
    t: float
    dof: float
    p_value: float
    alpha: float
    significant: bool


def welch_t_greater(
    sample_a: Union[Sequence[float], np.ndarray],
    sample_b: Union[Sequence[float], np.ndarray],
    alpha: float = DEFAULT_ALPHA,
) -> TTestResult:
    """
    One-sided Welch test of mean(a) > mean(b) with unequal variances and
    Welch-Satterthwaite degrees of freedom.

    Raises:
        DegenerateSampleException: if a sample has fewer than two values or
            both samples have zero variance
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise DegenerateSampleException(
            "Welch test needs at least two values per sample"
        )
    var_a = float(np.var(a, ddof=1)) / a.size
    var_b = float(np.var(b, ddof=1)) / b.size
    if var_a + var_b == 0:
        raise DegenerateSampleException("Welch test on samples without variance")
    t_value = (float(np.mean(a)) - float(np.mean(b))) / math.sqrt(var_a + var_b)
    dof = (var_a + var_b) ** 2 / (var_a**2 / (a.size - 1) + var_b**2 / (b.size - 1))
    p_value = float(stats.t.sf(t_value, dof))
    return TTestResult(
        t=t_value,
        dof=dof,
        p_value=p_value,
        alpha=alpha,
        significant=p_value < alpha,
    )
