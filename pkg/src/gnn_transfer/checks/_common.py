"""
    Helpers shared by the node graph and graph dataset checks
"""

from collections.abc import Iterator

import numpy as np

from ..graph import SPLITS, TEST, TRAIN
from . import CheckResult, Fail, Warn


def split_problems(split: np.ndarray, what: str) -> Iterator[CheckResult]:
    for tag in SPLITS:
        count = int(np.count_nonzero(split == tag))
        if count:
            continue
        if tag in (TRAIN, TEST):
            yield Fail(f"The {tag} split has no {what}")
        else:
            yield Warn(f"The {tag} split has no {what}")


def coverage_problems(
    labels: np.ndarray, split: np.ndarray, num_classes: int
) -> Iterator[CheckResult]:
    present = set(np.unique(labels).tolist())
    missing = sorted(set(range(num_classes)) - present)
    if missing:
        yield Warn(f"Classes {missing} have no members")
    in_train = set(np.unique(labels[split == TRAIN]).tolist())
    untrained = sorted(present - in_train)
    if untrained:
        yield Warn(f"Classes {untrained} are missing from the {TRAIN} split")


def metric_problems(
    labels: np.ndarray, split: np.ndarray, num_classes: int
) -> Iterator[CheckResult]:
    if num_classes != 2:
        return
    for tag in SPLITS:
        selected = labels[split == tag]
        if selected.size and np.unique(selected).size < 2:
            yield Fail(
                f"ROC-AUC is undefined on the {tag} split: only one class present"
            )


def feature_problems(features: np.ndarray) -> Iterator[CheckResult]:
    if not np.isfinite(features).all():
        yield Fail("Features contain NaN or infinite values")
        return
    if features.shape[0] > 1 and np.all(features == features[0]):
        yield Warn("All feature vectors are identical")
