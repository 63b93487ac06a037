"""
    SVG charts of learning curves and generator sweeps
"""

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

# pylint: disable=wrong-import-position
import numpy as np
from matplotlib import pyplot as plt

from .evaluation import LearningCurve
from .exceptions import AggregationException

log = logging.getLogger(__name__)


def mean_curve(
    curves: Sequence[LearningCurve],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    :return: epochs, mean and standard deviation of curves sharing one grid
    """
    if not curves:
        raise AggregationException("No curves to aggregate")
    epochs = curves[0].epochs
    for curve in curves[1:]:
        if not np.array_equal(curve.epochs, epochs):
            raise AggregationException("Curves are not measured on the same epochs")
    scores = np.stack([x.scores for x in curves])
    return epochs, scores.mean(axis=0), scores.std(axis=0)


def plot_curves(
    path: Path,
    series: dict[str, Sequence[LearningCurve]],
    title: str = "",
    ylabel: str = "score",
) -> Path:
    """
    Plot the mean of every series with a one standard deviation band
    """
    fig, ax = plt.subplots(figsize=(8, 5))
    try:
        for label, curves in series.items():
            epochs, mean, std = mean_curve(curves)
            ax.plot(epochs, mean, label=f"{label} ({len(curves)} runs)", linewidth=1)
            ax.fill_between(epochs, mean - std, mean + std, alpha=0.2)
        ax.set_xlabel("epoch")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(which="major", linestyle="dotted")
        ax.legend()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
    log.debug("Wrote %s", path)
    return path


def plot_sweep(
    path: Path, parameter: str, rows: Sequence[tuple[float, float, float]]
) -> Path:
    values = np.array([x[0] for x in rows])
    mean = np.array([x[1] for x in rows])
    std = np.array([x[2] for x in rows])
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        ax.errorbar(values, mean, yerr=std, marker="o", capsize=3)
        ax.set_xlabel(parameter)
        ax.set_ylabel("average degree" if parameter == "m" else "within inertia")
        ax.grid(which="major", linestyle="dotted")
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
    return path
