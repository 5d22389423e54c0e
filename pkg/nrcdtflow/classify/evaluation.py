"""
Accuracy and confusion matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .classifiers import EmptyInput, LengthMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EvalReport:
    """
    confusion[i, j] counts samples of class classes[i] predicted as classes[j].

    Row sums are the per-class sample counts; accuracy is trace / total.
    """

    accuracy: float
    confusion: np.ndarray
    classes: Tuple[int, ...]
    seed: int = 0
    runtime_s: float = 0.0

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def class_counts(self) -> Dict[int, int]:
        return {c: int(n) for c, n in zip(self.classes, self.confusion.sum(axis=1))}

    def confusion_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.confusion, index=list(self.classes), columns=list(self.classes))

    def normalized_confusion(self) -> np.ndarray:
        """Row-normalized confusion map with values in [0, 1]"""
        rows = self.confusion.sum(axis=1, keepdims=True).astype(float)
        rows[rows == 0] = 1.0
        return self.confusion / rows


def evaluate(
    predictions: Sequence[int],
    truth: Sequence[int],
    classes: Optional[Sequence[int]] = None,
    seed: int = 0,
    runtime_s: float = 0.0,
) -> EvalReport:
    predicted = np.asarray(predictions, dtype=np.int64).ravel()
    actual = np.asarray(truth, dtype=np.int64).ravel()
    if predicted.size != actual.size:
        raise LengthMismatch(f"{predicted.size} predictions for {actual.size} samples")
    if actual.size == 0:
        raise EmptyInput("nothing to evaluate")

    labels = sorted(int(c) for c in (classes if classes is not None else np.union1d(actual, predicted)))
    position = {c: i for i, c in enumerate(labels)}
    unknown = set(np.union1d(actual, predicted).tolist()) - set(position)
    if unknown:
        raise ValueError(f"labels outside the class list: {sorted(unknown)}")

    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    np.add.at(confusion, ([position[int(t)] for t in actual], [position[int(p)] for p in predicted]), 1)
    accuracy = float(np.trace(confusion)) / actual.size
    return EvalReport(accuracy=accuracy, confusion=confusion, classes=tuple(labels), seed=seed, runtime_s=runtime_s)


def aggregate(reports: Sequence[EvalReport]) -> Tuple[float, float]:
    """(mean, population std) of the accuracies"""
    if not reports:
        raise EmptyInput("no reports to aggregate")
    values = np.array([r.accuracy for r in reports])
    return float(values.mean()), float(values.std())
