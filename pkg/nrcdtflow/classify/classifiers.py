"""
Classifiers on feature vectors.

- nearest_template: label of the closest template (NT classification)
- knn: majority vote among the k nearest references
- linear_probe: perceptron check for linear separability of two classes

Tie rules are deterministic: equal distances go to the lower class label (NT)
or the lower reference index (k-NN), tied votes to the lower class label.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Union

import numpy as np

from ..exceptions import NrcdtFlowError
from ..parallel import parallel_map
from ..transforms.nrcdt import FeatureVector

if TYPE_CHECKING:
    from .features import FeatureSet

logger = logging.getLogger(__name__)

DEFAULT_PROBE_EPOCHS = 1000


class ClassifyError(NrcdtFlowError):
    pass


class EmptyTemplateSet(ClassifyError, ValueError):
    pass


class LengthMismatch(ClassifyError, ValueError):
    pass


class EmptyInput(LengthMismatch):
    pass


class KTooLarge(ClassifyError, ValueError):
    pass


class Metric(str, Enum):
    L2 = "l2"
    LINF = "linf"


Query = Union[FeatureVector, np.ndarray]


def _as_array(query: Query) -> np.ndarray:
    values = query.values if isinstance(query, FeatureVector) else query
    return np.asarray(values, dtype=float).ravel()


def distances(query: Query, refs: np.ndarray, metric: Metric = Metric.L2) -> np.ndarray:
    """Distance of `query` to every row of `refs`"""
    q = _as_array(query)
    refs = np.asarray(refs, dtype=float)
    if refs.ndim != 2 or refs.shape[1] != q.size:
        raise LengthMismatch(f"query of length {q.size} against references of shape {refs.shape}")
    diff = refs - q
    if Metric(metric) is Metric.LINF:
        return np.abs(diff).max(axis=1)
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


# ============================================================================
# Nearest template / k-NN
# ============================================================================

def nearest_template(query: Query, templates: "FeatureSet") -> int:
    if len(templates) == 0:
        raise EmptyTemplateSet("no templates to compare against")
    d = distances(query, templates.vectors, templates.metric)
    best = np.lexsort((templates.labels, d))[0]
    return int(templates.labels[best])


def knn(query: Query, refs: "FeatureSet", k: int) -> int:
    if len(refs) == 0:
        raise EmptyTemplateSet("no reference vectors")
    if k < 1:
        raise ValueError("k must be positive")
    if k > len(refs):
        raise KTooLarge(f"k = {k} exceeds the {len(refs)} reference vectors")
    d = distances(query, refs.vectors, refs.metric)
    order = np.lexsort((np.arange(d.size), d))[:k]
    voters, counts = np.unique(refs.labels[order], return_counts=True)
    return int(voters[np.flatnonzero(counts == counts.max())[0]])


def _rows(queries) -> np.ndarray:
    vectors = queries.vectors if hasattr(queries, "vectors") else np.asarray(queries, dtype=float)
    return np.atleast_2d(vectors)


def predict_nearest_template(queries, templates: "FeatureSet", max_workers: int = 1) -> np.ndarray:
    rows = _rows(queries)
    return np.asarray(parallel_map(lambda q: nearest_template(q, templates), list(rows), max_workers), dtype=np.int64)


def predict_knn(queries, refs: "FeatureSet", k: int, max_workers: int = 1) -> np.ndarray:
    rows = _rows(queries)
    return np.asarray(parallel_map(lambda q: knn(q, refs, k), list(rows), max_workers), dtype=np.int64)


# ============================================================================
# Linear probe
# ============================================================================

@dataclass(frozen=True, eq=False)
class ProbeResult:
    """
    separable: the perceptron reached zero training errors
    margin: min over samples of the signed distance to the final hyperplane
        (positive on the correct side), in the original feature coordinates
    """

    separable: bool
    margin: float
    weights: np.ndarray
    bias: float
    epochs: int


def _features(data) -> np.ndarray:
    return np.atleast_2d(np.asarray(data.vectors if hasattr(data, "vectors") else data, dtype=float))


def linear_probe(a, b, max_epochs: int = DEFAULT_PROBE_EPOCHS) -> ProbeResult:
    """
    Perceptron on class a (+1) against class b (-1).

    Features are standardized per coordinate before training; samples are
    visited in a fixed order, so the result is deterministic.
    """
    xa, xb = _features(a), _features(b)
    if xa.shape[0] == 0 or xb.shape[0] == 0:
        raise EmptyInput("both classes need at least one sample")
    if xa.shape[1] != xb.shape[1]:
        raise LengthMismatch(f"feature lengths differ: {xa.shape[1]} vs {xb.shape[1]}")

    x = np.vstack((xa, xb))
    y = np.concatenate((np.ones(xa.shape[0]), -np.ones(xb.shape[0])))
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    z = np.hstack(((x - mean) / scale, np.ones((x.shape[0], 1))))

    w = np.zeros(z.shape[1])
    converged = False
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        mistakes = 0
        for zi, yi in zip(z, y):
            if yi * (zi @ w) <= 0.0:
                w += yi * zi
                mistakes += 1
        if mistakes == 0:
            converged = True
            break

    weights = w[:-1] / scale
    bias = float(w[-1] - np.sum(w[:-1] * mean / scale))
    norm = float(np.linalg.norm(weights))
    if norm == 0.0:
        margin = 0.0
    else:
        margin = float(np.min(y * (x @ weights + bias)) / norm)
    separable = converged and margin > 0.0
    logger.debug(f"Linear probe: separable={separable} margin={margin:.4g} after {epoch} epochs")
    return ProbeResult(separable=separable, margin=margin, weights=weights, bias=bias, epochs=epoch)
