"""
Brute-force Wasserstein oracles.

Only used to check the transforms: the 1-D distance comes from the monotone
(north-west corner) coupling of the sorted atoms, the 2-D distance from an
exhaustive search over assignments of equal-count uniform atoms. Neither shares
code with the quantile machinery in nrcdtflow.transforms.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .exceptions import NrcdtFlowError
from .transforms.measures import DiscreteMeasure1D, DiscreteMeasure2D

logger = logging.getLogger(__name__)

MAX_ASSIGNMENT_ATOMS = 8
# transfers below this are float residue of exhausted atoms
_RESIDUE = 1e-15


class OracleError(NrcdtFlowError, ValueError):
    pass


class TooManyAtoms(OracleError):
    pass


class NonUniform(OracleError):
    pass


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Sparse coupling: weights[i] moves from source[i] to target[i]"""

    source: np.ndarray
    target: np.ndarray
    weights: np.ndarray
    source_size: int
    target_size: int

    def marginals(self):
        rows = np.bincount(self.source, weights=self.weights, minlength=self.source_size)
        cols = np.bincount(self.target, weights=self.weights, minlength=self.target_size)
        return rows, cols


def monotone_plan(a: DiscreteMeasure1D, b: DiscreteMeasure1D) -> TransportPlan:
    """North-west corner coupling of two sorted 1-D measures"""
    sources, targets, weights = [], [], []
    i = j = 0
    left_a = float(a.masses[0])
    left_b = float(b.masses[0])
    while i < a.size and j < b.size:
        moved = min(left_a, left_b)
        if moved > _RESIDUE:
            sources.append(i)
            targets.append(j)
            weights.append(moved)
        left_a -= moved
        left_b -= moved
        if left_a <= _RESIDUE:
            i += 1
            if i < a.size:
                left_a = float(a.masses[i])
        if left_b <= _RESIDUE:
            j += 1
            if j < b.size:
                left_b = float(b.masses[j])
    return TransportPlan(
        source=np.asarray(sources, dtype=np.int64),
        target=np.asarray(targets, dtype=np.int64),
        weights=np.asarray(weights, dtype=float),
        source_size=a.size,
        target_size=b.size,
    )


def _check_order(p: Union[int, float]) -> float:
    if p == 2:
        return 2.0
    if p == float("inf"):
        return float("inf")
    raise OracleError(f"unsupported order p={p}; use 2 or inf")


def w_1d(a: DiscreteMeasure1D, b: DiscreteMeasure1D, p: Union[int, float] = 2) -> float:
    order = _check_order(p)
    plan = monotone_plan(a, b)
    gaps = np.abs(a.positions[plan.source] - b.positions[plan.target])
    if order == float("inf"):
        return float(gaps.max()) if gaps.size else 0.0
    return float(np.sqrt(np.sum(plan.weights * gaps * gaps)))


@lru_cache(maxsize=MAX_ASSIGNMENT_ATOMS)
def _permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def _uniform(m: DiscreteMeasure2D) -> bool:
    return bool(np.allclose(m.masses, 1.0 / m.size, rtol=0.0, atol=1e-12))


def w_2d_assignment(a: DiscreteMeasure2D, b: DiscreteMeasure2D, p: Union[int, float] = 2) -> float:
    """
    Exact W_2 / W_inf between uniform measures with n <= 8 atoms each.

    With equal uniform masses an optimal plan is a permutation, so the minimum
    over all n! assignments is the transport cost.
    """
    order = _check_order(p)
    n = a.size
    if n != b.size:
        raise NonUniform(f"atom counts differ: {n} vs {b.size}")
    if n > MAX_ASSIGNMENT_ATOMS:
        raise TooManyAtoms(f"{n} atoms exceed the brute-force limit of {MAX_ASSIGNMENT_ATOMS}")
    if not (_uniform(a) and _uniform(b)):
        raise NonUniform("assignment oracle needs uniform masses")

    distances = np.linalg.norm(a.points[:, np.newaxis, :] - b.points[np.newaxis, :, :], axis=2)
    perms = _permutations(n)
    paired = distances[np.arange(n), perms]
    if order == float("inf"):
        return float(paired.max(axis=1).min())
    return float(np.sqrt((paired * paired).mean(axis=1).min()))
