"""
Normalized R-CDT and its angle-free aggregates.

normalize_field standardizes every angle column of a QuantileField to rho-mean
0 and rho-std 1. Taking the pointwise maximum over angles gives the
max-normalized profile (mNR-CDT), the uniform average gives the
mean-normalized profile (aNR-CDT). Both are L-vectors.

The perturbation radii below bound how far those profiles move when the input
measure is perturbed in W_inf (max profile, sup-norm) or W_2 (mean profile,
rho-norm); the admissibility helpers evaluate the separability conditions for
pairs of template classes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..exceptions import NrcdtFlowError
from .cdt import QuantileField
from .measures import ArrayLike

logger = logging.getLogger(__name__)

# numerical stand-in for "dim(mu) > 1"
EPS_STD = 1e-12


class NormalizationError(NrcdtFlowError, ValueError):
    pass


class DegenerateDirection(NormalizationError):
    """A projected slice is (numerically) a Dirac: the support is collinear"""

    def __init__(self, index: int, std: float):
        self.index = index
        self.std = std
        super().__init__(f"direction {index} has std {std:.3e}; support is numerically one-dimensional")


class BudgetExceeded(NormalizationError):
    pass


class FeatureTag(str, Enum):
    """Representation tags"""
    MNRCDT = "mNRCDT"
    ANRCDT = "aNRCDT"
    RCDT_FLAT = "RCDT_flat"
    EUCLIDEAN_FLAT = "Euclidean_flat"


@dataclass(frozen=True, eq=False)
class NormalizedField:
    """Column-standardized field plus the raw per-angle moments"""

    values: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    source: QuantileField

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    tag: FeatureTag
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.ndim != 1:
            raise ValueError("feature vectors are one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature vector has non-finite entries")

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class RobustnessBudget:
    """
    Inputs of the perturbation radii.

    epsilon: perturbation radius (W_inf or W_2)
    c0: minimum per-angle std of the template's R-CDT
    diam: diameter of the template (needed by the W_inf radius only)
    """

    epsilon: float
    c0: float
    diam: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0 or self.c0 <= 0 or self.diam < 0:
            raise ValueError("budget needs epsilon >= 0, c0 > 0, diam >= 0")

    def check(self) -> None:
        if 2.0 * self.epsilon >= self.c0:
            raise BudgetExceeded(f"2*epsilon = {2 * self.epsilon:g} must stay below c0 = {self.c0:g}")


@dataclass(frozen=True)
class AdmissibilityReport:
    """Whether an affine matrix lies in the admissible set of the mean profile"""

    distortion: float
    bound: float

    @property
    def admissible(self) -> bool:
        return self.distortion <= self.bound


# ============================================================================
# Normalization
# ============================================================================

def _moments(values: np.ndarray):
    means = values.mean(axis=0)
    centred = values - means
    stds = np.sqrt(np.mean(centred * centred, axis=0))
    return means, centred, stds


def center_field(f: QuantileField) -> np.ndarray:
    """Zero-mean intermediate: each column minus its rho-mean"""
    return _moments(np.asarray(f.values, dtype=float))[1]


def normalize_field(f: QuantileField, std_floor: Optional[float] = None) -> NormalizedField:
    """
    Standardize every angle column to rho-mean 0 and rho-std 1.

    The guard rejects columns whose std does not exceed EPS_STD plus half the
    radial resolution of the field: a single atom splatted onto two bins has
    std at most half a bin.
    """
    values = np.asarray(f.values, dtype=float)
    means, centred, stds = _moments(values)
    floor = EPS_STD + f.resolution / 2.0 if std_floor is None else std_floor
    degenerate = np.flatnonzero(stds <= floor)
    if degenerate.size:
        j = int(degenerate[0])
        raise DegenerateDirection(j, float(stds[j]))
    normalized = centred / stds
    normalized.setflags(write=False)
    return NormalizedField(values=normalized, means=means, stds=stds, source=f)


def max_nrcdt(n: NormalizedField, provenance: Optional[Dict[str, Any]] = None) -> FeatureVector:
    return FeatureVector(n.values.max(axis=1), FeatureTag.MNRCDT, dict(provenance or {}))


def mean_nrcdt(n: NormalizedField, provenance: Optional[Dict[str, Any]] = None) -> FeatureVector:
    weights = n.source.angle_grid.weights
    return FeatureVector(n.values @ weights, FeatureTag.ANRCDT, dict(provenance or {}))


def min_std(f: QuantileField) -> float:
    """c0: minimum over the angles of the raw column std"""
    return float(_moments(np.asarray(f.values, dtype=float))[2].min())


def field_norm(n: NormalizedField) -> float:
    """||N||_{rho x u_S1}"""
    return float(np.sqrt(np.mean(n.values * n.values)))


# ============================================================================
# Perturbation radii and separability conditions
# ============================================================================

def winf_radius(budget: RobustnessBudget) -> float:
    """Sup-norm radius of the max profile under a W_inf perturbation of size epsilon"""
    budget.check()
    eps, c0 = budget.epsilon, budget.c0
    return 4.0 * eps * (budget.diam + 2.0 * eps) / (c0 * (c0 - 2.0 * eps))


def w2_radius(budget: RobustnessBudget) -> float:
    """rho-norm radius of the mean profile under a W_2 perturbation of size epsilon"""
    budget.check()
    return 4.0 * budget.epsilon / budget.c0


def singular_values(matrix: ArrayLike):
    s = np.linalg.svd(np.asarray(matrix, dtype=float).reshape(2, 2), compute_uv=False)
    return float(s.min()), float(s.max())


def affine_admissibility(
    matrix: ArrayLike,
    gap: float,
    c_mu: float,
    c_nu: float,
    c: float = 0.25,
) -> AdmissibilityReport:
    """
    (sigma_max - sigma_min) / sigma_min against c * gap / max(C_mu, C_nu).

    gap is the rho-distance of the two templates' mean profiles and C_mu, C_nu
    the field norms of their normalized fields; c must lie in (0, 1/2).
    """
    if not 0.0 < c < 0.5:
        raise ValueError("c must lie in (0, 1/2)")
    s_min, s_max = singular_values(matrix)
    if s_min <= 0:
        raise BudgetExceeded("matrix is singular")
    return AdmissibilityReport(distortion=(s_max - s_min) / s_min, bound=c * gap / max(c_mu, c_nu))


def max_separation_certified(
    epsilon: float,
    c_mu: float,
    diam_mu: float,
    c_nu: float,
    diam_nu: float,
    gap: float,
) -> bool:
    """
    Condition under which W_inf-perturbed affine classes of two templates stay
    linearly separable in max-profile space; gap is the sup-distance of the
    templates' max profiles.
    """
    if 2.0 * epsilon >= min(c_mu, c_nu):
        return False
    spread = winf_radius(RobustnessBudget(epsilon, c_mu, diam_mu)) + winf_radius(
        RobustnessBudget(epsilon, c_nu, diam_nu)
    )
    return spread < gap


def mean_perturbation_limit(
    c: float,
    c_prime: float,
    c_mu: float,
    c_nu: float,
    gap: float,
    norm_mu: float,
    norm_nu: float,
) -> float:
    """
    Largest W_2 perturbation (exclusive) for which admissible affine classes of
    two templates stay separable in mean-profile space.
    """
    if not 0.0 < c < c_prime < 0.5:
        raise ValueError("need 0 < c < c_prime < 1/2")
    big = max(norm_mu, norm_nu)
    small = min(c_mu, c_nu)
    limit = (c_prime - c) / 4.0 * small * (gap * big) / (c * gap + big)
    return float(min(limit, small / 2.0))


def profile_gap_sup(a: FeatureVector, b: FeatureVector) -> float:
    return float(np.abs(a.values - b.values).max())


def profile_gap_rho(a: FeatureVector, b: FeatureVector) -> float:
    diff = a.values - b.values
    return float(math.sqrt(float(np.mean(diff * diff))))
