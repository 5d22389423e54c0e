"""
Discrete probability measures in 1-D and 2-D.

Images become atomic measures with one atom per nonzero pixel, placed at the
pixel centre of the square domain [-h, h]^2 (h = 1/sqrt(2) by default, whose
corners touch the unit circle). The 1-D measures carry their cumulative sums so
that CDF and quantile evaluation is a binary search.

The reference measure is the uniform law on [0, 1], sampled at the midpoints
t_k = (k - 0.5) / L; every rho-integral downstream is the midpoint rule on
that grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from ..exceptions import NrcdtFlowError

logger = logging.getLogger(__name__)

DOMAIN_HALF_WIDTH = 1.0 / math.sqrt(2.0)
MASS_TOLERANCE = 1e-12

# pdist on more atoms than this goes through the convex hull first
_PDIST_LIMIT = 2048

ArrayLike = Union[np.ndarray, list, tuple]


class MeasureError(NrcdtFlowError, ValueError):
    """Invalid measure construction or query"""
    pass


class AllZeroImage(MeasureError):
    pass


class NegativePixel(MeasureError):
    pass


class NonFinitePixel(MeasureError):
    pass


class EmptyMeasure(MeasureError):
    pass


class ArgOutOfRange(MeasureError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _checked_masses(masses: np.ndarray) -> np.ndarray:
    if masses.size == 0:
        raise EmptyMeasure("measure needs at least one atom")
    if not np.all(np.isfinite(masses)):
        raise MeasureError("masses must be finite")
    if np.any(masses < 0):
        raise MeasureError("masses must be nonnegative")
    total = masses.sum()
    if total <= 0:
        raise EmptyMeasure("total mass must be positive")
    return masses / total


# ============================================================================
# 1-D measures
# ============================================================================

@dataclass(frozen=True, eq=False)
class DiscreteMeasure1D:
    """Sorted atoms on the line; positions strictly increasing, masses sum to 1"""

    positions: np.ndarray
    masses: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_atoms(cls, positions: ArrayLike, masses: ArrayLike) -> "DiscreteMeasure1D":
        """
        Build a probability measure from unsorted atoms.

        Masses are normalized to total 1, zero-mass atoms are dropped and atoms
        at exactly equal positions are merged.
        """
        pos = np.asarray(positions, dtype=float).ravel()
        mass = np.asarray(masses, dtype=float).ravel()
        if pos.shape != mass.shape:
            raise MeasureError(f"positions {pos.shape} and masses {mass.shape} differ in shape")
        if not np.all(np.isfinite(pos)):
            raise MeasureError("positions must be finite")
        mass = _checked_masses(mass)

        keep = mass > 0
        pos, mass = pos[keep], mass[keep]
        unique, inverse = np.unique(pos, return_inverse=True)
        merged = np.bincount(inverse, weights=mass, minlength=unique.size)

        cumulative = np.cumsum(merged)
        cumulative[-1] = 1.0
        return cls(_frozen(unique), _frozen(merged), _frozen(cumulative))

    @classmethod
    def dirac(cls, position: float) -> "DiscreteMeasure1D":
        return cls.from_atoms([position], [1.0])

    @property
    def size(self) -> int:
        return int(self.positions.size)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def pushforward(self, scale: float, shift: float) -> "DiscreteMeasure1D":
        """Image under s -> scale * s + shift"""
        return DiscreteMeasure1D.from_atoms(scale * self.positions + shift, self.masses)

    def __repr__(self) -> str:
        return f"DiscreteMeasure1D(atoms={self.size})"


def cdf(m: DiscreteMeasure1D, s: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """F(s) = m((-inf, s]); right-continuous step function"""
    values = np.asarray(s, dtype=float)
    index = np.searchsorted(m.positions, values, side="right")
    padded = np.concatenate(([0.0], m.cumulative))
    result = padded[index]
    if result.ndim == 0:
        return float(result)
    return result


def quantile(
    m: DiscreteMeasure1D,
    t: Union[float, np.ndarray],
    side: str = "right",
) -> Union[float, np.ndarray]:
    """
    Generalized inverse of the CDF.

    side="right": inf{s : F(s) > t}  (the CDT convention)
    side="left":  inf{s : F(s) >= t}

    The two differ only at t equal to a cumulative value.
    """
    values = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ArgOutOfRange("quantile argument must lie in the open interval (0, 1)")
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")

    index = np.searchsorted(m.cumulative, values, side=side)
    index = np.minimum(index, m.size - 1)
    result = m.positions[index]
    if result.ndim == 0:
        return float(result)
    return result


# ============================================================================
# Reference measure and rho-moments
# ============================================================================

@dataclass(frozen=True)
class ReferenceMeasure:
    """Uniform law on [0, 1] sampled at t_k = (k - 0.5) / L"""

    points: int = 64

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("reference grid needs at least 2 points")

    @cached_property
    def grid(self) -> np.ndarray:
        grid = (np.arange(1, self.points + 1, dtype=float) - 0.5) / self.points
        return _frozen(grid)

    def cdf(self, t: np.ndarray) -> np.ndarray:
        """F_rho, identity on [0, 1]"""
        return np.clip(np.asarray(t, dtype=float), 0.0, 1.0)

    def moments(self, g: ArrayLike) -> Tuple[float, float]:
        return rho_moments(g)

    def rho_norm(self, g: ArrayLike, axis: Optional[int] = None) -> Union[float, np.ndarray]:
        values = np.asarray(g, dtype=float)
        norm = np.sqrt(np.mean(values * values, axis=axis))
        if np.ndim(norm) == 0:
            return float(norm)
        return norm


def rho_moments(g: ArrayLike) -> Tuple[float, float]:
    """Midpoint-rule mean and standard deviation against the uniform reference"""
    values = np.asarray(g, dtype=float).ravel()
    if values.size < 2:
        raise ValueError("rho_moments needs at least 2 grid values")
    mean = float(values.mean())
    if np.all(values == values[0]):
        return mean, 0.0
    std = float(np.sqrt(np.mean((values - mean) ** 2)))
    return mean, std


# ============================================================================
# 2-D measures
# ============================================================================

@dataclass(frozen=True, eq=False)
class DiscreteMeasure2D:
    """
    Nonnegative atoms on 2-D points, total mass 1.

    Measures created from images remember the raster they came from
    (grid_shape / pixel_index) so the flat Euclidean representation can be
    rebuilt.
    """

    points: np.ndarray
    masses: np.ndarray
    grid_shape: Optional[Tuple[int, int]] = None
    pixel_index: Optional[np.ndarray] = None
    domain_half_width: float = DOMAIN_HALF_WIDTH

    @classmethod
    def from_atoms(cls, points: ArrayLike, masses: Optional[ArrayLike] = None) -> "DiscreteMeasure2D":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise MeasureError(f"points must have shape (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise MeasureError("points must be finite")
        if masses is None:
            mass = np.full(pts.shape[0], 1.0)
        else:
            mass = np.asarray(masses, dtype=float).ravel()
        if mass.shape[0] != pts.shape[0]:
            raise MeasureError("points and masses differ in length")
        mass = _checked_masses(mass)
        keep = mass > 0
        return cls(_frozen(pts[keep].copy()), _frozen(mass[keep].copy()))

    @property
    def size(self) -> int:
        return int(self.masses.size)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def support_radius(self) -> float:
        return float(np.sqrt((self.points ** 2).sum(axis=1)).max())

    def pushforward(self, matrix: ArrayLike, offset: ArrayLike = (0.0, 0.0)) -> "DiscreteMeasure2D":
        """Image under x -> A x + y (raster provenance is dropped)"""
        a = np.asarray(matrix, dtype=float).reshape(2, 2)
        y = np.asarray(offset, dtype=float).reshape(2)
        return DiscreteMeasure2D.from_atoms(self.points @ a.T + y, self.masses)

    def to_raster(self) -> np.ndarray:
        """Mass grid of an image-derived measure"""
        if self.grid_shape is None or self.pixel_index is None:
            raise MeasureError("measure was not created from an image")
        raster = np.zeros(self.grid_shape[0] * self.grid_shape[1])
        raster[self.pixel_index] = self.masses
        return raster.reshape(self.grid_shape)

    def __repr__(self) -> str:
        return f"DiscreteMeasure2D(atoms={self.size}, grid={self.grid_shape})"


def uniform_atoms(points: ArrayLike) -> DiscreteMeasure2D:
    """Equal mass 1/n on each of the n points"""
    return DiscreteMeasure2D.from_atoms(points)


def pixel_centers(
    shape: Tuple[int, int], domain_half_width: float = DOMAIN_HALF_WIDTH
) -> Tuple[np.ndarray, np.ndarray]:
    """x (column, rightwards) and y (row, upwards) coordinates of every pixel centre"""
    rows, cols = shape
    h = domain_half_width
    xs = (np.arange(cols) + 0.5) * (2.0 * h / cols) - h
    ys = h - (np.arange(rows) + 0.5) * (2.0 * h / rows)
    return np.meshgrid(xs, ys)


def image_to_measure(pixels: ArrayLike, domain_half_width: float = DOMAIN_HALF_WIDTH) -> DiscreteMeasure2D:
    """
    Normalize gray values into an atomic probability measure.

    One atom per nonzero pixel at its centre, mass = pixel / total.
    """
    image = np.asarray(pixels, dtype=float)
    if image.ndim != 2:
        raise MeasureError(f"expected a 2-D pixel grid, got shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise NonFinitePixel("image contains NaN or infinite values")
    if np.any(image < 0):
        raise NegativePixel("image contains negative pixels")
    total = image.sum()
    if total <= 0:
        raise AllZeroImage("image has zero total mass")

    xx, yy = pixel_centers(image.shape, domain_half_width)
    flat = image.ravel()
    index = np.flatnonzero(flat)
    points = np.column_stack((xx.ravel()[index], yy.ravel()[index]))
    masses = flat[index] / total
    return DiscreteMeasure2D(
        points=_frozen(points),
        masses=_frozen(masses),
        grid_shape=(int(image.shape[0]), int(image.shape[1])),
        pixel_index=_frozen(index),
        domain_half_width=domain_half_width,
    )


def diameter(m: DiscreteMeasure2D) -> float:
    """Largest pairwise distance over the support (exact for atoms)"""
    points = m.points
    if points.shape[0] < 2:
        return 0.0
    if points.shape[0] > _PDIST_LIMIT:
        try:
            points = points[ConvexHull(points).vertices]
        except QhullError:
            # collinear support: the extremes along the spread direction suffice
            centred = points - points.mean(axis=0)
            direction = np.linalg.svd(centred, full_matrices=False)[2][0]
            along = centred @ direction
            points = points[[int(np.argmin(along)), int(np.argmax(along))]]
    return float(pdist(points).max())
