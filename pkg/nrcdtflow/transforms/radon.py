"""
Mass-preserving discrete Radon transform of atomic 2-D measures.

The restricted transform R_theta[mu] is the pushforward of mu under
x -> <x, theta>; for atomic measures it is exact. The sinogram bins every
slice onto R equispaced radial centres in [-1, 1] by linear splatting onto the
two nearest centres, which keeps the mass of every slice and is the exact
adjoint of linear interpolation on the radial grid (see back_project_grid).

Angles cover the full circle [0, 2pi); for even M the second half of the
directions is the exact negation of the first half, so the slice at theta + pi
is the reflection of the slice at theta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import NrcdtFlowError
from ..parallel import parallel_map
from .measures import ArrayLike, DiscreteMeasure1D, DiscreteMeasure2D

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12


class RadonError(NrcdtFlowError, ValueError):
    pass


class NonUnitDirection(RadonError):
    pass


class SupportOutsideDisc(RadonError):
    pass


class QueryOutsideGrid(RadonError):
    pass


class SingularMatrix(RadonError):
    pass


def _unit(theta: ArrayLike) -> np.ndarray:
    direction = np.asarray(theta, dtype=float).reshape(2)
    if abs(float(np.hypot(direction[0], direction[1])) - 1.0) > UNIT_TOLERANCE:
        raise NonUnitDirection(f"direction {direction.tolist()} is not unit-norm")
    return direction


def direction(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


@dataclass(frozen=True)
class AngleGrid:
    """M equispaced angles 2*pi*j/M on the full circle with uniform weights 1/M"""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("angle grid needs at least one angle")

    @cached_property
    def angles(self) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(self.count) / self.count
        angles.setflags(write=False)
        return angles

    @cached_property
    def directions(self) -> np.ndarray:
        dirs = np.column_stack((np.cos(self.angles), np.sin(self.angles)))
        if self.count % 2 == 0:
            half = self.count // 2
            dirs[half:] = -dirs[:half]
        dirs.setflags(write=False)
        return dirs

    @cached_property
    def weights(self) -> np.ndarray:
        weights = np.full(self.count, 1.0 / self.count)
        weights.setflags(write=False)
        return weights


@dataclass(frozen=True)
class RadialGrid:
    """R equispaced bin centres in [-1, 1], end points included"""

    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("radial grid needs at least two bins")

    @property
    def spacing(self) -> float:
        return 2.0 / (self.count - 1)

    @property
    def center_index(self) -> float:
        return (self.count - 1) / 2.0

    @cached_property
    def centers(self) -> np.ndarray:
        centers = np.linspace(-1.0, 1.0, self.count)
        centers.setflags(write=False)
        return centers


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Binned Radon transform: masses[j, i] is the mass of angle j at radial bin i"""

    angle_grid: AngleGrid
    radial_grid: RadialGrid
    masses: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.angle_grid.count, self.radial_grid.count

    @property
    def resolution(self) -> float:
        return self.radial_grid.spacing

    def slice(self, j: int) -> DiscreteMeasure1D:
        return DiscreteMeasure1D.from_atoms(self.radial_grid.centers, self.masses[j])

    def slice_masses(self) -> np.ndarray:
        return self.masses.sum(axis=1)


# ============================================================================
# Operations
# ============================================================================

def restricted_slice(m: DiscreteMeasure2D, theta: ArrayLike) -> DiscreteMeasure1D:
    """(S_theta)_# m with S_theta(x) = <x, theta>, no binning"""
    unit = _unit(theta)
    return DiscreteMeasure1D.from_atoms(m.points @ unit, m.masses)


def exact_slices(m: DiscreteMeasure2D, grid: AngleGrid) -> List[DiscreteMeasure1D]:
    """Un-binned restricted slices for every angle of the grid"""
    projections = m.points @ grid.directions.T
    return [DiscreteMeasure1D.from_atoms(projections[:, j], m.masses) for j in range(grid.count)]


def _splat_block(
    projections: np.ndarray,
    masses: np.ndarray,
    radial: RadialGrid,
) -> np.ndarray:
    """Linear splatting of a block of angles (columns of projections)"""
    n_angles = projections.shape[1]
    bins = radial.count
    frac = projections / radial.spacing + radial.center_index
    frac = np.clip(frac, 0.0, bins - 1.0)
    lower = np.minimum(np.floor(frac).astype(np.int64), bins - 2)
    upper_weight = frac - lower
    offsets = (np.arange(n_angles, dtype=np.int64) * bins)[np.newaxis, :]
    weights = masses[:, np.newaxis]
    flat = np.bincount(
        (lower + offsets).ravel(),
        weights=(weights * (1.0 - upper_weight)).ravel(),
        minlength=n_angles * bins,
    )
    flat += np.bincount(
        (lower + 1 + offsets).ravel(),
        weights=(weights * upper_weight).ravel(),
        minlength=n_angles * bins,
    )
    return flat.reshape(n_angles, bins)


def sinogram(
    m: DiscreteMeasure2D,
    grid: AngleGrid,
    radii: int,
    max_workers: int = 1,
    block_size: int = 16,
) -> Sinogram:
    """
    Binned Radon transform on M angles and R radial bins.

    Raises SupportOutsideDisc when a projection leaves [-1, 1] by more than
    half a bin; smaller overshoots are clamped onto the end bins with a warning.
    """
    radial = RadialGrid(radii)
    projections = m.points @ grid.directions.T
    reach = float(np.abs(projections).max())
    half_bin = radial.spacing / 2.0
    if reach > 1.0 + half_bin:
        raise SupportOutsideDisc(f"support projects to {reach:.6f}, outside the unit disc")
    if reach > 1.0:
        logger.warning(f"Radial clamp: support projects to {reach:.6f}, end bins absorb the overshoot")

    blocks = [(start, min(start + block_size, grid.count)) for start in range(0, grid.count, block_size)]
    parts = parallel_map(lambda b: _splat_block(projections[:, b[0]:b[1]], m.masses, radial), blocks, max_workers)

    masses = np.vstack(parts)
    masses.setflags(write=False)
    return Sinogram(angle_grid=grid, radial_grid=radial, masses=masses)


def back_project(
    h: ArrayLike,
    theta: ArrayLike,
    points: ArrayLike,
    centers: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    R*_theta[h](x) = h(<x, theta>) with h linearly interpolated on the radial grid.

    h holds the values at the radial centres (default: R equispaced in [-1, 1]).
    """
    values = np.asarray(h, dtype=float).ravel()
    grid = np.linspace(-1.0, 1.0, values.size) if centers is None else np.asarray(centers, dtype=float)
    if grid.shape != values.shape:
        raise ValueError("h and radial centres differ in length")
    unit = _unit(theta)
    coords = np.asarray(points, dtype=float).reshape(-1, 2) @ unit
    tol = 1e-12
    if np.any(coords < grid[0] - tol) or np.any(coords > grid[-1] + tol):
        raise QueryOutsideGrid("query points project outside the radial grid")
    return np.interp(coords, grid, values)


def back_project_grid(profiles: ArrayLike, grid: AngleGrid, points: ArrayLike) -> np.ndarray:
    """
    Angle-averaged back projection of one radial profile per angle.

    profiles has shape (M, R); the result is (1/M) * sum_j R*_theta_j[profiles[j]].
    """
    values = np.asarray(profiles, dtype=float)
    if values.shape[0] != grid.count:
        raise ValueError("one radial profile per angle is required")
    total = np.zeros(np.asarray(points).reshape(-1, 2).shape[0])
    for j in range(grid.count):
        total += back_project(values[j], grid.directions[j], points)
    return total / grid.count


def affine_pushforward_slice(
    m: DiscreteMeasure2D,
    matrix: ArrayLike,
    offset: ArrayLike,
    theta: ArrayLike,
) -> DiscreteMeasure1D:
    """
    Restricted slice of (A . + y)_# m computed from a slice of m:
    (||A^T theta|| . + <y, theta>)_# R_{A^T theta / ||A^T theta||}[m].
    """
    a = np.asarray(matrix, dtype=float).reshape(2, 2)
    y = np.asarray(offset, dtype=float).reshape(2)
    unit = _unit(theta)
    if abs(float(np.linalg.det(a))) <= np.finfo(float).eps * max(1.0, float(np.abs(a).max())) ** 2:
        raise SingularMatrix("affine matrix is singular")
    transported = a.T @ unit
    scale = float(np.linalg.norm(transported))
    base = restricted_slice(m, transported / scale)
    return base.pushforward(scale, float(y @ unit))
