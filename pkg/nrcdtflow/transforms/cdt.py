"""
Cumulative distribution transform against the uniform reference on [0, 1].

For the uniform reference F_rho is the identity on [0, 1], so the CDT of a 1-D
measure sampled at t_k is just its quantile at t_k. The R-CDT applies this to
every angle of a sinogram and stores the result as an L x M QuantileField.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..exceptions import NrcdtFlowError
from .measures import DiscreteMeasure1D, DiscreteMeasure2D, ReferenceMeasure, quantile
from .radon import AngleGrid, Sinogram, exact_slices

logger = logging.getLogger(__name__)


class GridMismatch(NrcdtFlowError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantileField:
    """
    values[k, j] = R-CDT at (t_k, theta_j).

    resolution is the radial bin width the slices were binned with (0 for
    exact, un-binned slices).
    """

    values: np.ndarray
    angle_grid: AngleGrid
    reference: ReferenceMeasure
    resolution: float = 0.0

    def __post_init__(self):
        expected = (self.reference.points, self.angle_grid.count)
        if self.values.shape != expected:
            raise GridMismatch(f"field shape {self.values.shape} does not match grids {expected}")

    @property
    def shape(self):
        return self.values.shape

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def rolled(self, shift: int) -> "QuantileField":
        """Circular shift of the angle axis (rotation by 2*pi*shift/M)"""
        return QuantileField(np.roll(self.values, shift, axis=1), self.angle_grid, self.reference, self.resolution)


def cdt_1d(m: DiscreteMeasure1D, ref: ReferenceMeasure) -> np.ndarray:
    """quantile(m, F_rho(t_k)) for every reference grid point"""
    return np.asarray(quantile(m, ref.cdf(ref.grid)), dtype=float)


def _assemble(
    columns: Iterable[np.ndarray], grid: AngleGrid, ref: ReferenceMeasure, resolution: float
) -> QuantileField:
    values = np.column_stack(list(columns))
    values.setflags(write=False)
    return QuantileField(values=values, angle_grid=grid, reference=ref, resolution=resolution)


def rcdt(s: Sinogram, ref: ReferenceMeasure) -> QuantileField:
    """Column j is the quantile function of the binned slice j"""
    centers = s.radial_grid.centers
    cumulative = np.cumsum(s.masses, axis=1)
    totals = cumulative[:, -1:]
    cumulative = cumulative / totals
    t = ref.cdf(ref.grid)
    columns = []
    for j in range(s.angle_grid.count):
        index = np.searchsorted(cumulative[j], t, side="right")
        columns.append(centers[np.minimum(index, centers.size - 1)])
    return _assemble(columns, s.angle_grid, ref, s.resolution)


def exact_rcdt(m: DiscreteMeasure2D, grid: AngleGrid, ref: ReferenceMeasure) -> QuantileField:
    """R-CDT from the un-binned restricted slices"""
    return _assemble((cdt_1d(piece, ref) for piece in exact_slices(m, grid)), grid, ref, 0.0)


def _check_compatible(f: QuantileField, g: QuantileField) -> None:
    if f.values.shape != g.values.shape:
        raise GridMismatch(f"fields differ in shape: {f.values.shape} vs {g.values.shape}")
    if f.angle_grid.count != g.angle_grid.count or f.reference.points != g.reference.points:
        raise GridMismatch("fields were sampled on different grids")


def sliced_w2(f: QuantileField, g: QuantileField) -> float:
    """rho x u_S1 norm of the field difference, the discrete sliced W2 distance"""
    _check_compatible(f, g)
    diff = f.values - g.values
    return float(np.sqrt(np.mean(diff * diff)))


def column_distances(f: QuantileField, g: QuantileField) -> np.ndarray:
    """rho-norm of the difference per angle"""
    _check_compatible(f, g)
    diff = f.values - g.values
    return np.sqrt(np.mean(diff * diff, axis=0))


def cdt_distance_exact(a: DiscreteMeasure1D, b: DiscreteMeasure1D) -> float:
    """
    Exact rho-norm of the CDT difference.

    Both quantile functions are constant between consecutive merged cumulative
    breakpoints, so the integral is a finite sum.
    """
    breaks = np.union1d(np.concatenate(([0.0], a.cumulative)), b.cumulative)
    breaks = breaks[(breaks >= 0.0) & (breaks <= 1.0)]
    widths = np.diff(breaks)
    keep = widths > 0
    mids = 0.5 * (breaks[:-1] + breaks[1:])[keep]
    gap = np.asarray(quantile(a, mids)) - np.asarray(quantile(b, mids))
    return float(np.sqrt(np.sum(widths[keep] * gap * gap)))
