"""
Tests for the CDT, the R-CDT quantile field and sliced W2.
"""

import math

import numpy as np
import pytest

from nrcdtflow.datagen.templates import render_template
from nrcdtflow.ot_oracle import w_1d
from nrcdtflow.transforms.cdt import (
    GridMismatch,
    QuantileField,
    cdt_1d,
    cdt_distance_exact,
    column_distances,
    exact_rcdt,
    rcdt,
    sliced_w2,
)
from nrcdtflow.transforms.measures import DiscreteMeasure1D, DiscreteMeasure2D, ReferenceMeasure, image_to_measure
from nrcdtflow.transforms.radon import AngleGrid, exact_slices, sinogram


def _random_1d(rng, max_atoms=8):
    n = int(rng.integers(1, max_atoms + 1))
    return DiscreteMeasure1D.from_atoms(rng.uniform(-1, 1, n), rng.uniform(0.05, 1, n))


def _rotation(angle):
    return np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])


@pytest.mark.unit
class TestCdt1d:
    def test_uniform_reference_is_the_identity(self):
        ref = ReferenceMeasure(64)
        bins = 1000
        m = DiscreteMeasure1D.from_atoms((np.arange(bins) + 0.5) / bins, np.ones(bins))
        assert np.abs(cdt_1d(m, ref) - ref.grid).max() <= 1.0 / bins

    def test_dirac_is_constant(self):
        np.testing.assert_array_equal(cdt_1d(DiscreteMeasure1D.dirac(0.3), ReferenceMeasure(16)), 0.3)

    def test_uniform_on_an_interval(self):
        ref = ReferenceMeasure(64)
        a, b, bins = -0.4, 0.6, 2000
        m = DiscreteMeasure1D.from_atoms(a + (b - a) * (np.arange(bins) + 0.5) / bins, np.ones(bins))
        assert np.abs(cdt_1d(m, ref) - (a + (b - a) * ref.grid)).max() <= (b - a) / bins


@pytest.mark.unit
class TestQuantileField:
    def test_dirac_at_origin(self):
        s = sinogram(DiscreteMeasure2D.from_atoms([[0.0, 0.0]]), AngleGrid(16), 850)
        f = rcdt(s, ReferenceMeasure(64))
        assert f.shape == (64, 16)
        assert np.abs(f.values).max() <= s.resolution / 2 + 1e-12

    def test_disc_columns_agree(self):
        m = image_to_measure(render_template(1, 128))
        f = rcdt(sinogram(m, AngleGrid(16), 425), ReferenceMeasure(64))
        assert np.abs(f.values - f.values[:, :1]).max() <= 0.02

    def test_columns_are_monotone(self, rng):
        ref = ReferenceMeasure(32)
        for _ in range(10):
            points = rng.uniform(-0.6, 0.6, (40, 2))
            m = DiscreteMeasure2D.from_atoms(points, rng.uniform(0.1, 1, 40))
            for f in (rcdt(sinogram(m, AngleGrid(8), 129), ref), exact_rcdt(m, AngleGrid(8), ref)):
                assert np.all(np.diff(f.values, axis=0) >= 0)

    def test_exact_field_of_a_dirac_is_the_projection(self):
        grid = AngleGrid(12)
        x = np.array([0.3, -0.2])
        f = exact_rcdt(DiscreteMeasure2D.from_atoms([x]), grid, ReferenceMeasure(8))
        np.testing.assert_allclose(f.values, np.tile(grid.directions @ x, (8, 1)), atol=1e-15)

    def test_grid_rotation_rolls_the_columns(self, blob):
        grid, ref = AngleGrid(16), ReferenceMeasure(32)
        base = exact_rcdt(blob, grid, ref)
        turned = exact_rcdt(blob.pushforward(_rotation(2 * np.pi * 3 / 16)), grid, ref)
        np.testing.assert_allclose(turned.values, base.rolled(3).values, atol=1e-12)

    def test_shape_must_match_grids(self):
        with pytest.raises(GridMismatch):
            QuantileField(np.zeros((8, 3)), AngleGrid(4), ReferenceMeasure(8))


@pytest.mark.unit
class TestSlicedW2:
    def test_zero_for_identical_fields(self, blob):
        f = exact_rcdt(blob, AngleGrid(8), ReferenceMeasure(16))
        assert sliced_w2(f, f) == 0.0

    def test_two_diracs(self):
        grid, ref = AngleGrid(64), ReferenceMeasure(64)
        x, y = np.array([0.2, 0.1]), np.array([-0.3, 0.4])
        f = exact_rcdt(DiscreteMeasure2D.from_atoms([x]), grid, ref)
        g = exact_rcdt(DiscreteMeasure2D.from_atoms([y]), grid, ref)
        assert sliced_w2(f, g) == pytest.approx(np.linalg.norm(x - y) / math.sqrt(2), abs=0.01)

    def test_column_distances_match_slice_transport_on_dyadic_masses(self, rng):
        grid, ref = AngleGrid(8), ReferenceMeasure(64)
        for _ in range(20):
            n = int(rng.choice([1, 2, 4, 8]))
            a = DiscreteMeasure2D.from_atoms(rng.uniform(-0.5, 0.5, (n, 2)))
            b = DiscreteMeasure2D.from_atoms(rng.uniform(-0.5, 0.5, (n, 2)))
            columns = column_distances(exact_rcdt(a, grid, ref), exact_rcdt(b, grid, ref))
            oracle = [w_1d(sa, sb) for sa, sb in zip(exact_slices(a, grid), exact_slices(b, grid))]
            np.testing.assert_allclose(columns, oracle, atol=1e-10)

    def test_mismatched_grids(self, blob):
        f = exact_rcdt(blob, AngleGrid(8), ReferenceMeasure(16))
        g = exact_rcdt(blob, AngleGrid(4), ReferenceMeasure(16))
        with pytest.raises(GridMismatch):
            sliced_w2(f, g)


@pytest.mark.unit
class TestIsometry:
    def test_exact_distance_equals_w2(self, rng):
        for _ in range(200):
            a, b = _random_1d(rng), _random_1d(rng)
            assert abs(cdt_distance_exact(a, b) - w_1d(a, b, p=2)) <= 1e-10

    def test_grid_norm_converges(self, rng):
        ref = ReferenceMeasure(4096)
        for _ in range(50):
            a, b = _random_1d(rng), _random_1d(rng)
            gap = cdt_1d(a, ref) - cdt_1d(b, ref)
            grid_sq = float(np.mean(gap * gap))
            exact_sq = cdt_distance_exact(a, b) ** 2
            # each cell holding a breakpoint is off by at most (max gap)^2 / L, and |gap| <= 2
            breaks = a.size + b.size
            assert abs(grid_sq - exact_sq) <= breaks * 4.0 / ref.points
