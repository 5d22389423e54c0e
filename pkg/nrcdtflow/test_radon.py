"""
Tests for restricted slices, sinograms and back projection.
"""

import logging
import math

import numpy as np
import pytest

from nrcdtflow.datagen.templates import render_template
from nrcdtflow.transforms.measures import DiscreteMeasure2D, cdf, image_to_measure, uniform_atoms
from nrcdtflow.transforms.radon import (
    AngleGrid,
    NonUnitDirection,
    QueryOutsideGrid,
    RadialGrid,
    SingularMatrix,
    SupportOutsideDisc,
    affine_pushforward_slice,
    back_project,
    back_project_grid,
    exact_slices,
    restricted_slice,
    sinogram,
)


def _random_measure(rng, n, radius=0.8):
    angle = rng.uniform(0, 2 * np.pi, n)
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    return DiscreteMeasure2D.from_atoms(np.column_stack((r * np.cos(angle), r * np.sin(angle))), rng.uniform(0.1, 1, n))


def _unit_disc(points_per_axis=120):
    axis = (np.arange(points_per_axis) + 0.5) / points_per_axis * 2.0 - 1.0
    xx, yy = np.meshgrid(axis, axis)
    inside = xx ** 2 + yy ** 2 <= 1.0
    return uniform_atoms(np.column_stack((xx[inside], yy[inside])))


@pytest.mark.unit
class TestGrids:
    def test_angle_grid(self):
        grid = AngleGrid(8)
        np.testing.assert_allclose(grid.angles, 2 * np.pi * np.arange(8) / 8)
        np.testing.assert_array_equal(grid.directions[4:], -grid.directions[:4])
        assert grid.weights.sum() == pytest.approx(1.0)
        with pytest.raises(ValueError):
            AngleGrid(0)

    def test_radial_grid(self):
        radial = RadialGrid(5)
        np.testing.assert_allclose(radial.centers, [-1.0, -0.5, 0.0, 0.5, 1.0])
        assert radial.spacing == 0.5
        with pytest.raises(ValueError):
            RadialGrid(1)


@pytest.mark.unit
class TestRestrictedSlice:
    def test_orthogonal_projection_of_a_dirac(self):
        s = restricted_slice(DiscreteMeasure2D.from_atoms([[1.0, 0.0]]), (0.0, 1.0))
        np.testing.assert_array_equal(s.positions, [0.0])
        np.testing.assert_array_equal(s.masses, [1.0])

    def test_disc_slice_follows_chord_law(self):
        disc = _unit_disc()
        t = np.linspace(-0.99, 0.99, 199)
        expected = 0.5 + (t * np.sqrt(1 - t ** 2) + np.arcsin(t)) / np.pi
        for angle in (0.0, 0.7, 2.1):
            s = restricted_slice(disc, (math.cos(angle), math.sin(angle)))
            assert np.abs(cdf(s, t) - expected).max() <= 0.02

    def test_mass_is_preserved(self, rng):
        for _ in range(20):
            m = _random_measure(rng, int(rng.integers(1, 30)))
            theta = rng.normal(size=2)
            s = restricted_slice(m, theta / np.linalg.norm(theta))
            assert abs(s.total_mass - 1.0) <= 1e-12

    def test_direction_must_be_unit(self, blob):
        with pytest.raises(NonUnitDirection):
            restricted_slice(blob, (1.0, 1.0))

    def test_exact_slices_match_restricted_slices(self, blob):
        grid = AngleGrid(6)
        for j, piece in enumerate(exact_slices(blob, grid)):
            reference = restricted_slice(blob, grid.directions[j])
            np.testing.assert_allclose(piece.positions, reference.positions, atol=1e-15)


@pytest.mark.unit
class TestSinogram:
    def test_dirac_at_origin_odd_bins(self):
        s = sinogram(DiscreteMeasure2D.from_atoms([[0.0, 0.0]]), AngleGrid(8), 101)
        assert s.shape == (8, 101)
        np.testing.assert_allclose(s.masses[:, 50], 1.0)

    def test_dirac_at_origin_even_bins(self):
        s = sinogram(DiscreteMeasure2D.from_atoms([[0.0, 0.0]]), AngleGrid(4), 850)
        np.testing.assert_allclose(s.masses[:, 424], 0.5)
        np.testing.assert_allclose(s.masses[:, 425], 0.5)

    def test_opposite_angles_are_reflections(self):
        m = image_to_measure(render_template(7, 64))
        s = sinogram(m, AngleGrid(8), 129)
        np.testing.assert_allclose(s.masses[4:], s.masses[:4, ::-1], atol=1e-12)

    def test_mass_per_angle(self, rng):
        for _ in range(10):
            s = sinogram(_random_measure(rng, 50), AngleGrid(16), 85)
            np.testing.assert_allclose(s.slice_masses(), 1.0, atol=1e-12)
            assert abs(s.slice(3).total_mass - 1.0) <= 1e-12

    def test_support_outside_disc(self):
        with pytest.raises(SupportOutsideDisc):
            sinogram(DiscreteMeasure2D.from_atoms([[1.5, 0.0]]), AngleGrid(4), 101)

    def test_small_overshoot_is_clamped_with_warning(self, caplog):
        m = DiscreteMeasure2D.from_atoms([[1.005, 0.0]])
        with caplog.at_level(logging.WARNING, logger="nrcdtflow.transforms.radon"):
            s = sinogram(m, AngleGrid(4), 101)
        assert "Radial clamp" in caplog.text
        assert s.masses[0, -1] == pytest.approx(1.0)
        np.testing.assert_allclose(s.slice_masses(), 1.0)

    def test_threads_do_not_change_the_result(self, rng):
        m = _random_measure(rng, 200)
        grid = AngleGrid(40)
        serial = sinogram(m, grid, 129, max_workers=1, block_size=4)
        threaded = sinogram(m, grid, 129, max_workers=4, block_size=4)
        np.testing.assert_array_equal(serial.masses, threaded.masses)

    def test_angle_blocks_go_through_the_shared_pool(self, rng, monkeypatch):
        from nrcdtflow.parallel import parallel_map
        from nrcdtflow.transforms import radon

        calls = []

        def recording_map(function, items, max_workers=1):
            calls.append((len(items), max_workers))
            return parallel_map(function, items, max_workers)

        monkeypatch.setattr(radon, "parallel_map", recording_map)
        s = sinogram(_random_measure(rng, 50), AngleGrid(40), 65, max_workers=3, block_size=16)
        assert calls == [(3, 3)]
        assert s.masses.shape == (40, 65)


@pytest.mark.unit
class TestBackProjection:
    def test_constant_profile(self, rng):
        points = rng.uniform(-0.5, 0.5, (10, 2))
        np.testing.assert_allclose(back_project(np.ones(33), (0.6, 0.8), points), 1.0)

    def test_linear_profile_reads_the_coordinate(self):
        centers = np.linspace(-1, 1, 21)
        assert back_project(centers, (1.0, 0.0), [[0.3, 0.4]])[0] == pytest.approx(0.3)

    def test_query_outside_grid(self):
        with pytest.raises(QueryOutsideGrid):
            back_project(np.ones(5), (1.0, 0.0), [[0.0, 0.0], [1.5, 0.0]])

    def test_adjoint_of_restricted_slice(self, rng):
        centers = np.linspace(-1, 1, 41)
        for _ in range(20):
            m = _random_measure(rng, int(rng.integers(1, 25)))
            h = rng.normal(size=centers.size)
            angle = rng.uniform(0, 2 * np.pi)
            theta = (math.cos(angle), math.sin(angle))
            s = restricted_slice(m, theta)
            left = float(np.sum(s.masses * np.interp(s.positions, centers, h)))
            right = float(np.sum(m.masses * back_project(h, theta, m.points)))
            assert abs(left - right) <= 1e-10

    def test_adjoint_of_binned_sinogram(self, rng):
        grid = AngleGrid(12)
        for _ in range(10):
            m = _random_measure(rng, 30, radius=0.9)
            profiles = rng.normal(size=(12, 65))
            s = sinogram(m, grid, 65)
            left = float(np.sum(s.masses * profiles)) / 12
            right = float(m.masses @ back_project_grid(profiles, grid, m.points))
            assert abs(left - right) <= 1e-12

    def test_profile_count_must_match_angles(self, blob):
        with pytest.raises(ValueError):
            back_project_grid(np.ones((3, 9)), AngleGrid(4), blob.points)


@pytest.mark.unit
class TestAffinePushforwardSlice:
    def test_identity(self, blob):
        theta = (0.6, 0.8)
        moved = affine_pushforward_slice(blob, np.eye(2), (0.0, 0.0), theta)
        reference = restricted_slice(blob, theta)
        np.testing.assert_allclose(moved.positions, reference.positions, atol=1e-15)
        np.testing.assert_allclose(moved.masses, reference.masses)

    def test_translation_shifts_positions(self, blob):
        theta = np.array([0.6, -0.8])
        y = np.array([0.2, 0.1])
        moved = affine_pushforward_slice(blob, np.eye(2), y, theta)
        reference = restricted_slice(blob, theta)
        np.testing.assert_allclose(moved.positions, reference.positions + y @ theta, atol=1e-15)
        np.testing.assert_allclose(moved.masses, reference.masses)

    def test_matches_slice_of_pushforward(self, rng):
        for _ in range(50):
            m = _random_measure(rng, int(rng.integers(1, 15)), radius=0.5)
            a = rng.normal(size=(2, 2))
            if abs(np.linalg.det(a)) < 0.1:
                continue
            y = rng.normal(size=2) * 0.1
            angle = rng.uniform(0, 2 * np.pi)
            theta = (math.cos(angle), math.sin(angle))
            left = affine_pushforward_slice(m, a, y, theta)
            right = restricted_slice(m.pushforward(a, y), theta)
            np.testing.assert_allclose(left.positions, right.positions, atol=1e-12)
            np.testing.assert_allclose(left.masses, right.masses, atol=1e-12)

    def test_singular_matrix(self, blob):
        with pytest.raises(SingularMatrix):
            affine_pushforward_slice(blob, [[1.0, 2.0], [2.0, 4.0]], (0.0, 0.0), (1.0, 0.0))
