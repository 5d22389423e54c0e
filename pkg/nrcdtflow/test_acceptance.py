"""
End-to-end accuracy targets on the full-size datasets.

These runs take minutes; select them with `pytest -m slow`.
"""

from pathlib import Path

import numpy as np
import pytest

from nrcdtflow.classify.classifiers import Metric
from nrcdtflow.classify.features import FeatureConfig, extract_features
from nrcdtflow.datagen.params import AffineRanges
from nrcdtflow.datagen.templates import render_template
from nrcdtflow.datagen.warps import sample_affine, warp_affine
from nrcdtflow.experiments.config import ExperimentConfig
from nrcdtflow.experiments.runner import run_experiment, run_knn_protocol, run_phase_transition
from nrcdtflow.settings import AFFINE_TOLERANCE, MNIST_DIR
from nrcdtflow.transforms.measures import image_to_measure
from nrcdtflow.transforms.nrcdt import FeatureTag

pytestmark = pytest.mark.slow


def _config(tmp_path, **sections) -> ExperimentConfig:
    data = {"run": {"output_dir": str(tmp_path), "seed": 7}}
    for name, values in sections.items():
        data.setdefault(name, {}).update(values)
    return ExperimentConfig.model_validate(data)


def test_rotation_and_translation(tmp_path):
    result = run_experiment(_config(tmp_path, dataset={"preset": "rigid"}), max_workers=4)
    assert result.accuracy(FeatureTag.MNRCDT) >= 0.95
    assert result.accuracy(FeatureTag.ANRCDT) >= 0.95
    assert result.accuracy(FeatureTag.RCDT_FLAT) <= 0.35
    assert result.accuracy(FeatureTag.EUCLIDEAN_FLAT) <= 0.15


def test_strong_affine(tmp_path):
    config = _config(tmp_path, dataset={"preset": "affine_strong"}, run={"representations": ["mNRCDT", "aNRCDT"]})
    result = run_experiment(config, max_workers=4)
    assert result.accuracy(FeatureTag.MNRCDT) >= 0.90
    assert result.accuracy(FeatureTag.MNRCDT) > result.accuracy(FeatureTag.ANRCDT)


def test_more_angles_do_not_hurt(tmp_path):
    config = _config(
        tmp_path,
        dataset={"preset": "affine_strong"},
        discretization={"angle_sweep": [4, 16, 64]},
        run={"representations": ["mNRCDT"]},
    )
    result = run_experiment(config, max_workers=4)
    accuracies = [result.accuracy(FeatureTag.MNRCDT, angles=m) for m in (4, 16, 64)]
    assert all(later >= earlier - 0.05 for earlier, later in zip(accuracies, accuracies[1:]))


def test_max_profile_separates_affine_classes(tmp_path):
    config = _config(
        tmp_path,
        dataset={"preset": "affine_strong", "template_ids": [5, 12]},
        run={"representations": ["mNRCDT"]},
        classifier={"kind": "probe", "probe_classes": [5, 12]},
    )
    (row,) = run_experiment(config, max_workers=4).rows
    assert row["separable"]
    assert row["accuracy_mean"] == 1.0


def test_rcdt_separates_translated_and_scaled_classes(tmp_path):
    affine = {
        "scale_x": [0.75, 1.0],
        "scale_y": [0.75, 1.0],
        "isotropic": True,
        "shift_x": [-20.0, 20.0],
        "shift_y": [-20.0, 20.0],
    }
    config = _config(
        tmp_path,
        dataset={"template_ids": [5, 12], "affine": affine},
        run={"representations": ["RCDT_flat"]},
        classifier={"kind": "probe", "probe_classes": [5, 12]},
    )
    (row,) = run_experiment(config, max_workers=4).rows
    assert row["separable"]


def test_salt_phase_transition(tmp_path):
    config = _config(
        tmp_path,
        dataset={"samples_per_class": 5},
        discretization={"angles": 64},
        run={"representations": ["mNRCDT", "aNRCDT"]},
        phase={"kind": "salt"},
    )
    phase = run_phase_transition(config, max_workers=4)
    corners = {}
    for tag in (FeatureTag.MNRCDT, FeatureTag.ANRCDT):
        grid = phase.accuracy[(tag, Metric.L2)]
        assert grid.shape == (5, 5)
        clean, noisy = grid[:2, :2].mean(), grid[-2:, -2:].mean()
        assert clean > noisy
        corners[tag] = noisy
    assert corners[FeatureTag.ANRCDT] >= corners[FeatureTag.MNRCDT] - 0.1


def _mnist_available() -> bool:
    directory = Path(MNIST_DIR)
    return any((directory / name).exists() for name in ("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"))


@pytest.mark.skipif(not _mnist_available(), reason="MNIST IDX files not found")
def test_linmnist_knn(tmp_path):
    config = _config(
        tmp_path,
        dataset={"kind": "linmnist", "samples_per_class": 100, "mnist_dir": MNIST_DIR},
        discretization={"radii": 300},
        run={"representations": ["mNRCDT"]},
        classifier={"kind": "knn", "k": 11, "train_per_class": 50},
    )
    result = run_knn_protocol(config, max_workers=4)
    assert result.accuracy(FeatureTag.MNRCDT) >= 0.45
    assert np.isfinite(result.frame()["accuracy_mean"]).all()


def test_affine_images_share_one_max_profile():
    config = FeatureConfig(angles=128, radii=850, points=64)
    template = render_template(7, 256)
    base = extract_features(image_to_measure(template), FeatureTag.MNRCDT, config).values
    rng = np.random.default_rng(17)
    for _ in range(5):
        params = sample_affine(AffineRanges.full(scale=(0.75, 1.0), shear=15.0, shift=10.0), rng)
        warped = extract_features(image_to_measure(warp_affine(template, params)), FeatureTag.MNRCDT, config).values
        assert np.abs(warped - base).max() <= AFFINE_TOLERANCE
