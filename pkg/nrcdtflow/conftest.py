"""Shared fixtures"""

import numpy as np
import pytest

from nrcdtflow.experiments.config import ExperimentConfig
from nrcdtflow.transforms.measures import DiscreteMeasure2D


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def blob():
    """Asymmetric 2-D measure well inside the unit disc"""
    points = np.array([[-0.3, -0.1], [0.2, -0.25], [0.05, 0.3], [0.25, 0.15], [-0.15, 0.2], [0.0, 0.0]])
    masses = np.array([0.1, 0.25, 0.15, 0.2, 0.1, 0.2])
    return DiscreteMeasure2D.from_atoms(points, masses)


@pytest.fixture
def tiny_config(tmp_path):
    """Three template classes at 64 px with a coarse discretization"""
    return ExperimentConfig.model_validate(
        {
            "dataset": {
                "template_ids": [1, 6, 11],
                "samples_per_class": 3,
                "image_size": 64,
                "affine": {"rotation": [0.0, 360.0], "shift_x": [-3.0, 3.0], "shift_y": [-3.0, 3.0]},
            },
            "discretization": {"angles": 8, "radii": 65, "points": 16},
            "run": {
                "representations": ["mNRCDT", "aNRCDT", "RCDT_flat", "Euclidean_flat"],
                "seed": 11,
                "output_dir": str(tmp_path / "out"),
            },
            "classifier": {"kind": "nt"},
        }
    )
