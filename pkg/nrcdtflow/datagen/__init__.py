"""
Synthetic datasets.

Modules:
  - params.py: affine / corruption parameters, ranges and presets
  - rng.py: per-sample counter-based random streams
  - templates.py: the twelve template glyphs
  - warps.py: bi-quadratic affine and sinusoidal warps, salt noise
  - dataset.py: dataset assembly and its PGM + CSV on-disk form
  - idx.py: IDX (MNIST) container reader/writer
"""

from .dataset import Dataset, Sample, build_dataset, build_linmnist, read_dataset, write_dataset
from .idx import read_idx, write_idx
from .params import (
    AFFINE_PRESETS,
    CORRUPTION_PRESETS,
    LINMNIST_RANGES,
    NONAFFINE_PRESETS,
    AffineParams,
    AffineRanges,
    CorruptionParams,
    CorruptionRanges,
    DatasetSpec,
)
from .templates import render_template
from .warps import add_salt, sample_affine, warp_affine, warp_sinusoidal

__all__ = [
    "AFFINE_PRESETS",
    "CORRUPTION_PRESETS",
    "LINMNIST_RANGES",
    "NONAFFINE_PRESETS",
    "AffineParams",
    "AffineRanges",
    "CorruptionParams",
    "CorruptionRanges",
    "Dataset",
    "DatasetSpec",
    "Sample",
    "add_salt",
    "build_dataset",
    "build_linmnist",
    "read_dataset",
    "read_idx",
    "render_template",
    "sample_affine",
    "warp_affine",
    "warp_sinusoidal",
    "write_dataset",
    "write_idx",
]
