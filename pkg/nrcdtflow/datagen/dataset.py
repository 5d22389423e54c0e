"""
Dataset generation.

Every sample goes through the corruption chain in a fixed order: sinusoidal
warp, affine warp, salt noise. Its random draws come from streams keyed by
(seed, class position, sample index), so a dataset is bit-identical for any
worker count and any generation order.

Usage:
spec = DatasetSpec(affine=AFFINE_PRESETS["rigid"], seed=7)
dataset = build_dataset(spec, max_workers=4)
measures = dataset.measures()
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..io import read_csv, read_pgm, write_csv, write_pgm
from ..parallel import parallel_map
from ..settings import IDX_CANVAS
from ..transforms.measures import DiscreteMeasure2D, image_to_measure
from .params import (
    LINMNIST_RANGES,
    AffineParams,
    AffineRanges,
    CorruptionParams,
    DatagenError,
    DatasetSpec,
)
from .rng import Stream, derived_seed, sample_generator
from .templates import render_template
from .warps import add_salt, sample_affine, sample_corruption, warp_affine, warp_sinusoidal

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"


@dataclass(frozen=True, eq=False)
class Sample:
    label: int
    index: int
    image: np.ndarray
    seed: int
    affine: AffineParams = field(default_factory=AffineParams)
    corruption: CorruptionParams = field(default_factory=CorruptionParams)

    def measure(self) -> DiscreteMeasure2D:
        return image_to_measure(self.image)


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: Tuple[Sample, ...]
    spec: Optional[DatasetSpec] = None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    @property
    def images(self) -> np.ndarray:
        return np.stack([s.image for s in self.samples])

    @property
    def classes(self) -> List[int]:
        return sorted({s.label for s in self.samples})

    def measures(self) -> List[DiscreteMeasure2D]:
        return [s.measure() for s in self.samples]

    def subset(self, positions: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.samples[int(i)] for i in positions), self.spec)


# ============================================================================
# Academic datasets
# ============================================================================

def generate_sample(spec: DatasetSpec, class_position: int, index: int) -> Sample:
    template_id = spec.template_ids[class_position]
    image = np.array(render_template(template_id, spec.image_size))

    affine_rng = sample_generator(spec.seed, class_position, index, Stream.AFFINE)
    warp_rng = sample_generator(spec.seed, class_position, index, Stream.WARP)
    salt_rng = sample_generator(spec.seed, class_position, index, Stream.SALT)
    affine = sample_affine(spec.affine, affine_rng)
    corruption = sample_corruption(spec.corruption, warp_rng, salt_rng)

    if corruption.has_warp:
        image = warp_sinusoidal(image, corruption)
    image = warp_affine(image, affine)
    if corruption.has_salt:
        image = add_salt(image, corruption, salt_rng)

    return Sample(
        label=template_id,
        index=index,
        image=image,
        seed=derived_seed(spec.seed, class_position, index),
        affine=affine,
        corruption=corruption,
    )


def build_dataset(spec: DatasetSpec, max_workers: int = 1) -> Dataset:
    """samples_per_class samples of every template, grouped by class in template order"""
    tasks = [(c, i) for c in range(spec.class_count) for i in range(spec.samples_per_class)]
    samples = parallel_map(lambda task: generate_sample(spec, *task), tasks, max_workers)
    logger.info(
        f"Generated {len(samples)} samples "
        f"({spec.class_count} classes x {spec.samples_per_class}) with seed {spec.seed}"
    )
    return Dataset(tuple(samples), spec)


def template_dataset(spec: DatasetSpec) -> Dataset:
    """The untransformed templates, one sample per class"""
    samples = tuple(
        Sample(label=t, index=0, image=np.array(render_template(t, spec.image_size)), seed=0)
        for t in spec.template_ids
    )
    return Dataset(samples, spec)


# ============================================================================
# IDX-derived datasets
# ============================================================================

def embed_digit(digit: np.ndarray, canvas: int = IDX_CANVAS, upscale: int = 2) -> np.ndarray:
    """Upscale by pixel replication and centre on a canvas x canvas frame, values in [0, 1]"""
    large = np.kron(np.asarray(digit, dtype=float), np.ones((upscale, upscale)))
    rows, cols = large.shape
    if rows > canvas or cols > canvas:
        raise DatagenError(f"digit of {rows}x{cols} does not fit a {canvas}px canvas")
    frame = np.zeros((canvas, canvas))
    top, left = (canvas - rows) // 2, (canvas - cols) // 2
    frame[top:top + rows, left:left + cols] = large / 255.0
    return frame


def build_linmnist(
    images: np.ndarray,
    labels: np.ndarray,
    per_class: int,
    seed: int = 0,
    ranges: AffineRanges = LINMNIST_RANGES,
    canvas: int = IDX_CANVAS,
    max_workers: int = 1,
) -> Dataset:
    """
    Affinely transformed digits.

    Takes the first `per_class` digits of every class present in `labels`,
    upscales them x2 onto a canvas and applies one random affine draw each.
    """
    labels = np.asarray(labels)
    classes = sorted(int(c) for c in np.unique(labels))
    tasks = []
    for position, digit_class in enumerate(classes):
        chosen = np.flatnonzero(labels == digit_class)[:per_class]
        if chosen.size < per_class:
            raise DatagenError(f"class {digit_class} has only {chosen.size} digits, need {per_class}")
        tasks.extend((position, digit_class, i, int(k)) for i, k in enumerate(chosen))

    def make(task) -> Sample:
        position, digit_class, index, source = task
        affine = sample_affine(ranges, sample_generator(seed, position, index, Stream.AFFINE))
        image = warp_affine(embed_digit(images[source], canvas), affine)
        return Sample(
            label=digit_class, index=index, image=image, seed=derived_seed(seed, position, index), affine=affine
        )

    samples = parallel_map(make, tasks, max_workers)
    logger.info(f"Built LinMNIST set: {len(classes)} classes x {per_class} digits, seed {seed}")
    return Dataset(tuple(samples))


# ============================================================================
# On-disk form: 16-bit PGM images plus a CSV manifest
# ============================================================================

def write_dataset(dataset: Dataset, directory: Union[str, Path], comment: Optional[str] = None) -> Path:
    """
    One PGM per sample, scaled by its maximum, plus manifest.csv with the
    columns file, class, index, seed, scale and every affine and corruption
    parameter.
    """
    directory = Path(directory)
    rows: List[Dict[str, Any]] = []
    for sample in dataset.samples:
        name = f"class{sample.label:02d}_{sample.index:04d}.pgm"
        peak = float(sample.image.max())
        scale = peak if peak > 0 else 1.0
        write_pgm(sample.image / scale, directory / name, maxval=65535, comment=comment)
        row: Dict[str, Any] = {"file": name, "class": sample.label, "index": sample.index, "seed": sample.seed}
        row["scale"] = scale
        row.update(sample.affine.as_dict())
        row.update(sample.corruption.as_dict())
        rows.append(row)
    write_csv(rows, directory / MANIFEST_NAME, columns=_manifest_columns())
    logger.info(f"Wrote {len(rows)} samples to {directory}")
    return directory


def _manifest_columns() -> List[str]:
    return (
        ["file", "class", "index", "seed", "scale"]
        + list(AffineParams().as_dict())
        + list(CorruptionParams().as_dict())
    )


def read_dataset(directory: Union[str, Path]) -> Dataset:
    """Inverse of write_dataset up to 16-bit quantization of the gray values"""
    directory = Path(directory)
    manifest: pd.DataFrame = read_csv(directory / MANIFEST_NAME)
    affine_keys = list(AffineParams().as_dict())
    corruption_keys = list(CorruptionParams().as_dict())
    samples = []
    for record in manifest.to_dict(orient="records"):
        levels, maxval, _ = read_pgm(directory / record["file"])
        corruption = {k: record[k] for k in corruption_keys}
        corruption["salt_count"] = int(corruption["salt_count"])
        samples.append(
            Sample(
                label=int(record["class"]),
                index=int(record["index"]),
                image=levels / maxval * float(record["scale"]),
                seed=int(record["seed"]),
                affine=AffineParams(**{k: float(record[k]) for k in affine_keys}),
                corruption=CorruptionParams(**corruption),
            )
        )
    return Dataset(tuple(samples))
