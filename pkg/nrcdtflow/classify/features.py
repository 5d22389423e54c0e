"""
Feature representations and their extractor registry.

Four representations are registered, keyed by FeatureTag:
- Euclidean_flat: the normalized pixel grid, flattened row-major
- RCDT_flat: the L x M R-CDT field, flattened column-major
- mNRCDT: max over angles of the normalized R-CDT (length L)
- aNRCDT: mean over angles of the normalized R-CDT (length L)

Extractors read from a FeatureContext, which computes the sinogram, the
R-CDT field and its normalization at most once per measure, so extracting
several representations of one sample costs one Radon transform.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..parallel import parallel_map
from ..settings import DEFAULT_ANGLES, DEFAULT_POINTS, DEFAULT_RADII
from ..transforms.cdt import QuantileField, exact_rcdt, rcdt
from ..transforms.measures import DiscreteMeasure2D, ReferenceMeasure
from ..transforms.nrcdt import FeatureTag, FeatureVector, NormalizedField, max_nrcdt, mean_nrcdt, normalize_field
from ..transforms.radon import AngleGrid, sinogram
from .classifiers import LengthMismatch, Metric

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureConfig:
    """
    Discretization of the transforms.

    points: L reference samples; angles: M directions on the full circle;
    radii: R radial bins; exact=True skips binning and uses the restricted
    slices directly.
    """

    points: int = DEFAULT_POINTS
    angles: int = DEFAULT_ANGLES
    radii: int = DEFAULT_RADII
    exact: bool = False

    def __post_init__(self):
        if self.points < 2 or self.angles < 1 or self.radii < 2:
            raise ValueError("need points >= 2, angles >= 1, radii >= 2")

    @cached_property
    def angle_grid(self) -> AngleGrid:
        return AngleGrid(self.angles)

    @cached_property
    def reference(self) -> ReferenceMeasure:
        return ReferenceMeasure(self.points)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class FeatureContext:
    """Lazily computed transforms of one measure"""

    def __init__(self, measure: DiscreteMeasure2D, config: FeatureConfig, sinogram_workers: int = 1):
        self.measure = measure
        self.config = config
        self.sinogram_workers = sinogram_workers

    @cached_property
    def field(self) -> QuantileField:
        cfg = self.config
        if cfg.exact:
            return exact_rcdt(self.measure, cfg.angle_grid, cfg.reference)
        s = sinogram(self.measure, cfg.angle_grid, cfg.radii, max_workers=self.sinogram_workers)
        return rcdt(s, cfg.reference)

    @cached_property
    def normalized(self) -> NormalizedField:
        return normalize_field(self.field)


# ============================================================================
# Registry
# ============================================================================

@dataclass(frozen=True)
class ExtractorSpec:
    tag: FeatureTag
    name: str
    description: str
    length: str


class FeatureExtractor:
    spec: ExtractorSpec

    def extract(self, context: FeatureContext) -> np.ndarray:
        raise NotImplementedError


_EXTRACTORS: Dict[FeatureTag, FeatureExtractor] = {}


def register_extractor(extractor: FeatureExtractor) -> None:
    tag = extractor.spec.tag
    if tag in _EXTRACTORS:
        existing = _EXTRACTORS[tag]
        if type(existing) is type(extractor):
            return
        raise ValueError(f"Extractor already registered: {tag.value}")
    _EXTRACTORS[tag] = extractor


def get_extractor(tag) -> FeatureExtractor:
    extractor = _EXTRACTORS.get(FeatureTag(tag))
    if not extractor:
        raise KeyError(f"Unknown feature tag: {tag}")
    return extractor


def list_specs() -> List[ExtractorSpec]:
    return [extractor.spec for extractor in _EXTRACTORS.values()]


class EuclideanExtractor(FeatureExtractor):
    spec = ExtractorSpec(
        tag=FeatureTag.EUCLIDEAN_FLAT,
        name="Euclidean",
        description="Normalized gray values of the pixel grid",
        length="H*W",
    )

    def extract(self, context: FeatureContext) -> np.ndarray:
        return context.measure.to_raster().ravel()


class RcdtExtractor(FeatureExtractor):
    spec = ExtractorSpec(
        tag=FeatureTag.RCDT_FLAT,
        name="R-CDT",
        description="R-CDT field over all (t, theta) grid points",
        length="L*M",
    )

    def extract(self, context: FeatureContext) -> np.ndarray:
        return np.asarray(context.field.values).ravel(order="F")


class MaxNormalizedExtractor(FeatureExtractor):
    spec = ExtractorSpec(
        tag=FeatureTag.MNRCDT,
        name="mNR-CDT",
        description="Pointwise maximum over angles of the normalized R-CDT",
        length="L",
    )

    def extract(self, context: FeatureContext) -> np.ndarray:
        return max_nrcdt(context.normalized).values


class MeanNormalizedExtractor(FeatureExtractor):
    spec = ExtractorSpec(
        tag=FeatureTag.ANRCDT,
        name="aNR-CDT",
        description="Uniform average over angles of the normalized R-CDT",
        length="L",
    )

    def extract(self, context: FeatureContext) -> np.ndarray:
        return mean_nrcdt(context.normalized).values


for _extractor in (EuclideanExtractor(), RcdtExtractor(), MaxNormalizedExtractor(), MeanNormalizedExtractor()):
    register_extractor(_extractor)


# ============================================================================
# Extraction
# ============================================================================

def extract_features(
    measure: DiscreteMeasure2D,
    tag,
    config: Optional[FeatureConfig] = None,
    provenance: Optional[Dict[str, Any]] = None,
) -> FeatureVector:
    """
    One feature vector of `measure`.

    NR-CDT tags raise DegenerateDirection when some projection of the
    measure is numerically a point mass.
    """
    config = config or FeatureConfig()
    tag = FeatureTag(tag)
    values = get_extractor(tag).extract(FeatureContext(measure, config))
    return FeatureVector(np.asarray(values, dtype=float), tag, dict(provenance or {}))


def extract_all(
    measure: DiscreteMeasure2D,
    tags: Sequence,
    config: Optional[FeatureConfig] = None,
) -> Dict[FeatureTag, np.ndarray]:
    """Several representations from one shared context"""
    context = FeatureContext(measure, config or FeatureConfig())
    return {FeatureTag(t): np.asarray(get_extractor(t).extract(context), dtype=float) for t in tags}


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Rows of `vectors` are feature vectors, `labels` their classes"""

    vectors: np.ndarray
    labels: np.ndarray
    tag: FeatureTag
    metric: Metric = Metric.L2
    config_hash: str = ""
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if vectors.ndim != 2:
            raise LengthMismatch("feature vectors must share one length")
        if vectors.shape[0] != labels.shape[0]:
            raise LengthMismatch(f"{vectors.shape[0]} vectors but {labels.shape[0]} labels")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("feature set has non-finite entries")
        vectors.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "tag", FeatureTag(self.tag))
        object.__setattr__(self, "metric", Metric(self.metric))

    @classmethod
    def from_vectors(
        cls,
        vectors: Sequence[FeatureVector],
        labels: Sequence[int],
        metric: Metric = Metric.L2,
        config_hash: str = "",
    ) -> "FeatureSet":
        if not vectors:
            raise LengthMismatch("feature set needs at least one vector")
        tags = {v.tag for v in vectors}
        if len(tags) != 1:
            raise LengthMismatch(f"mixed feature tags: {sorted(t.value for t in tags)}")
        lengths = {len(v) for v in vectors}
        if len(lengths) != 1:
            raise LengthMismatch(f"mixed feature lengths: {sorted(lengths)}")
        return cls(np.vstack([v.values for v in vectors]), np.asarray(labels), tags.pop(), metric, config_hash)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def classes(self) -> List[int]:
        return sorted(int(c) for c in np.unique(self.labels))

    def subset(self, positions: Sequence[int]) -> "FeatureSet":
        index = np.asarray(positions, dtype=np.int64)
        return FeatureSet(self.vectors[index], self.labels[index], self.tag, self.metric, self.config_hash)

    def of_class(self, label: int) -> "FeatureSet":
        return self.subset(np.flatnonzero(self.labels == label))

    def scaled(self, factor: float) -> "FeatureSet":
        return FeatureSet(self.vectors * factor, self.labels, self.tag, self.metric, self.config_hash)

    def with_metric(self, metric: Metric) -> "FeatureSet":
        return FeatureSet(self.vectors, self.labels, self.tag, metric, self.config_hash)


def extract_feature_sets(
    measures: Sequence[DiscreteMeasure2D],
    labels: Sequence[int],
    tags: Sequence,
    config: Optional[FeatureConfig] = None,
    metric: Metric = Metric.L2,
    max_workers: int = 1,
    config_hash: str = "",
) -> Dict[FeatureTag, FeatureSet]:
    """One FeatureSet per tag; every measure is transformed once"""
    config = config or FeatureConfig()
    tags = [FeatureTag(t) for t in tags]
    rows = parallel_map(lambda m: extract_all(m, tags, config), list(measures), max_workers)
    label_array = np.asarray(labels, dtype=np.int64)
    sets = {}
    for tag in tags:
        vectors = np.vstack([row[tag] for row in rows])
        sets[tag] = FeatureSet(vectors, label_array, tag, metric, config_hash)
    logger.debug(f"Extracted {len(rows)} samples x {len(tags)} representations ({config.as_dict()})")
    return sets


def extract_feature_set(
    measures: Sequence[DiscreteMeasure2D],
    labels: Sequence[int],
    tag,
    config: Optional[FeatureConfig] = None,
    metric: Metric = Metric.L2,
    max_workers: int = 1,
    config_hash: str = "",
) -> FeatureSet:
    return extract_feature_sets(measures, labels, [tag], config, metric, max_workers, config_hash)[FeatureTag(tag)]
