"""
Experiment configuration.

An ExperimentConfig is a pydantic model with the sections dataset,
discretization, run, classifier and an optional phase grid. Its text form is
YAML; `ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg` for every config.
Validation problems raise ConfigError listing the dotted field path and the
YAML line of each offending key.

Example (config/nt_rigid.yml):

    dataset:
      preset: rigid
      samples_per_class: 10
    discretization:
      angles: 128
    run:
      representations: [mNRCDT, aNRCDT, RCDT_flat, Euclidean_flat]
      seed: 7
    classifier:
      kind: nt
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..classify.classifiers import Metric
from ..classify.features import FeatureConfig
from ..datagen.params import (
    AFFINE_PRESETS,
    CORRUPTION_PRESETS,
    NONAFFINE_PRESETS,
    TEMPLATE_COUNT,
    AffineRanges,
    CorruptionRanges,
    DatasetSpec,
    InvalidRange,
)
from ..exceptions import NrcdtFlowError
from ..settings import DEFAULT_ANGLES, DEFAULT_IMAGE_SIZE, DEFAULT_POINTS, DEFAULT_RADII, OUTPUT_DIR
from ..transforms.nrcdt import FeatureTag

logger = logging.getLogger(__name__)

PRESETS = sorted(AFFINE_PRESETS) + sorted(CORRUPTION_PRESETS) + sorted(NONAFFINE_PRESETS)

Pair = Tuple[float, float]


class ConfigIssue(BaseModel):
    path: str
    line: Optional[int] = None
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.path}: {self.message}"


class ConfigError(NrcdtFlowError, ValueError):
    """Invalid experiment configuration; `issues` lists every problem found"""

    def __init__(self, issues: Sequence[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(issue) for issue in self.issues) or "invalid configuration")


# ============================================================================
# Sections
# ============================================================================

class AffineSection(BaseModel):
    model_config = {"extra": "forbid"}

    scale_x: Pair = Field((1.0, 1.0), description="Horizontal scale range")
    scale_y: Pair = Field((1.0, 1.0), description="Vertical scale range")
    shear_x: Pair = Field((0.0, 0.0), description="Horizontal shear range (degrees)")
    shear_y: Pair = Field((0.0, 0.0), description="Vertical shear range (degrees)")
    rotation: Pair = Field((0.0, 0.0), description="Rotation range (degrees)")
    shift_x: Pair = Field((0.0, 0.0), description="Horizontal shift range (pixels)")
    shift_y: Pair = Field((0.0, 0.0), description="Vertical shift range (pixels)")
    isotropic: bool = Field(False, description="Draw one scale for both axes")

    def to_ranges(self) -> AffineRanges:
        return AffineRanges(**self.model_dump())


class CorruptionSection(BaseModel):
    model_config = {"extra": "forbid"}

    frequency: Pair = Field((0.0, 0.0), description="Sinusoid frequency range")
    amplitude: Pair = Field((0.0, 0.0), description="Sinusoid amplitude range (pixels)")
    salt_count: Tuple[int, int] = Field((0, 0), description="Salt disc count range")
    salt_radius: float = Field(0.0, ge=0.0, description="Salt disc radius (pixels)")

    def to_ranges(self) -> CorruptionRanges:
        return CorruptionRanges(**self.model_dump())


class DatasetSection(BaseModel):
    model_config = {"extra": "forbid"}

    kind: Literal["templates", "linmnist"] = "templates"
    preset: Optional[str] = Field(None, description="Named affine/corruption ranges; overrides affine and corruption")
    template_ids: List[int] = Field(default_factory=lambda: list(range(1, TEMPLATE_COUNT + 1)))
    samples_per_class: int = Field(10, ge=1)
    image_size: int = Field(DEFAULT_IMAGE_SIZE, ge=64)
    affine: AffineSection = Field(default_factory=AffineSection)
    corruption: CorruptionSection = Field(default_factory=CorruptionSection)
    mnist_dir: Optional[str] = Field(None, description="IDX directory for kind=linmnist")
    mnist_split: Literal["train", "t10k"] = "train"

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in PRESETS:
            raise ValueError(f"unknown preset {value!r}; choose from {', '.join(PRESETS)}")
        return value

    @field_validator("template_ids")
    @classmethod
    def _valid_ids(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one template id is required")
        bad = [t for t in value if not 1 <= t <= TEMPLATE_COUNT]
        if bad:
            raise ValueError(f"template ids outside 1..{TEMPLATE_COUNT}: {bad}")
        if len(set(value)) != len(value):
            raise ValueError("template ids must be distinct")
        return value

    def ranges(self) -> Tuple[AffineRanges, CorruptionRanges]:
        if self.preset in AFFINE_PRESETS:
            return AFFINE_PRESETS[self.preset], CorruptionRanges()
        if self.preset in CORRUPTION_PRESETS:
            return CORRUPTION_PRESETS[self.preset]
        if self.preset in NONAFFINE_PRESETS:
            return NONAFFINE_PRESETS[self.preset]
        return self.affine.to_ranges(), self.corruption.to_ranges()


class DiscretizationSection(BaseModel):
    model_config = {"extra": "forbid"}

    angles: int = Field(DEFAULT_ANGLES, ge=1, description="M equispaced angles on [0, 2pi)")
    radii: int = Field(DEFAULT_RADII, ge=2, description="R radial bins on [-1, 1]")
    points: int = Field(DEFAULT_POINTS, ge=2, description="L reference points in (0, 1)")
    exact: bool = Field(False, description="Skip radial binning")
    angle_sweep: Optional[List[int]] = Field(None, description="Run once per angle count instead of `angles`")

    @field_validator("angle_sweep")
    @classmethod
    def _positive_sweep(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and (not value or min(value) < 1):
            raise ValueError("angle_sweep needs positive angle counts")
        return value

    def feature_config(self, angles: Optional[int] = None) -> FeatureConfig:
        return FeatureConfig(points=self.points, angles=angles or self.angles, radii=self.radii, exact=self.exact)

    @property
    def angle_counts(self) -> List[int]:
        return list(self.angle_sweep) if self.angle_sweep else [self.angles]


class RunSection(BaseModel):
    model_config = {"extra": "forbid"}

    representations: List[FeatureTag] = Field(
        default_factory=lambda: [FeatureTag.MNRCDT, FeatureTag.ANRCDT, FeatureTag.RCDT_FLAT, FeatureTag.EUCLIDEAN_FLAT]
    )
    metrics: List[Metric] = Field(default_factory=lambda: [Metric.L2])
    repetitions: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    output_dir: str = OUTPUT_DIR
    record_runtime: bool = Field(False, description="Write measured runtimes instead of 0.0")
    dump_features: bool = Field(False, description="Write NRCF feature dumps next to the CSV")

    @field_validator("representations", "metrics")
    @classmethod
    def _nonempty(cls, value: list) -> list:
        if not value:
            raise ValueError("at least one entry is required")
        return value


class ClassifierSection(BaseModel):
    model_config = {"extra": "forbid"}

    kind: Literal["nt", "knn", "probe"] = "nt"
    k: int = Field(1, ge=1, description="Neighbours for kind=knn")
    train_per_class: int = Field(10, ge=1, description="References per class for kind=knn")
    probe_classes: Tuple[int, int] = Field((5, 12), description="Template ids compared by kind=probe")
    max_epochs: int = Field(1000, ge=1)


class PhaseSection(BaseModel):
    """
    Grid of corruption levels. kind=salt: rows are salt radii, columns salt
    counts. kind=warp: rows are sinusoid amplitudes, columns salt counts with
    a fixed salt_radius.
    """

    model_config = {"extra": "forbid"}

    kind: Literal["salt", "warp"] = "salt"
    strengths: List[float] = Field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    counts: List[int] = Field(default_factory=lambda: [0, 2, 4, 6, 8])
    frequency: Pair = Field((0.5, 2.0), description="Sinusoid frequency range for kind=warp")
    salt_radius: float = Field(9.0, ge=0.0, description="Salt radius for kind=warp")

    @field_validator("strengths", "counts")
    @classmethod
    def _nonnegative(cls, value: list) -> list:
        if not value or min(value) < 0:
            raise ValueError("grid axes need at least one nonnegative value")
        return value


class ExperimentConfig(BaseModel):
    model_config = {"extra": "forbid"}

    dataset: DatasetSection = Field(default_factory=DatasetSection)
    discretization: DiscretizationSection = Field(default_factory=DiscretizationSection)
    run: RunSection = Field(default_factory=RunSection)
    classifier: ClassifierSection = Field(default_factory=ClassifierSection)
    phase: Optional[PhaseSection] = None

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.dataset.kind == "linmnist" and self.classifier.kind != "knn":
            raise ValueError("dataset.kind=linmnist has no templates; use classifier.kind=knn")
        if self.classifier.kind == "knn" and self.classifier.train_per_class >= self.dataset.samples_per_class:
            raise ValueError("classifier.train_per_class must leave test samples in every class")
        if self.classifier.kind == "probe":
            missing = [t for t in self.classifier.probe_classes if t not in self.dataset.template_ids]
            if missing:
                raise ValueError(f"probe classes {missing} are not in dataset.template_ids")
        return self

    # ------------------------------------------------------------------ text form

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError([ConfigIssue(path="<document>", line=line, message=str(exc).splitlines()[0])]) from exc
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError([ConfigIssue(path="<document>", line=1, message="top level must be a mapping")])
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(_issues(exc, text)) from exc

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        return cls.from_yaml(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_yaml(), encoding="utf-8", newline="\n")
        return path

    # ------------------------------------------------------------------ derived values

    def config_hash(self) -> str:
        """First 16 hex digits of SHA-256 over the canonical JSON dump (output_dir excluded)"""
        data = self.to_dict()
        data["run"].pop("output_dir", None)
        payload = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        data = self.to_dict()
        data["run"]["seed"] = seed
        return ExperimentConfig.model_validate(data)

    def with_overrides(self, **run_fields: Any) -> "ExperimentConfig":
        """Copy with fields of the run section replaced (None values are ignored)"""
        data = self.to_dict()
        data["run"].update({k: v for k, v in run_fields.items() if v is not None})
        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(_issues(exc, None)) from exc

    def dataset_spec(
        self,
        seed: Optional[int] = None,
        corruption: Optional[CorruptionRanges] = None,
    ) -> DatasetSpec:
        try:
            affine, default_corruption = self.dataset.ranges()
            return DatasetSpec(
                template_ids=tuple(self.dataset.template_ids),
                samples_per_class=self.dataset.samples_per_class,
                image_size=self.dataset.image_size,
                affine=affine,
                corruption=corruption if corruption is not None else default_corruption,
                seed=self.run.seed if seed is None else seed,
            )
        except InvalidRange as exc:
            raise ConfigError([ConfigIssue(path="dataset", message=str(exc))]) from exc


# ============================================================================
# Error locations
# ============================================================================

def _key_lines(text: Optional[str]) -> Dict[Tuple[str, ...], int]:
    """1-based line of every mapping key, addressed by its key path"""
    if not text:
        return {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: Dict[Tuple[str, ...], int] = {}

    def walk(node, prefix: Tuple[str, ...]) -> None:
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = prefix + (str(key.value),)
                lines[path] = key.start_mark.line + 1
                walk(value, path)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                lines[prefix + (str(i),)] = item.start_mark.line + 1
                walk(item, prefix + (str(i),))

    if root is not None:
        walk(root, ())
    return lines


def _issues(exc: ValidationError, text: Optional[str]) -> List[ConfigIssue]:
    lines = _key_lines(text)
    issues = []
    for error in exc.errors():
        loc = tuple(str(part) for part in error.get("loc", ()))
        line = None
        for cut in range(len(loc), 0, -1):
            if loc[:cut] in lines:
                line = lines[loc[:cut]]
                break
        issues.append(ConfigIssue(path=".".join(loc) or "<document>", line=line, message=error.get("msg", "invalid")))
    return issues
