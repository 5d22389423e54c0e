"""
Parameter types for the synthetic datasets.

AffineParams / CorruptionParams are single draws; AffineRanges /
CorruptionRanges are the uniform ranges they are drawn from. Angles are in
degrees, shifts, amplitudes and salt radii in pixels.

The affine matrix is A = Rotation . ShearY . ShearX . Scale, applied about the
image centre and followed by the shift.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from ..exceptions import NrcdtFlowError
from ..settings import DEFAULT_IMAGE_SIZE
from ..transforms.measures import DOMAIN_HALF_WIDTH

Range = Tuple[float, float]

TEMPLATE_COUNT = 12


class DatagenError(NrcdtFlowError):
    pass


class InvalidRange(DatagenError, ValueError):
    pass


class BadTemplateId(DatagenError, ValueError):
    pass


def _check_range(name: str, bounds: Range, minimum: float = -math.inf) -> Range:
    lo, hi = (float(v) for v in bounds)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidRange(f"{name}: bounds must be finite, got {bounds}")
    if lo > hi:
        raise InvalidRange(f"{name}: lower bound {lo:g} exceeds upper bound {hi:g}")
    if lo < minimum:
        raise InvalidRange(f"{name}: lower bound {lo:g} below {minimum:g}")
    return lo, hi


# ============================================================================
# Single draws
# ============================================================================

@dataclass(frozen=True)
class AffineParams:
    scale_x: float = 1.0
    scale_y: float = 1.0
    shear_x: float = 0.0
    shear_y: float = 0.0
    rotation: float = 0.0
    shift_x: float = 0.0
    shift_y: float = 0.0

    @classmethod
    def identity(cls) -> "AffineParams":
        return cls()

    @property
    def matrix(self) -> np.ndarray:
        theta = math.radians(self.rotation)
        c, s = math.cos(theta), math.sin(theta)
        rotation = np.array([[c, -s], [s, c]])
        shear_y = np.array([[1.0, 0.0], [math.tan(math.radians(self.shear_y)), 1.0]])
        shear_x = np.array([[1.0, math.tan(math.radians(self.shear_x))], [0.0, 1.0]])
        scale = np.diag([self.scale_x, self.scale_y])
        return rotation @ shear_y @ shear_x @ scale

    def offset(self, size: int = DEFAULT_IMAGE_SIZE, domain_half_width: float = DOMAIN_HALF_WIDTH) -> np.ndarray:
        """Shift in domain units for an image of `size` pixels (y axis points up)"""
        return np.array([self.shift_x, self.shift_y]) * (2.0 * domain_half_width / size)

    @property
    def singular_values(self) -> Tuple[float, float]:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return float(s.min()), float(s.max())

    @property
    def distortion(self) -> float:
        """(sigma_max - sigma_min) / sigma_min"""
        s_min, s_max = self.singular_values
        return (s_max - s_min) / s_min

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class CorruptionParams:
    """Sinusoidal warp (freq_1, freq_2, amp_1, amp_2) and salt noise (count discs of salt_radius px)"""

    freq_1: float = 0.0
    freq_2: float = 0.0
    amp_1: float = 0.0
    amp_2: float = 0.0
    salt_count: int = 0
    salt_radius: float = 0.0

    def __post_init__(self):
        if self.amp_1 < 0 or self.amp_2 < 0 or self.salt_count < 0 or self.salt_radius < 0:
            raise InvalidRange("amplitudes, salt count and salt radius must be nonnegative")

    @classmethod
    def identity(cls) -> "CorruptionParams":
        return cls()

    @property
    def has_warp(self) -> bool:
        return self.amp_1 > 0 or self.amp_2 > 0

    @property
    def has_salt(self) -> bool:
        return self.salt_count > 0 and self.salt_radius > 0

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ============================================================================
# Ranges
# ============================================================================

@dataclass(frozen=True)
class AffineRanges:
    """
    Uniform ranges of the affine draw.

    isotropic=True draws one scale for both axes (translation plus isotropic
    scaling classes).
    """

    scale_x: Range = (1.0, 1.0)
    scale_y: Range = (1.0, 1.0)
    shear_x: Range = (0.0, 0.0)
    shear_y: Range = (0.0, 0.0)
    rotation: Range = (0.0, 0.0)
    shift_x: Range = (0.0, 0.0)
    shift_y: Range = (0.0, 0.0)
    isotropic: bool = False

    def __post_init__(self):
        for name in ("scale_x", "scale_y"):
            bounds = _check_range(name, getattr(self, name))
            if bounds[0] <= 0:
                raise InvalidRange(f"{name}: scales must be positive")
            object.__setattr__(self, name, bounds)
        for name in ("shear_x", "shear_y"):
            bounds = _check_range(name, getattr(self, name))
            if bounds[0] <= -90.0 or bounds[1] >= 90.0:
                raise InvalidRange(f"{name}: shear must stay inside (-90, 90) degrees")
            object.__setattr__(self, name, bounds)
        for name in ("rotation", "shift_x", "shift_y"):
            object.__setattr__(self, name, _check_range(name, getattr(self, name)))

    @classmethod
    def identity(cls) -> "AffineRanges":
        return cls()

    @classmethod
    def full(cls, scale: Range, shear: float, shift: float = 20.0) -> "AffineRanges":
        """Rotation over the full circle plus symmetric shear and shift ranges"""
        return cls(
            scale_x=scale,
            scale_y=scale,
            shear_x=(-shear, shear),
            shear_y=(-shear, shear),
            rotation=(0.0, 360.0),
            shift_x=(-shift, shift),
            shift_y=(-shift, shift),
        )

    def as_dict(self) -> Dict[str, Any]:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class CorruptionRanges:
    frequency: Range = (0.0, 0.0)
    amplitude: Range = (0.0, 0.0)
    salt_count: Tuple[int, int] = (0, 0)
    salt_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "frequency", _check_range("frequency", self.frequency))
        object.__setattr__(self, "amplitude", _check_range("amplitude", self.amplitude, minimum=0.0))
        lo, hi = _check_range("salt_count", self.salt_count, minimum=0.0)
        if lo != int(lo) or hi != int(hi):
            raise InvalidRange("salt_count bounds must be integers")
        object.__setattr__(self, "salt_count", (int(lo), int(hi)))
        if self.salt_radius < 0:
            raise InvalidRange("salt_radius must be nonnegative")

    @classmethod
    def none(cls) -> "CorruptionRanges":
        return cls()

    def as_dict(self) -> Dict[str, Any]:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class DatasetSpec:
    template_ids: Tuple[int, ...] = tuple(range(1, TEMPLATE_COUNT + 1))
    samples_per_class: int = 10
    image_size: int = DEFAULT_IMAGE_SIZE
    affine: AffineRanges = field(default_factory=AffineRanges)
    corruption: CorruptionRanges = field(default_factory=CorruptionRanges)
    seed: int = 0

    def __post_init__(self):
        ids = tuple(int(i) for i in self.template_ids)
        if not ids:
            raise InvalidRange("dataset needs at least one template id")
        for template_id in ids:
            if not 1 <= template_id <= TEMPLATE_COUNT:
                raise BadTemplateId(f"template id {template_id} outside 1..{TEMPLATE_COUNT}")
        if len(set(ids)) != len(ids):
            raise InvalidRange("template ids must be distinct")
        object.__setattr__(self, "template_ids", ids)
        if self.samples_per_class < 1:
            raise InvalidRange("samples_per_class must be at least 1")
        if self.image_size < 64:
            raise InvalidRange("image_size must be at least 64")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise InvalidRange("seed must be an unsigned 64-bit integer")

    @property
    def class_count(self) -> int:
        return len(self.template_ids)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "template_ids": list(self.template_ids),
            "samples_per_class": self.samples_per_class,
            "image_size": self.image_size,
            "affine": self.affine.as_dict(),
            "corruption": self.corruption.as_dict(),
            "seed": self.seed,
        }


# ============================================================================
# Presets
# ============================================================================

# Affine draw ranges for nearest-template runs, hardest first.
AFFINE_PRESETS: Dict[str, AffineRanges] = {
    "affine_strong": AffineRanges.full(scale=(0.5, 1.25), shear=45.0),
    "affine_medium": AffineRanges.full(scale=(0.75, 1.25), shear=35.0),
    "affine_mild": AffineRanges.full(scale=(0.75, 1.0), shear=15.0),
    "rigid": AffineRanges.full(scale=(1.0, 1.0), shear=0.0),
}

_WARP = {"frequency": (0.5, 2.0), "amplitude": (2.5, 7.5)}

# Affine and corruption ranges for k-NN runs. Strong affine alone or with a warp;
# mild affine with salt, optionally warped as well.
CORRUPTION_PRESETS: Dict[str, Tuple[AffineRanges, CorruptionRanges]] = {
    "strong_clean": (AffineRanges.full(scale=(0.5, 1.25), shear=45.0), CorruptionRanges()),
    "strong_warp": (AffineRanges.full(scale=(0.5, 1.25), shear=45.0), CorruptionRanges(**_WARP)),
    "mild_salt": (
        AffineRanges.full(scale=(0.75, 1.0), shear=5.0),
        CorruptionRanges(salt_count=(4, 7), salt_radius=9.0),
    ),
    "mild_warp_salt": (
        AffineRanges.full(scale=(0.75, 1.0), shear=5.0),
        CorruptionRanges(salt_count=(4, 7), salt_radius=9.0, **_WARP),
    ),
}

_MILD_AFFINE = AffineRanges.full(scale=(0.75, 1.0), shear=5.0)

# Nearest-template sweep over sinusoidal warp ranges under mild affine draws.
NONAFFINE_PRESETS: Dict[str, Tuple[AffineRanges, CorruptionRanges]] = {
    "mild_nowarp": (_MILD_AFFINE, CorruptionRanges()),
    "mild_warp": (_MILD_AFFINE, CorruptionRanges(**_WARP)),
    "mild_warp_strong": (_MILD_AFFINE, CorruptionRanges(frequency=(0.5, 2.0), amplitude=(8.0, 13.0))),
    "mild_ripple_small": (_MILD_AFFINE, CorruptionRanges(frequency=(0.5, 4.0), amplitude=(0.5, 2.0))),
    "mild_ripple_wide": (_MILD_AFFINE, CorruptionRanges(frequency=(0.5, 4.0), amplitude=(0.5, 7.5))),
    "mild_ripple": (_MILD_AFFINE, CorruptionRanges(frequency=(0.5, 4.0), amplitude=(2.5, 7.5))),
}

LINMNIST_RANGES = AffineRanges(
    scale_x=(0.75, 1.0),
    scale_y=(0.75, 1.0),
    rotation=(0.0, 360.0),
    shift_x=(-20.0, 20.0),
    shift_y=(-20.0, 20.0),
)
