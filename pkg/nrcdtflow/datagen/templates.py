"""
Parametric template glyphs.

Twelve glyphs: a base outline (disc, square, triangle) combined with a topper
(none, horizontal bar, plus, saltire) drawn inside the base. Template id
t in 1..12 maps to base (t - 1) // 4 and topper (t - 1) % 4.

Shapes are rasterized on a 4x supersampled canvas with scikit-image and
box-filtered down, which anti-aliases the strokes. All geometry is given in
domain units of [-1/sqrt(2), 1/sqrt(2)]^2 and stays within radius 0.37 of the
centre, far inside the unit disc.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from skimage.draw import polygon as draw_polygon
from skimage.measure import block_reduce

from ..transforms.measures import DOMAIN_HALF_WIDTH
from .params import TEMPLATE_COUNT, BadTemplateId

logger = logging.getLogger(__name__)

BASES = ("disc", "square", "triangle")
TOPPERS = ("none", "bar", "plus", "saltire")

SUPERSAMPLE = 4
STROKE = 0.05
DISC_RADIUS = 0.30
SQUARE_HALF_SIDE = 0.26
TRIANGLE_CIRCUMRADIUS = 0.34


def template_name(template_id: int) -> str:
    base, topper = _parts(template_id)
    return f"{BASES[base]}-{TOPPERS[topper]}"


def _parts(template_id: int) -> Tuple[int, int]:
    if not isinstance(template_id, (int, np.integer)) or not 1 <= template_id <= TEMPLATE_COUNT:
        raise BadTemplateId(f"template id must lie in 1..{TEMPLATE_COUNT}, got {template_id!r}")
    return divmod(int(template_id) - 1, len(TOPPERS))


class _Canvas:
    """Supersampled boolean canvas addressed in domain coordinates (x right, y up)"""

    def __init__(self, size: int):
        self.size = size
        self.pixels_per_unit = size / (2.0 * DOMAIN_HALF_WIDTH)

    def to_index(self, xs, ys):
        cols = (np.asarray(xs) + DOMAIN_HALF_WIDTH) * self.pixels_per_unit - 0.5
        rows = (DOMAIN_HALF_WIDTH - np.asarray(ys)) * self.pixels_per_unit - 0.5
        return rows, cols

    def polygon(self, vertices: np.ndarray) -> np.ndarray:
        mask = np.zeros((self.size, self.size), dtype=bool)
        rows, cols = self.to_index(vertices[:, 0], vertices[:, 1])
        rr, cc = draw_polygon(rows, cols, shape=mask.shape)
        mask[rr, cc] = True
        return mask

    def disc(self, radius: float) -> np.ndarray:
        centres = (np.arange(self.size) + 0.5) / self.pixels_per_unit - DOMAIN_HALF_WIDTH
        xx, yy = np.meshgrid(centres, -centres)
        return xx * xx + yy * yy < radius * radius


def _regular(circumradius: float, sides: int, phase: float) -> np.ndarray:
    angles = phase + 2.0 * np.pi * np.arange(sides) / sides
    return circumradius * np.column_stack((np.cos(angles), np.sin(angles)))


def _bar(half_length: float, angle: float) -> np.ndarray:
    half_width = STROKE / 2.0
    corners = np.array(
        [[-half_length, -half_width], [half_length, -half_width], [half_length, half_width], [-half_length, half_width]]
    )
    c, s = math.cos(angle), math.sin(angle)
    return corners @ np.array([[c, s], [-s, c]])


def _base(canvas: _Canvas, base: int) -> Tuple[np.ndarray, np.ndarray]:
    """(outline, filled interior) of the base shape"""
    if base == 0:
        filled = canvas.disc(DISC_RADIUS)
        inner = canvas.disc(DISC_RADIUS - STROKE)
    elif base == 1:
        diag = SQUARE_HALF_SIDE * math.sqrt(2.0)
        filled = canvas.polygon(_regular(diag, 4, np.pi / 4))
        inner = canvas.polygon(_regular(diag - STROKE * math.sqrt(2.0), 4, np.pi / 4))
    else:
        # inradius of an equilateral triangle is half its circumradius
        filled = canvas.polygon(_regular(TRIANGLE_CIRCUMRADIUS, 3, np.pi / 2))
        inner = canvas.polygon(_regular(TRIANGLE_CIRCUMRADIUS - 2.0 * STROKE, 3, np.pi / 2))
    return filled & ~inner, filled


def _topper(canvas: _Canvas, topper: int, reach: float) -> np.ndarray:
    mask = np.zeros((canvas.size, canvas.size), dtype=bool)
    if topper == 0:
        return mask
    if topper == 1:
        angles = (0.0,)
    elif topper == 2:
        angles = (0.0, np.pi / 2)
    else:
        angles = (np.pi / 4, -np.pi / 4)
    for angle in angles:
        mask |= canvas.polygon(_bar(reach, angle))
    return mask


@lru_cache(maxsize=64)
def _render(template_id: int, size: int) -> np.ndarray:
    base, topper = _parts(template_id)
    canvas = _Canvas(size * SUPERSAMPLE)
    outline, filled = _base(canvas, base)
    strokes = outline | (_topper(canvas, topper, reach=TRIANGLE_CIRCUMRADIUS) & filled)
    image = block_reduce(strokes.astype(float), (SUPERSAMPLE, SUPERSAMPLE), np.mean)
    image.setflags(write=False)
    logger.debug(f"Rendered template {template_id} ({template_name(template_id)}) at {size}px")
    return image


def render_template(template_id: int, size: int = 256) -> np.ndarray:
    """
    Gray-value glyph of shape (size, size) with values in [0, 1].

    Raises BadTemplateId for ids outside 1..12 and ValueError for size < 64.
    The returned array is read-only and shared between calls.
    """
    if size < 64:
        raise ValueError("template size must be at least 64 pixels")
    _parts(template_id)
    return _render(int(template_id), int(size))


def render_all(size: int = 256) -> np.ndarray:
    return np.stack([render_template(t, size) for t in range(1, TEMPLATE_COUNT + 1)])
