"""
Image corruptions: affine warps, sinusoidal warps and salt noise.

Warps use inverse mapping. Each output pixel is sampled from the input at a
real-valued position with a 3x3 quadratic Lagrange stencil centred on the
nearest input pixel; samples outside the frame read zero and negative
interpolation overshoot is clamped to zero. Offsets closer than 1e-9 to an
integer are snapped, so lattice-aligned warps copy pixels bit-exactly.
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np
from skimage.draw import disk

from ..transforms.measures import DOMAIN_HALF_WIDTH, pixel_centers
from ..transforms.radon import SingularMatrix
from .params import AffineParams, AffineRanges, CorruptionParams, CorruptionRanges

logger = logging.getLogger(__name__)

SNAP_TOLERANCE = 1e-9


def _lagrange_weights(offset: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weights of the taps at -1, 0, +1 for a fractional offset in [-1/2, 1/2]"""
    d = offset
    return d * (d - 1.0) / 2.0, 1.0 - d * d, d * (d + 1.0) / 2.0


def sample_quadratic(image: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """
    Bi-quadratic interpolation of `image` at index positions (rows, cols).

    Positions are in array index units (row 0 / col 0 is the first pixel
    centre); the result has the shape of `rows`.
    """
    height, width = image.shape
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)

    r0 = np.rint(rows)
    c0 = np.rint(cols)
    dr = rows - r0
    dc = cols - c0
    dr[np.abs(dr) < SNAP_TOLERANCE] = 0.0
    dc[np.abs(dc) < SNAP_TOLERANCE] = 0.0
    r0 = r0.astype(np.int64)
    c0 = c0.astype(np.int64)

    row_weights = _lagrange_weights(dr)
    col_weights = _lagrange_weights(dc)
    out = np.zeros(rows.shape)
    for i, wr in zip((-1, 0, 1), row_weights):
        rr = r0 + i
        row_ok = (rr >= 0) & (rr < height)
        for j, wc in zip((-1, 0, 1), col_weights):
            cc = c0 + j
            ok = row_ok & (cc >= 0) & (cc < width)
            values = np.zeros(rows.shape)
            values[ok] = image[rr[ok], cc[ok]]
            out += wr * wc * values
    return np.maximum(out, 0.0)


def warp_affine(
    image: np.ndarray,
    params: AffineParams,
    domain_half_width: float = DOMAIN_HALF_WIDTH,
) -> np.ndarray:
    """
    Apply x -> A x + y about the image centre.

    Output pixel p samples the input at A^-1 (p - y); p and y are in domain
    coordinates (x right, y up), the shift is converted from pixels.
    """
    img = np.asarray(image, dtype=float)
    height, width = img.shape
    matrix = params.matrix
    det = float(np.linalg.det(matrix))
    if abs(det) <= 1e-12:
        raise SingularMatrix(f"affine matrix is singular (det = {det:.3e})")
    inverse = np.linalg.inv(matrix)
    offset = params.offset(width, domain_half_width)

    xx, yy = pixel_centers(img.shape, domain_half_width)
    px = xx.ravel() - offset[0]
    py = yy.ravel() - offset[1]
    sx = inverse[0, 0] * px + inverse[0, 1] * py
    sy = inverse[1, 0] * px + inverse[1, 1] * py

    cols = (sx + domain_half_width) * (width / (2.0 * domain_half_width)) - 0.5
    rows = (domain_half_width - sy) * (height / (2.0 * domain_half_width)) - 0.5
    return sample_quadratic(img, rows, cols).reshape(img.shape)


def warp_sinusoidal(image: np.ndarray, params: CorruptionParams) -> np.ndarray:
    """Output (j, k) reads the input at (j + a1 sin(2 pi f1 k / N), k + a2 cos(2 pi f2 j / N))"""
    img = np.asarray(image, dtype=float)
    height, width = img.shape
    jj, kk = np.meshgrid(np.arange(height, dtype=float), np.arange(width, dtype=float), indexing="ij")
    rows = jj + params.amp_1 * np.sin(2.0 * np.pi * params.freq_1 * kk / width)
    cols = kk + params.amp_2 * np.cos(2.0 * np.pi * params.freq_2 * jj / height)
    return sample_quadratic(img, rows, cols)


def salt_centres(params: CorruptionParams, shape: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """(count, 2) disc centres in (row, col), uniform inside the disc of radius N/2 - radius"""
    height, width = shape
    reach = max(min(height, width) / 2.0 - params.salt_radius, 0.0)
    radius = reach * np.sqrt(rng.random(params.salt_count))
    angle = 2.0 * np.pi * rng.random(params.salt_count)
    return np.column_stack(
        ((height - 1) / 2.0 + radius * np.sin(angle), (width - 1) / 2.0 + radius * np.cos(angle))
    )


def add_salt(image: np.ndarray, params: CorruptionParams, rng: np.random.Generator) -> np.ndarray:
    """Set `salt_count` discs of radius `salt_radius` pixels to the image maximum"""
    img = np.array(image, dtype=float)
    if params.salt_count == 0:
        return img
    peak = float(img.max())
    for row, col in salt_centres(params, img.shape, rng):
        rr, cc = disk((row, col), params.salt_radius, shape=img.shape)
        img[rr, cc] = peak
    return img


# ============================================================================
# Parameter draws
# ============================================================================

def sample_affine(ranges: AffineRanges, rng: np.random.Generator) -> AffineParams:
    """Independent uniform draws in a fixed order: scales, shears, rotation, shifts"""
    scale_x = rng.uniform(*ranges.scale_x)
    scale_y = rng.uniform(*ranges.scale_y)
    if ranges.isotropic:
        scale_y = scale_x
    return AffineParams(
        scale_x=float(scale_x),
        scale_y=float(scale_y),
        shear_x=float(rng.uniform(*ranges.shear_x)),
        shear_y=float(rng.uniform(*ranges.shear_y)),
        rotation=float(rng.uniform(*ranges.rotation)),
        shift_x=float(rng.uniform(*ranges.shift_x)),
        shift_y=float(rng.uniform(*ranges.shift_y)),
    )


def sample_corruption(
    ranges: CorruptionRanges,
    warp_rng: np.random.Generator,
    salt_rng: np.random.Generator,
) -> CorruptionParams:
    lo, hi = ranges.salt_count
    return CorruptionParams(
        freq_1=float(warp_rng.uniform(*ranges.frequency)),
        freq_2=float(warp_rng.uniform(*ranges.frequency)),
        amp_1=float(warp_rng.uniform(*ranges.amplitude)),
        amp_2=float(warp_rng.uniform(*ranges.amplitude)),
        salt_count=int(salt_rng.integers(lo, hi, endpoint=True)),
        salt_radius=float(ranges.salt_radius),
    )
