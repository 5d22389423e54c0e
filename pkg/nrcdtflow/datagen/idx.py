"""
IDX container reader/writer (MNIST-style files).

Layout (big-endian):
    u32 magic   0x00000803 for u8 images, 0x00000801 for u8 labels
    u32 dims    count [, rows, cols]
    u8[]        payload, row-major

Files ending in .gz are read and written through gzip.
"""

from __future__ import annotations

import gzip
import logging
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .params import DatagenError

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

_DIMENSIONS = {IMAGE_MAGIC: 3, LABEL_MAGIC: 1}

PathLike = Union[str, Path]


class BadMagic(DatagenError, ValueError):
    pass


class TruncatedFile(DatagenError, ValueError):
    pass


def _open(path: Path, mode: str):
    if path.suffix == ".gz":
        return gzip.open(path, mode)
    return open(path, mode)


def parse_idx(data: bytes) -> np.ndarray:
    if len(data) < 4:
        raise TruncatedFile("file ends inside the magic number")
    (magic,) = struct.unpack(">I", data[:4])
    ndim = _DIMENSIONS.get(magic)
    if ndim is None:
        raise BadMagic(f"unsupported IDX magic 0x{magic:08x}")
    header = 4 + 4 * ndim
    if len(data) < header:
        raise TruncatedFile("file ends inside the dimension header")
    dims = struct.unpack(f">{ndim}I", data[4:header])
    expected = int(np.prod(dims, dtype=np.int64))
    payload = len(data) - header
    if payload < expected:
        raise TruncatedFile(f"payload has {payload} bytes, header announces {expected}")
    if payload > expected:
        logger.warning(f"IDX payload has {payload - expected} trailing bytes; ignored")
    return np.frombuffer(data, dtype=np.uint8, count=expected, offset=header).reshape(dims).copy()


def read_idx(path: PathLike) -> np.ndarray:
    """Images as (count, rows, cols) uint8, labels as (count,) uint8"""
    path = Path(path)
    with _open(path, "rb") as handle:
        data = handle.read()
    array = parse_idx(data)
    logger.debug(f"Read IDX {path.name}: shape {array.shape}")
    return array


def encode_idx(array: np.ndarray) -> bytes:
    values = np.asarray(array)
    if values.dtype != np.uint8:
        raise ValueError(f"IDX writer expects uint8 data, got {values.dtype}")
    if values.ndim == 3:
        magic = IMAGE_MAGIC
    elif values.ndim == 1:
        magic = LABEL_MAGIC
    else:
        raise ValueError("IDX writer expects a (count, rows, cols) or (count,) array")
    header = struct.pack(f">I{values.ndim}I", magic, *values.shape)
    return header + np.ascontiguousarray(values).tobytes()


def write_idx(path: PathLike, array: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _open(path, "wb") as handle:
        handle.write(encode_idx(array))
    return path


def _find(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"{stem} not found in {directory}")


def load_mnist(directory: PathLike, split: str = "train") -> Tuple[np.ndarray, np.ndarray]:
    """(images, labels) of the standard file pair of `split` ("train" or "t10k")"""
    if split not in ("train", "t10k"):
        raise ValueError(f"split must be 'train' or 't10k', got {split!r}")
    directory = Path(directory)
    images = read_idx(_find(directory, f"{split}-images-idx3-ubyte"))
    labels = read_idx(_find(directory, f"{split}-labels-idx1-ubyte"))
    if images.shape[0] != labels.shape[0]:
        raise DatagenError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return images, labels
