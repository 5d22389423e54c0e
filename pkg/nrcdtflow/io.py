"""
File codecs shared by dataset generation and the experiment runner.

Formats:
- CSV: header row, '.' decimal separator, LF line endings (pandas)
- PGM: binary P5, maxval 255 (heatmaps) or 65535 (dataset images), one
  comment line carrying seed and config hash
- Binary dumps: '<4sII' header (magic, L, M) followed by little-endian
  float64 values in column-major order. Magic "RCDT" holds one L x M
  quantile field, "NRCF" holds M feature vectors of length L.

Usage:
    write_csv(rows, "results/table.csv", columns=["representation", "accuracy_mean"])
    write_pgm(accuracy, "results/phase.pgm", comment="seed=7 config=...")
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import NrcdtFlowError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FIELD_MAGIC = b"RCDT"
FEATURE_MAGIC = b"NRCF"
_DUMP_HEADER = struct.Struct("<4sII")


class OutputError(NrcdtFlowError, OSError):
    """Reading or writing an output file failed"""
    pass


class ValueOutOfRange(NrcdtFlowError, ValueError):
    pass


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {path.parent}: {exc}") from exc
    return path


def _write_bytes(path: PathLike, payload: bytes) -> Path:
    path = _prepare(path)
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


# ============================================================================
# CSV
# ============================================================================

def write_csv(
    rows: Union[pd.DataFrame, Sequence[Mapping]],
    path: PathLike,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    """
    Write a result table.

    Args:
        rows: DataFrame or sequence of row mappings
        path: destination file
        columns: fixed column order; an empty table still gets this header
    """
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
    if columns is not None:
        frame = frame.reindex(columns=list(columns))
    path = _prepare(path)
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


# ============================================================================
# PGM
# ============================================================================

def encode_pgm(matrix: np.ndarray, maxval: int = 255, comment: Optional[str] = None) -> bytes:
    values = np.asarray(matrix, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"PGM expects a 2-D matrix, got shape {values.shape}")
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise ValueOutOfRange("PGM values must lie in [0, 1]")

    levels = np.rint(values * maxval).astype(np.int64)
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    rows, cols = values.shape
    header = "P5\n"
    if comment:
        header += "".join(f"# {line}\n" for line in comment.splitlines())
    header += f"{cols} {rows}\n{maxval}\n"
    return header.encode("ascii") + levels.astype(dtype).tobytes()


def write_pgm(matrix: np.ndarray, path: PathLike, maxval: int = 255, comment: Optional[str] = None) -> Path:
    """Binary PGM with value v mapped to round(maxval * v)"""
    return _write_bytes(path, encode_pgm(matrix, maxval=maxval, comment=comment))


def decode_pgm(data: bytes) -> Tuple[np.ndarray, int, List[str]]:
    """(integer levels, maxval, comment lines) of a P5 file"""
    position = 0
    tokens: List[bytes] = []
    comments: List[str] = []
    while len(tokens) < 4:
        while position < len(data) and data[position:position + 1].isspace():
            position += 1
        if position >= len(data):
            raise ValueError("truncated PGM header")
        if data[position:position + 1] == b"#":
            end = data.find(b"\n", position)
            if end < 0:
                raise ValueError("truncated PGM comment")
            comments.append(data[position + 1:end].decode("ascii").strip())
            position = end + 1
            continue
        end = position
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[position:end])
        position = end
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (magic {tokens[0]!r})")
    cols, rows, maxval = (int(t) for t in tokens[1:])
    position += 1
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    count = rows * cols
    levels = np.frombuffer(data, dtype=dtype, count=count, offset=position).reshape(rows, cols)
    return levels.astype(np.int64), maxval, comments


def read_pgm(path: PathLike) -> Tuple[np.ndarray, int, List[str]]:
    return decode_pgm(_read_bytes(path))


# ============================================================================
# Binary dumps
# ============================================================================

def encode_dump(values: np.ndarray, magic: bytes) -> bytes:
    matrix = np.asarray(values, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("dump payload must be a 2-D matrix")
    rows, cols = matrix.shape
    return _DUMP_HEADER.pack(magic, rows, cols) + matrix.astype("<f8").tobytes(order="F")


def decode_dump(data: bytes) -> Tuple[bytes, np.ndarray]:
    if len(data) < _DUMP_HEADER.size:
        raise ValueError("dump shorter than its header")
    magic, rows, cols = _DUMP_HEADER.unpack_from(data)
    if magic not in (FIELD_MAGIC, FEATURE_MAGIC):
        raise ValueError(f"unknown dump magic {magic!r}")
    expected = _DUMP_HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise ValueError(f"dump has {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=_DUMP_HEADER.size).reshape((rows, cols), order="F")
    return magic, values.astype(float)


def write_field_dump(values: np.ndarray, path: PathLike) -> Path:
    """One L x M quantile field"""
    return _write_bytes(path, encode_dump(values, FIELD_MAGIC))


def write_feature_dump(vectors: np.ndarray, path: PathLike) -> Path:
    """
    Feature vectors given as rows of a (count, L) matrix, stored as the
    L x count matrix with one vector per column.
    """
    return _write_bytes(path, encode_dump(np.asarray(vectors, dtype=float).T, FEATURE_MAGIC))


def read_dump(path: PathLike) -> Tuple[bytes, np.ndarray]:
    """
    (magic, matrix). Feature dumps come back as (count, L) rows, field dumps as
    the L x M field.
    """
    magic, values = decode_dump(_read_bytes(path))
    if magic == FEATURE_MAGIC:
        return magic, np.ascontiguousarray(values.T)
    return magic, values
