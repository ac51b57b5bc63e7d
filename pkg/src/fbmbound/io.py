"""On-disk formats: binary trajectory logs, CSV logs, weight archives, summaries.

Binary trajectory log (little-endian)::

    offset size field
    0      4    magic b"TRJL"
    4      1    version (1)
    5      1    dtype (0 = float32, 1 = float64)
    6      2    reserved (0)
    8      8    n_rows (u64)
    16     8    n_cols (u64)
    24     ...  n_rows * n_cols values, row-major
"""

from __future__ import annotations

import os
import struct
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .errors import DomainError, FormatError

__all__ = [
    "MAGIC",
    "HEADER",
    "write_log",
    "read_log",
    "write_csv_log",
    "read_csv_log",
    "write_weights",
    "read_weights",
    "write_kv",
    "read_kv",
    "format_value",
]

MAGIC = b"TRJL"
VERSION = 1
HEADER = struct.Struct("<4sBBHQQ")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}

PathLike = Union[str, os.PathLike]


def _as_matrix(m) -> np.ndarray:
    data = getattr(m, "data", m)
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2:
        raise DomainError(f"log payload must be 2-d, got shape {data.shape}")
    return data


def write_log(m, path: PathLike, dtype: int = 1) -> None:
    """Write a matrix as a binary log, or as CSV when the path ends in ``.csv``."""
    if str(path).endswith(".csv"):
        write_csv_log(m, path)
        return
    if dtype not in _DTYPES:
        raise DomainError(f"dtype code must be 0 or 1, got {dtype}")
    data = _as_matrix(m)
    if not np.all(np.isfinite(data)):
        raise DomainError("log payload contains non-finite values")
    header = HEADER.pack(MAGIC, VERSION, dtype, 0, data.shape[0], data.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype=_DTYPES[dtype]).tobytes())


def read_log(path: PathLike) -> np.ndarray:
    """Read a binary (or ``.csv``) log into a float64 ``rows x cols`` array."""
    if str(path).endswith(".csv"):
        return read_csv_log(path)
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise FormatError(f"header short: {len(raw)} of {HEADER.size} bytes", field="header")
    magic, version, dtype, reserved, rows, cols = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", field="magic")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", field="version")
    if dtype not in _DTYPES:
        raise FormatError(f"unknown dtype code {dtype}", field="dtype")
    if reserved != 0:
        raise FormatError(f"reserved field is {reserved}, expected 0", field="reserved")
    width = _DTYPES[dtype].itemsize
    expected = rows * cols * width
    payload = len(raw) - HEADER.size
    if payload < expected:
        raise FormatError(f"payload short: {payload} of {expected} bytes", field="payload")
    if payload > expected:
        raise FormatError(f"payload long: {payload} of {expected} bytes", field="payload")
    data = np.frombuffer(raw, dtype=_DTYPES[dtype], offset=HEADER.size).reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        raise FormatError("payload contains NaN or Inf", field="payload")
    return data.astype(np.float64)


def write_csv_log(m, path: PathLike) -> None:
    data = _as_matrix(m)
    header = ",".join(f"c{j}" for j in range(data.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_csv_log(path: PathLike) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("c0"):
            raise FormatError("CSV log must start with a c0,c1,... header", field="header")
        cols = len(header.split(","))
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != cols:
                raise FormatError(f"line {lineno}: expected {cols} values", field="payload")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}", field="payload") from None
    data = np.array(rows, dtype=float).reshape(-1, cols)
    if not np.all(np.isfinite(data)):
        raise FormatError("payload contains NaN or Inf", field="payload")
    return data


def write_weights(layers, path: PathLike) -> None:
    """Text archive: ``layer <index> <rows> <cols>`` then one line per row."""
    with open(path, "w") as fh:
        for i, w in enumerate(layers):
            w = np.asarray(w, dtype=float)
            fh.write(f"layer {i} {w.shape[0]} {w.shape[1]}\n")
            for row in w:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_weights(path: PathLike) -> list:
    layers = []
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    pos = 0
    while pos < len(lines):
        head = lines[pos].split()
        if len(head) != 4 or head[0] != "layer":
            raise FormatError(f"expected layer header, got {lines[pos]!r}", field="header")
        rows, cols = int(head[2]), int(head[3])
        body = lines[pos + 1 : pos + 1 + rows]
        if len(body) != rows:
            raise FormatError(f"layer {head[1]}: payload short", field="payload")
        w = np.array([[float(v) for v in ln.split()] for ln in body])
        if w.shape != (rows, cols):
            raise FormatError(f"layer {head[1]}: expected {rows}x{cols}", field="payload")
        layers.append(w)
        pos += 1 + rows
    return layers


def format_value(v) -> str:
    if v is None:
        return "absent"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_kv(items: Mapping, path: PathLike) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={format_value(v)}\n")


def read_kv(path: PathLike) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"malformed line {line!r}", field="summary")
            out[key] = value
    return out
