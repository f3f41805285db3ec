"""Matrix file formats: raw binary, CSV and Matrix Market.

Binary layout (all little-endian)::

    offset 0   4 bytes   magic b"SKCM"
    offset 4   u32       version (1)
    offset 8   u64       rows
    offset 16  u64       cols
    offset 24  rows*cols float64, row-major
"""

from __future__ import annotations

import csv
import os
import struct
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .matcore import as_matrix

MAGIC = b"SKCM"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")
FORMATS = ("binary", "csv", "mtx")
_EXTENSIONS = {".skcm": "binary", ".bin": "binary", ".csv": "csv", ".mtx": "mtx"}


class MatrixFormatError(ValueError):
    """A matrix file is malformed; ``location`` names the line, cell or byte offset."""

    def __init__(self, path, location: str, message: str):
        self.path = str(path)
        self.location = location
        super().__init__(f"{path}: {location}: {message}")


def infer_format(path, fmt: str | None = None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
        return fmt
    ext = Path(path).suffix.lower()
    if ext not in _EXTENSIONS:
        raise ValueError(f"cannot infer matrix format from extension {ext!r}; pass a format explicitly")
    return _EXTENSIONS[ext]


def save_matrix(path, a, fmt: str | None = None) -> None:
    fmt = infer_format(path, fmt)
    a = as_matrix(a)
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1]))
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in a:
                writer.writerow([format(v, ".17g") for v in row])
    else:
        scipy.io.mmwrite(str(path), a, precision=17)


def load_matrix(path, fmt: str | None = None, mmap: bool = False) -> np.ndarray:
    """Read a matrix. With ``mmap=True`` a binary file is memory-mapped, not loaded."""
    fmt = infer_format(path, fmt)
    if fmt == "binary":
        return _load_binary(path, mmap)
    if fmt == "csv":
        return _load_csv(path)
    return _load_mtx(path)


def _load_binary(path, mmap):
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
        if len(head) < HEADER.size:
            raise MatrixFormatError(path, "byte 0", f"header needs {HEADER.size} bytes, file has {len(head)}")
        magic, version, rows, cols = HEADER.unpack(head)
        if magic != MAGIC:
            raise MatrixFormatError(path, "byte 0", f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise MatrixFormatError(path, "byte 4", f"unsupported version {version}, expected {VERSION}")
        if rows < 1 or cols < 1:
            raise MatrixFormatError(path, "byte 8", f"dimensions must be positive, got {rows}x{cols}")
        expected = rows * cols * 8
        actual = size - HEADER.size
        if actual != expected:
            raise MatrixFormatError(
                path,
                f"byte {HEADER.size}",
                f"payload for {rows}x{cols} needs {expected} bytes, found {actual}",
            )
        if mmap:
            return np.memmap(path, dtype="<f8", mode="r", offset=HEADER.size, shape=(rows, cols))
        data = np.frombuffer(fh.read(expected), dtype="<f8").reshape(rows, cols).astype(np.float64)
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        i, j = bad[0]
        raise MatrixFormatError(path, f"byte {HEADER.size + 8 * (i * cols + j)}", f"non-finite entry at ({i}, {j})")
    return data


def _load_csv(path):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise MatrixFormatError(path, f"line {lineno}, column {col}", f"cannot parse {cell!r} as a number")
                if not np.isfinite(v):
                    raise MatrixFormatError(path, f"line {lineno}, column {col}", f"non-finite value {cell!r}")
                values.append(v)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise MatrixFormatError(path, f"line {lineno}", f"expected {width} cells, found {len(values)}")
            rows.append(values)
    if not rows:
        raise MatrixFormatError(path, "line 1", "no data rows")
    return np.array(rows, dtype=np.float64)


def _load_mtx(path):
    try:
        data = scipy.io.mmread(str(path))
    except Exception as exc:  # scipy raises ValueError, IndexError, ... on bad input
        raise MatrixFormatError(path, "header", str(exc)) from exc
    if scipy.sparse.issparse(data):
        data = data.toarray()
    data = np.asarray(data)
    if np.iscomplexobj(data):
        raise MatrixFormatError(path, "header", "complex matrices are not supported")
    data = data.astype(np.float64)
    if data.ndim != 2 or min(data.shape) < 1:
        raise MatrixFormatError(path, "header", f"expected a nonempty 2-D matrix, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise MatrixFormatError(path, "data", "non-finite entries")
    return data
