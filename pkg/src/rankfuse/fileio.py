"""Matrix file formats (CSV, raw float64) and JSON report serialization.

raw-f64 layout: 16-byte little-endian header ``(rows: u64, cols: u64)``
followed by ``rows * cols`` little-endian float64 values in row-major order.
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import MatrixParseError
from .spectral import as_feature_matrix

SCHEMA_VERSION = "1.0.0"
FORMATS = ("csv", "raw-f64")
_RAW_SUFFIXES = {".f64", ".bin", ".raw"}
_HEADER = struct.Struct("<QQ")


def infer_format(path) -> str:
    return "raw-f64" if Path(path).suffix.lower() in _RAW_SUFFIXES else "csv"


def parse_csv(text: str, source: str = "<csv>") -> np.ndarray:
    """Parse comma-separated rows; one optional leading ``#`` header line."""
    rows: list[list[float]] = []
    linenos: list[int] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if lineno == 1 and line.startswith("#"):
            continue
        if not line.strip():
            continue
        fields = line.split(",")
        values = []
        for col, field in enumerate(fields, start=1):
            try:
                values.append(float(field))
            except ValueError:
                raise MatrixParseError(
                    f"{source}: line {lineno}, column {col}: cannot parse {field.strip()!r} as a number"
                ) from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise MatrixParseError(
                f"{source}: line {lineno}: expected {width} columns, found {len(values)}"
            )
        rows.append(values)
        linenos.append(lineno)
    if not rows:
        raise MatrixParseError(f"{source}: no data rows")
    arr = np.array(rows, dtype=np.float64)
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        r, c = bad[0]
        raise MatrixParseError(f"{source}: line {linenos[r]}, column {c + 1}: non-finite value")
    return arr


def format_csv(X: np.ndarray, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines.extend(",".join(repr(float(v)) for v in row) for row in X)
    return "\n".join(lines) + "\n"


def read_raw(data: bytes, source: str = "<raw>") -> np.ndarray:
    if len(data) < _HEADER.size:
        raise MatrixParseError(f"{source}: file shorter than the 16-byte header")
    rows, cols = _HEADER.unpack_from(data)
    expected = _HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise MatrixParseError(
            f"{source}: header says {rows}x{cols} ({expected} bytes) but file has {len(data)} bytes"
        )
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    if not np.all(np.isfinite(arr)):
        raise MatrixParseError(f"{source}: contains NaN or Inf")
    return arr.astype(np.float64)


def format_raw(X: np.ndarray) -> bytes:
    X = np.ascontiguousarray(X, dtype="<f8")
    return _HEADER.pack(X.shape[0], X.shape[1]) + X.tobytes(order="C")


def read_matrix(path, fmt: str | None = None, batch_rows: int | None = None) -> np.ndarray:
    """Load a feature matrix.

    ``batch_rows`` declares the file as a flattened ``(B * T) x D`` dump with
    ``B`` batches; the row count must divide evenly.
    """
    path = Path(path)
    fmt = fmt or infer_format(path)
    try:
        if fmt == "raw-f64":
            X = read_raw(path.read_bytes(), str(path))
        elif fmt == "csv":
            X = parse_csv(path.read_text(), str(path))
        else:
            raise MatrixParseError(f"unknown matrix format {fmt!r}")
    except OSError as exc:
        raise MatrixParseError(f"{path}: {exc.strerror or exc}") from None
    if batch_rows is not None:
        if batch_rows < 1 or X.shape[0] % batch_rows:
            raise MatrixParseError(
                f"{path}: {X.shape[0]} rows do not split into {batch_rows} equal batches"
            )
    return X


def write_matrix(path, X, fmt: str | None = None, header: str | None = None) -> Path:
    path = Path(path)
    X = as_feature_matrix(X)
    fmt = fmt or infer_format(path)
    if fmt == "raw-f64":
        path.write_bytes(format_raw(X))
    else:
        path.write_text(format_csv(X, header))
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return obj


def dumps_report(payload: dict, kind: str) -> str:
    """Serialize a report with ``schema_version`` and ``kind`` keys.

    Floats use the shortest repr that round-trips exactly; non-finite values
    become the strings ``"inf"``, ``"-inf"`` or ``"nan"``.
    """
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **_jsonable(payload)}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_report(path, payload: dict, kind: str) -> Path:
    path = Path(path)
    path.write_text(dumps_report(payload, kind))
    return path
