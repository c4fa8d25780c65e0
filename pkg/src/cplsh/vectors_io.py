"""Binary vectors file format: per record, one little-endian uint32 dimension
followed by that many little-endian IEEE-754 float32 values.  Bit-exact."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, FileFormatError


def write_vectors(path, vectors) -> None:
    """Write an (n, d) array as n records of [u32 d][d x f32]."""
    arr = np.asarray(vectors, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError("write_vectors expects a nonempty 2-d array")
    n, d = arr.shape
    buf = np.empty((n, d + 1), dtype="<f4")
    buf[:, :1].view("<u4")[:] = d
    buf[:, 1:] = arr
    with open(path, "wb") as fh:
        fh.write(buf.tobytes())


def read_vectors(path) -> np.ndarray:
    """Read a vectors file into an (n, d) float32 array.

    All records must share one dimension; truncated or ragged files raise
    FileFormatError.  An empty file reads as a (0, 0) array.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw:
        return np.zeros((0, 0), dtype=np.float32)
    if len(raw) < 4:
        raise FileFormatError("truncated header")
    d = int(np.frombuffer(raw[:4], dtype="<u4")[0])
    if d == 0:
        raise FileFormatError("record dimension must be positive")
    stride = 4 * (d + 1)
    if len(raw) % stride != 0:
        raise FileFormatError(
            f"file size {len(raw)} is not a whole number of {stride}-byte records"
        )
    table = np.frombuffer(raw, dtype="<f4").reshape(-1, d + 1)
    dims = table[:, :1].view("<u4").ravel()
    if not np.all(dims == d):
        raise FileFormatError("records disagree on dimension")
    return np.ascontiguousarray(table[:, 1:])
