"""CSV files holding a single dyadic path (header ``t,value``)."""

from __future__ import annotations

import csv

import numpy as np

from .errors import FormatError
from .paths import DyadicPath

HEADER = ("t", "value")
SPACING_RTOL = 1e-12


def write_path_csv(path: DyadicPath, file) -> None:
    """Write with 17 significant digits so that reading back is exact."""
    t = path.t
    with open(file, "w", newline="") as fh:
        fh.write("t,value\n")
        fh.writelines(f"{a:.17g},{b:.17g}\n" for a, b in zip(t, path.values))


def nearest_valid_counts(rows: int) -> list[int]:
    lo = 1 << max((rows - 1).bit_length() - 1, 0)
    return [lo + 1, 2 * lo + 1, 4 * lo + 1]


def read_path_csv(file) -> DyadicPath:
    """Read a path and check that it sits on the full dyadic grid of [0, 1].

    Raises:
        FormatError: bad header, non-numeric entries, a row count that is not
            2**L + 1, or a t column that is not uniform on [0, 1].
    """
    with open(file, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{file}: empty file") from None
        if tuple(h.strip() for h in header) != HEADER:
            raise FormatError(f"{file}: expected header 't,value', got {','.join(header)!r}")
        try:
            data = np.array([[float(a), float(b)] for a, b in reader], dtype=float)
        except ValueError as exc:
            raise FormatError(f"{file}: {exc}") from None
    rows = len(data)
    level = (rows - 1).bit_length() - 1 if rows > 1 else -1
    if rows < 2 or rows != 2**level + 1:
        near = ", ".join(map(str, nearest_valid_counts(max(rows, 2))))
        raise FormatError(f"{file}: {rows} rows is not 2^L + 1 (nearest valid: {near})")
    t, v = data[:, 0], data[:, 1]
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise FormatError(f"{file}: t column is not strictly increasing (row {int(np.argmax(dt <= 0)) + 2})")
    expected = np.arange(rows) * 2.0**-level
    # tolerance is relative to the length of [0, 1]
    if np.max(np.abs(t - expected)) > SPACING_RTOL:
        raise FormatError(f"{file}: t must be the uniform grid k/2^{level} on [0, 1]")
    if not np.all(np.isfinite(v)):
        raise FormatError(f"{file}: non-finite values")
    return DyadicPath(level, v, origin=str(file))
