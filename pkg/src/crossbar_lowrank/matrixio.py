"""Dense-matrix text serialization.

Format: a header line "m n" (two base-10 integers), then m lines each
holding n space-separated decimal reals. Values are written with 17
significant digits so a float64 round-trips value-exact.
"""
from __future__ import annotations

import io
import os

import numpy as np

from .core import as_matrix


class MatrixFormatError(ValueError):
    """Malformed matrix text; message names the offending 1-based line."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def dumps_matrix(A) -> str:
    A = as_matrix(A)
    m, n = A.shape
    out = [f"{m} {n}"]
    for row in A:
        out.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(out) + "\n"


def write_matrix(A, path: str | os.PathLike) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_matrix(A))


def loads_matrix(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise MatrixFormatError(1, "empty input, expected 'm n' header")
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(1, f"expected 'm n' header with two integers, got {lines[0]!r}")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError(1, f"non-integer dimension in header {lines[0]!r}") from None
    if m < 1 or n < 1:
        raise MatrixFormatError(1, f"dimensions must be positive, got {m} {n}")
    if len(lines) < 1 + m:
        raise MatrixFormatError(len(lines) + 1, f"expected {m} data rows, found {len(lines) - 1}")
    A = np.empty((m, n))
    for i in range(m):
        line_no = i + 2
        fields = lines[1 + i].split()
        if len(fields) != n:
            raise MatrixFormatError(line_no, f"expected {n} values, found {len(fields)}")
        for j, tok in enumerate(fields):
            try:
                A[i, j] = float(tok)
            except ValueError:
                raise MatrixFormatError(line_no, f"invalid number {tok!r}") from None
    for extra in range(1 + m, len(lines)):
        if lines[extra].strip():
            raise MatrixFormatError(extra + 1, "unexpected content after matrix rows")
    if not np.all(np.isfinite(A)):
        bad = np.argwhere(~np.isfinite(A))[0]
        raise MatrixFormatError(int(bad[0]) + 2, "non-finite value")
    return A


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, "r") as fh:
        return loads_matrix(fh.read())


def dump_matrix(A, fh: io.TextIOBase) -> None:
    fh.write(dumps_matrix(A))
