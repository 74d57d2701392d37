"""Dictionary type, distances and matrix file formats.

Matrices are plain ``numpy.ndarray`` objects of shape ``(rows, cols)``.
Atom matrices are kept Fortran ordered so each atom is contiguous.

Binary ``ENN1`` layout::

    b"ENN1" | uint32 LE rows | uint32 LE cols | rows*cols float64 LE, column-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, DimensionMismatch, DimensionZero, ENNError, TruncatedFile, ZeroColumn

MAGIC = b"ENN1"
UNIT_NORM_TOL = 1e-10
ZERO_NORM_TOL = 1e-12

_HEADER = struct.Struct("<4sII")


def as_matrix(a) -> np.ndarray:
    """Validate and return a finite 2-D float64 array in Fortran order."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionZero(f"matrix has an empty dimension: {a.shape}")
    if not np.isfinite(a).all():
        raise ENNError("matrix contains NaN or Inf")
    return np.asfortranarray(a)


def as_vector(v, dim: int | None = None) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.float64).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected vector of length {dim}, got {v.shape[0]}")
    if not np.isfinite(v).all():
        raise ENNError("vector contains NaN or Inf")
    return v


@dataclass(frozen=True)
class Dictionary:
    """A library of unit-norm atoms stored as the columns of an (m, n) matrix."""

    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.array(as_matrix(self.atoms), order="F", copy=True)
        norms = np.linalg.norm(atoms, axis=0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if bad.size:
            raise ENNError(f"atom {bad[0]} is not unit norm (norm={norms[bad[0]]!r})")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @property
    def m(self) -> int:
        return self.atoms.shape[0]

    @property
    def n(self) -> int:
        return self.atoms.shape[1]

    def atom(self, i: int) -> np.ndarray:
        return self.atoms[:, i]


def normalize_columns(raw) -> Dictionary:
    """Scale every column of ``raw`` to unit Euclidean norm.

    Raises ZeroColumn for the first column whose norm is <= 1e-12.
    """
    raw = as_matrix(raw)
    norms = np.linalg.norm(raw, axis=0)
    zero = np.flatnonzero(norms <= ZERO_NORM_TOL)
    if zero.size:
        raise ZeroColumn(int(zero[0]))
    return Dictionary(raw / norms)


def distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def write_enn1(path, matrix) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(np.asarray(matrix, dtype="<f8").tobytes(order="F"))


def read_enn1(path) -> np.ndarray:
    """Read an ENN1 file into a Fortran-ordered float64 matrix."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"{path}: not an ENN1 file")
    if len(data) < _HEADER.size:
        raise TruncatedFile(f"{path}: header truncated")
    _, rows, cols = _HEADER.unpack_from(data)
    if rows == 0 or cols == 0:
        raise DimensionZero(f"{path}: zero dimension ({rows}x{cols})")
    need = _HEADER.size + 8 * rows * cols
    if len(data) < need:
        raise TruncatedFile(f"{path}: expected {need} bytes, found {len(data)}")
    flat = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=_HEADER.size)
    return np.array(flat.reshape((rows, cols), order="F"), dtype=np.float64, order="F")


def write_matrix_csv(path, matrix) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise DimensionZero(f"{path}: empty CSV")
    if len({len(r) for r in rows}) != 1:
        raise ENNError(f"{path}: ragged CSV rows")
    return np.asfortranarray(np.array(rows, dtype=np.float64))


def read_matrix(path) -> np.ndarray:
    """Load a matrix from ``.csv`` (text) or any other extension (ENN1)."""
    if str(path).lower().endswith(".csv"):
        return read_matrix_csv(path)
    return read_enn1(path)


def write_matrix(path, matrix) -> None:
    if str(path).lower().endswith(".csv"):
        write_matrix_csv(path, matrix)
    else:
        write_enn1(path, matrix)


def load_dictionary(path) -> Dictionary:
    """Read a matrix file and normalise its columns into a Dictionary."""
    return normalize_columns(read_matrix(path))
