"""Linear map into a low-dimensional complex space and the norm estimators.

A projection matrix has i.i.d. uniform entries over {1, i, -1, -i}.  Entries
are never materialized globally: each entry's exponent is a counter-based
deterministic function of (seed, row, column), so rows can be generated
independently, huge matrices need no storage, and sparse inputs touch only
the matching columns.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from ._mix import COL_MULT, GOLDEN, ROW_MULT, U64_MASK, finalize_array
from .units import UNIT_VALUES

REDUCED_MAGIC = b"WJLR"
REDUCED_VERSION = 1

#: Default universal constant for the reduced-dimension planner; matches the
#: constant appearing in the tail-bound analysis.
DEFAULT_PLAN_CONSTANT = 576.0

_ROW_BLOCK = 256


class ProvenanceError(ValueError):
    """Raised when reduced vectors from different matrices are combined."""


@dataclass(frozen=True)
class ProjectionMatrix:
    """A k x d random matrix over the fourth roots of unity, defined by seed."""

    k: int
    d: int
    seed: int

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise ValueError("matrix dimensions must be positive")
        if not 0 <= self.seed <= U64_MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def entry_exponents(self, rows, cols) -> np.ndarray:
        """Unit exponents of the entries at the given (broadcast) positions."""
        rows = np.asarray(rows, dtype=np.uint64)
        cols = np.asarray(cols, dtype=np.uint64)
        base = np.uint64((self.seed * GOLDEN) & U64_MASK)
        z = base + rows * np.uint64(ROW_MULT) + cols * np.uint64(COL_MULT)
        return (finalize_array(z) & np.uint64(3)).astype(np.uint8)

    def toarray(self) -> np.ndarray:
        """Materialize the full matrix as complex128; small matrices only."""
        e = self.entry_exponents(
            np.arange(self.k, dtype=np.uint64)[:, None],
            np.arange(self.d, dtype=np.uint64)[None, :],
        )
        return UNIT_VALUES[e]


def sample_matrix(d: int, k: int, seed: int) -> ProjectionMatrix:
    return ProjectionMatrix(k=k, d=d, seed=seed)


@dataclass
class ReducedVector:
    """The compressed representation A x / sqrt(k), tagged with provenance."""

    k: int
    values: np.ndarray
    matrix_seed: int
    dims_d: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.k,):
            raise ValueError("values length must equal k")

    def _check_same_matrix(self, other: "ReducedVector"):
        if (self.k, self.matrix_seed, self.dims_d) != (other.k, other.matrix_seed, other.dims_d):
            raise ProvenanceError(
                "reduced vectors come from different projection matrices"
            )

    def __sub__(self, other: "ReducedVector") -> "ReducedVector":
        self._check_same_matrix(other)
        return ReducedVector(self.k, self.values - other.values, self.matrix_seed, self.dims_d)

    def __add__(self, other: "ReducedVector") -> "ReducedVector":
        self._check_same_matrix(other)
        return ReducedVector(self.k, self.values + other.values, self.matrix_seed, self.dims_d)

    def to_bytes(self) -> bytes:
        header = REDUCED_MAGIC + struct.pack(
            "<HIIQ", REDUCED_VERSION, self.k, self.dims_d, self.matrix_seed
        )
        parts = np.empty((self.k, 2))
        parts[:, 0] = self.values.real
        parts[:, 1] = self.values.imag
        return header + parts.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ReducedVector":
        if data[:4] != REDUCED_MAGIC:
            raise ValueError("bad reduced vector magic")
        version, k, d, seed = struct.unpack("<HIIQ", data[4:22])
        if version != REDUCED_VERSION:
            raise ValueError(f"unsupported reduced vector version {version}")
        parts = np.frombuffer(data[22:], dtype="<f8").reshape(k, 2)
        return cls(k, parts[:, 0] + 1j * parts[:, 1], seed, d)

    def to_csv(self) -> str:
        lines = ["index,re,im"]
        for i, z in enumerate(self.values):
            lines.append(f"{i},{float(z.real)!r},{float(z.imag)!r}")
        return "\n".join(lines) + "\n"


def reduce(A: ProjectionMatrix, x: np.ndarray) -> ReducedVector:
    """Apply the linear map g(x) = A x / sqrt(k) to a dense vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.d,):
        raise ValueError(f"expected vector of length {A.d}, got {x.shape}")
    inv = 1.0 / math.sqrt(A.k)
    out = np.empty(A.k, dtype=np.complex128)
    cols = np.arange(A.d, dtype=np.uint64)[None, :]
    for start in range(0, A.k, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, A.k)
        rows = np.arange(start, stop, dtype=np.uint64)[:, None]
        e = A.entry_exponents(rows, cols)
        out[start:stop] = UNIT_VALUES[e] @ x
    return ReducedVector(A.k, out * inv, A.seed, A.d)


def reduce_sparse(A: ProjectionMatrix, indices: np.ndarray, values: np.ndarray) -> ReducedVector:
    """Reduce a sparse vector given as parallel (index, value) arrays."""
    indices = np.asarray(indices, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if indices.shape != values.shape or indices.ndim != 1:
        raise ValueError("indices and values must be parallel 1-d arrays")
    if indices.size and (indices.min() < 0 or indices.max() >= A.d):
        raise ValueError("sparse index out of range")
    inv = 1.0 / math.sqrt(A.k)
    if indices.size == 0:
        return ReducedVector(A.k, np.zeros(A.k, dtype=np.complex128), A.seed, A.d)
    rows = np.arange(A.k, dtype=np.uint64)[:, None]
    e = A.entry_exponents(rows, indices.astype(np.uint64)[None, :])
    return ReducedVector(A.k, (UNIT_VALUES[e] @ values) * inv, A.seed, A.d)


def rho(gx: ReducedVector, gw: ReducedVector) -> float:
    """Weighted squared-norm estimate Re[k * sum_i (g(x)_i g(w)_i)^2].

    Not a norm: the returned value can be negative.
    """
    gx._check_same_matrix(gw)
    terms = (gx.values * gw.values) ** 2
    return float(gx.k * np.sum(terms).real)


def rho_pairwise(gx: ReducedVector, gy: ReducedVector, gw: ReducedVector) -> float:
    """Estimate of the squared weighted distance between x and y."""
    return rho(gx - gy, gw)


@dataclass(frozen=True)
class PlanParams:
    epsilon: float
    delta: float
    delta_threshold: float
    c: float = DEFAULT_PLAN_CONSTANT

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.delta_threshold <= 0 or self.c <= 0:
            raise ValueError("distortion threshold and constant must be positive")


def required_k(p: PlanParams) -> int:
    """Reduced dimension sufficient for an (epsilon, delta) guarantee."""
    return math.ceil(p.c * p.delta_threshold**4 * math.log(1.0 / p.delta) / p.epsilon**2)


def hoeffding_k(x: np.ndarray, w: np.ndarray, epsilon: float, delta: float) -> int:
    """Cruder 1-norm-based planner, exposed for comparison with required_k."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    xw = math.sqrt(float(np.sum((w * x) ** 2)))
    if xw == 0.0:
        raise ValueError("weighted norm of x is zero")
    ratio = float(np.sum(np.abs(x)) * np.sum(np.abs(w))) / xw
    return math.ceil(ratio**4 * math.log(2.0 / delta) / epsilon**2)
