"""Streaming sketch for weighted squared norms.

An r x m array of complex counters, each cell owning one 8-independent hash
into the fourth roots of unity.  A vector and its weight vector are sketched
with identical hash arrays (same config); the estimate averages the m cell
products per row and takes the median of the r row means.

The transformation is deliberately not linear in x, so no pairwise-distance
API exists on sketches.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._mix import GOLDEN, ROW_MULT, U64_MASK, finalize_array
from .hashing import HashPolynomial, coefficients_for_seeds, hash_eval_exponents
from .units import UNIT_VALUES

SKETCH_MAGIC = b"WJLS"
SKETCH_VERSION = 1

_MODES = ("timestep", "turnstile")


class ConfigMismatchError(ValueError):
    """Raised when sketches with different configs are combined."""


@dataclass(frozen=True)
class SketchConfig:
    r: int
    m: int
    seed: int
    mode: str = "timestep"

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise ValueError("r and m must be positive")
        if not 0 <= self.seed <= U64_MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")


@dataclass
class WeightedNormEstimate:
    """Median-of-means estimate; may be negative, never clamped."""

    value: float
    r_used: int
    m_used: int

    @property
    def is_negative(self) -> bool:
        return self.value < 0


def cell_seeds(config: SketchConfig) -> np.ndarray:
    """Per-cell hash seeds: mix(seed, i, j) for the full r x m grid."""
    i = np.arange(config.r, dtype=np.uint64)[:, None]
    j = np.arange(config.m, dtype=np.uint64)[None, :]
    z = np.uint64(config.seed) ^ (i * np.uint64(GOLDEN)) ^ (j * np.uint64(ROW_MULT))
    return finalize_array(z)


class StreamSketch:
    """Single-vector sketch state: counters plus the cell hash polynomials."""

    def __init__(
        self,
        config: SketchConfig,
        _coefficients: Optional[np.ndarray] = None,
        hash_override: Optional[Callable[[int], np.ndarray]] = None,
    ):
        """hash_override, when given, maps an update key t to an (r, m) array
        of unit exponents in place of the polynomial hashes.  Test/oracle hook
        only; overridden sketches cannot be serialized.
        """
        self.config = config
        self.counters = np.zeros((config.r, config.m), dtype=np.complex128)
        self.items_seen = 0
        self._override = hash_override
        if hash_override is not None:
            self._coefficients = None
        elif _coefficients is not None:
            self._coefficients = _coefficients
        else:
            self._coefficients = coefficients_for_seeds(cell_seeds(config))

    def spawn(self) -> "StreamSketch":
        """Empty sketch sharing this sketch's config and hash polynomials."""
        return StreamSketch(self.config, _coefficients=self._coefficients, hash_override=self._override)

    def hash_at(self, i: int, j: int) -> HashPolynomial:
        return HashPolynomial(tuple(int(c) for c in self._coefficients[i, j]))

    def _exponents(self, t: int) -> np.ndarray:
        if self._override is not None:
            return np.asarray(self._override(t))
        return hash_eval_exponents(self._coefficients, t)

    def update(self, t: int, v: float):
        """Add v * h_ij(t) to every counter.

        In timestep mode t is the arrival position; in turnstile mode t is
        the coordinate index and v the increment.
        """
        self.counters += v * UNIT_VALUES[self._exponents(t)]
        self.items_seen += 1

    def update_many(self, ts: np.ndarray, vs: np.ndarray):
        """Vectorized sequence of updates (equivalent to update() in a loop)."""
        ts = np.asarray(ts)
        vs = np.asarray(vs, dtype=np.float64)
        if self._override is not None:
            for t, v in zip(ts, vs):
                self.update(int(t), float(v))
            return
        e = hash_eval_exponents(self._coefficients[..., None, :], ts)  # (r, m, n)
        self.counters += np.einsum("ijn,n->ij", UNIT_VALUES[e], vs)
        self.items_seen += len(vs)

    def ingest(self, values: np.ndarray):
        """Timestep-mode convenience: feed a whole vector, t = 1..len."""
        self.update_many(np.arange(1, len(values) + 1), values)

    def to_bytes(self) -> bytes:
        if self._override is not None:
            raise ValueError("sketches with overridden hashes cannot be serialized")
        header = SKETCH_MAGIC + struct.pack(
            "<HBIIQQ",
            SKETCH_VERSION,
            _MODES.index(self.config.mode),
            self.config.r,
            self.config.m,
            self.config.seed,
            self.items_seen,
        )
        parts = np.empty((self.config.r * self.config.m, 2))
        flat = self.counters.ravel()
        parts[:, 0] = flat.real
        parts[:, 1] = flat.imag
        hashes = b"".join(
            self.hash_at(i, j).to_bytes()
            for i in range(self.config.r)
            for j in range(self.config.m)
        )
        return header + parts.astype("<f8").tobytes() + hashes

    @classmethod
    def from_bytes(cls, data: bytes) -> "StreamSketch":
        if data[:4] != SKETCH_MAGIC:
            raise ValueError("bad sketch magic")
        version, mode_idx, r, m, seed, items = struct.unpack("<HBIIQQ", data[4:31])
        if version != SKETCH_VERSION:
            raise ValueError(f"unsupported sketch version {version}")
        sketch = cls(SketchConfig(r=r, m=m, seed=seed, mode=_MODES[mode_idx]))
        n = r * m
        parts = np.frombuffer(data[31 : 31 + 16 * n], dtype="<f8").reshape(n, 2)
        sketch.counters = (parts[:, 0] + 1j * parts[:, 1]).reshape(r, m)
        sketch.items_seen = items
        coeffs = np.empty((r, m, 8), dtype=np.uint64)
        off = 31 + 16 * n
        for idx in range(n):
            poly = HashPolynomial.from_bytes(data[off + 68 * idx : off + 68 * (idx + 1)])
            coeffs[idx // m, idx % m] = poly.coefficients
        sketch._coefficients = coeffs
        return sketch

    @staticmethod
    def serialized_size(r: int, m: int) -> int:
        return 31 + r * m * (16 + 68)


def sketch_new(config: SketchConfig) -> StreamSketch:
    return StreamSketch(config)


def new_pair(config: SketchConfig) -> tuple[StreamSketch, StreamSketch]:
    """Two empty sketches sharing one hash array, for a vector and its weights."""
    sx = StreamSketch(config)
    return sx, sx.spawn()


def ingest_pair(sx: StreamSketch, sw: StreamSketch, ts: np.ndarray, xs: np.ndarray, ws: np.ndarray):
    """Apply parallel turnstile updates to a vector sketch and weight sketch.

    The sketches must share hash polynomials (see new_pair); the polynomials
    are then evaluated once per update key for both, halving the hashing work
    relative to two update_many calls.
    """
    _check_same_config(sx, sw)
    if sx._coefficients is not sw._coefficients:
        raise ConfigMismatchError("ingest_pair requires sketches from new_pair/spawn")
    ts = np.asarray(ts)
    xs = np.asarray(xs, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    e = hash_eval_exponents(sx._coefficients[..., None, :], ts)  # (r, m, n)
    units = UNIT_VALUES[e]
    sx.counters += np.einsum("ijn,n->ij", units, xs)
    sw.counters += np.einsum("ijn,n->ij", units, ws)
    sx.items_seen += len(xs)
    sw.items_seen += len(ws)


def _check_same_config(a: StreamSketch, b: StreamSketch):
    if a.config != b.config:
        raise ConfigMismatchError("sketches were built with different configs")


def sketch_estimate(sx: StreamSketch, sw: StreamSketch) -> WeightedNormEstimate:
    """Median over rows of the mean of Re[(C_x[i,j] * C_w[i,j])^2] per row."""
    _check_same_config(sx, sw)
    cell = (sx.counters * sw.counters) ** 2
    row_means = cell.mean(axis=1).real
    return WeightedNormEstimate(float(np.median(row_means)), sx.config.r, sx.config.m)


def sketch_merge(a: StreamSketch, b: StreamSketch) -> StreamSketch:
    """Elementwise counter sum; valid because counters are linear in the stream."""
    _check_same_config(a, b)
    out = a.spawn()
    out.counters = a.counters + b.counters
    out.items_seen = a.items_seen + b.items_seen
    return out


def plan_sketch(epsilon: float, delta: float, distortion: float) -> tuple[int, int]:
    """Counter-array dimensions (r, m) for an (epsilon, delta) guarantee."""
    if not 0 < epsilon <= 1 or not 0 < delta < 1:
        raise ValueError("epsilon must lie in (0, 1] and delta in (0, 1)")
    if distortion < 1:
        raise ValueError("distortion is at least 1")
    m = math.ceil(136.0 * distortion**4 / epsilon**2) + 1
    r_min = 12.0 * math.log(1.0 / delta)
    r = math.floor(r_min) + 1
    if r % 2 == 0:
        r += 1
    return r, m


def cell_estimates(x: np.ndarray, w: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Single-cell turnstile estimates Re[(C_x C_w)^2], one per seed.

    Vectorized across seeds for variance experiments; matches building an
    r=1, m=1 turnstile sketch per seed and estimating (see tests).
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    seeds = np.asarray(seeds, dtype=np.uint64)
    # Cell (0, 0) mixing degenerates to finalize(seed), see cell_seeds.
    coeffs = coefficients_for_seeds(finalize_array(seeds))  # (n, 8)
    cx = np.zeros(len(seeds), dtype=np.complex128)
    cw = np.zeros(len(seeds), dtype=np.complex128)
    for t in range(len(x)):
        u = UNIT_VALUES[hash_eval_exponents(coeffs, t)]
        cx += x[t] * u
        cw += w[t] * u
    return ((cx * cw) ** 2).real
