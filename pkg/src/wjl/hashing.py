"""8-independent hash functions into the fourth roots of unity.

Each hash is a degree-7 polynomial with uniform random coefficients over the
prime field GF(p) with p = 2^61 - 1; the field element is mapped to a unit by
its two least-significant bits.  Evaluating the polynomial at any 8 distinct
points is a bijection on coefficient tuples, which gives 8-independence.

The mapping [0, p) -> {0,1,2,3} via low bits is not exactly uniform because
p % 4 == 3; the deviation is at most 4/p per value and is ignored.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._mix import GOLDEN, U64_MASK, finalize, finalize_array
from .units import ComplexUnit

#: Mersenne prime 2^61 - 1.
MERSENNE_P = (1 << 61) - 1

_P = np.uint64(MERSENNE_P)
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK29 = np.uint64((1 << 29) - 1)

HASH_MAGIC = b"WJLH"


def _fold61(x: np.ndarray) -> np.ndarray:
    # Reduce values < 2^63 to [0, p]. Uses 2^61 == 1 (mod p).
    x = (x >> np.uint64(61)) + (x & _P)
    x -= np.where(x >= _P, _P, np.uint64(0))
    return x


def mulmod61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod (2^61 - 1) for uint64 arrays with entries < 2^61."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1, a0 = a >> np.uint64(32), a & _MASK32
    if b.size and int(b.max()) < 1 << 32:
        # Common case: b fits in 32 bits (e.g. Horner evaluation points are
        # coordinate indices), so the b-high cross terms vanish.
        mid = a1 * b                  # < 2^61
        lo = a0 * b                   # < 2^64, exact in uint64
        s = (mid >> np.uint64(29)) + ((mid & _MASK29) << np.uint64(32))
        s += (lo >> np.uint64(61)) + (lo & _P)
        return _fold61(s)
    b1, b0 = b >> np.uint64(32), b & _MASK32
    hi = a1 * b1                      # < 2^58
    mid = a1 * b0 + a0 * b1           # < 2^62
    lo = a0 * b0                      # < 2^64, exact in uint64
    # a*b = hi*2^64 + mid*2^32 + lo; 2^64 == 8, 2^61 == 1 (mod p)
    s = hi * np.uint64(8)
    s += (mid >> np.uint64(29)) + ((mid & _MASK29) << np.uint64(32))
    s += (lo >> np.uint64(61)) + (lo & _P)
    return _fold61(s)


@dataclass(frozen=True)
class HashPolynomial:
    """Coefficients (a0..a7) of one degree-7 polynomial over GF(2^61 - 1)."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        if len(self.coefficients) != 8:
            raise ValueError("expected 8 coefficients")
        if any(not 0 <= c < MERSENNE_P for c in self.coefficients):
            raise ValueError("coefficients must lie in [0, p)")

    def to_bytes(self) -> bytes:
        return HASH_MAGIC + struct.pack("<8Q", *self.coefficients)

    @classmethod
    def from_bytes(cls, data: bytes) -> "HashPolynomial":
        if data[:4] != HASH_MAGIC:
            raise ValueError("bad hash polynomial magic")
        return cls(struct.unpack("<8Q", data[4:68]))


def hash_new(seed: int) -> HashPolynomial:
    """Derive a polynomial deterministically from a 64-bit seed."""
    return HashPolynomial(tuple(int(c) for c in coefficients_for_seeds(np.array([seed], dtype=np.uint64))[0]))


def coefficients_for_seeds(seeds: np.ndarray) -> np.ndarray:
    """Vectorized hash_new: coefficient arrays of shape seeds.shape + (8,)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    c = np.arange(1, 9, dtype=np.uint64) * np.uint64(GOLDEN)
    z = finalize_array(seeds[..., None] + c)
    # Modular reduction of a uniform 64-bit value; bias is O(2^-58).
    return z % _P


def hash_eval(h: HashPolynomial, t: int) -> ComplexUnit:
    """Evaluate the polynomial at t by Horner's rule and map to a unit."""
    if not 0 <= t < MERSENNE_P:
        raise ValueError("evaluation point must lie in [0, p)")
    acc = 0
    for c in reversed(h.coefficients):
        acc = (acc * t + c) % MERSENNE_P
    return ComplexUnit(acc & 3)


def hash_eval_exponents(coefficients: np.ndarray, t) -> np.ndarray:
    """Vectorized Horner evaluation; returns unit exponents.

    coefficients has shape (..., 8); t is a scalar or an array broadcastable
    against the leading dimensions.  Output dtype is uint64 with values in
    {0,1,2,3}.
    """
    coefficients = np.asarray(coefficients, dtype=np.uint64)
    t = np.asarray(t, dtype=np.uint64)
    if np.any(t >= _P):
        raise ValueError("evaluation point must lie in [0, p)")
    acc = np.zeros(np.broadcast_shapes(coefficients.shape[:-1], t.shape), dtype=np.uint64)
    for idx in range(7, -1, -1):
        acc = mulmod61(acc, t)
        acc = _fold61(acc + coefficients[..., idx])
    return acc & np.uint64(3)
