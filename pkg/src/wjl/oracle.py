"""Exact reference computations used as independent oracles in tests.

The expectation oracles enumerate every assignment of units exhaustively
(4^d cases), so they are exact up to floating-point rounding and completely
independent of the seeded generation paths they are used to check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import UNIT_VALUES

#: Largest dimension accepted by the enumeration oracles (4^8 = 65536 cases).
MAX_ENUM_DIM = 8


@dataclass
class WeightedPair:
    """An input vector and its non-negative weight vector."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.x.shape != self.w.shape or self.x.ndim != 1:
            raise ValueError("x and w must be 1-d vectors of equal length")
        if np.any(self.w < 0):
            raise ValueError("weights must be non-negative")


def weighted_sq_norm(pair: WeightedPair) -> float:
    """Sum of w_i^2 x_i^2 (np.sum uses pairwise summation)."""
    return float(np.sum((pair.w * pair.x) ** 2))


def distortion(pair: WeightedPair) -> float:
    """||x||_2 ||w||_2 / ||x||_w; at least 1 by Cauchy-Schwarz."""
    sq = weighted_sq_norm(pair)
    if sq == 0.0:
        raise ValueError("distortion undefined: weighted norm is zero")
    return float(np.linalg.norm(pair.x) * np.linalg.norm(pair.w)) / np.sqrt(sq)


def p_norm(x: np.ndarray, p: float) -> float:
    if p < 1:
        raise ValueError("p must be at least 1")
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def _all_unit_rows(d: int) -> np.ndarray:
    """All 4^d unit rows as a (4^d, d) complex array."""
    if d > MAX_ENUM_DIM:
        raise ValueError(f"enumeration limited to d <= {MAX_ENUM_DIM}")
    exps = np.indices((4,) * d).reshape(d, -1).T
    return UNIT_VALUES[exps]


def exact_rho_expectation(x: np.ndarray, w: np.ndarray) -> float:
    """Exact mean of the k=1 estimate over all possible matrix rows."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    rows = _all_unit_rows(len(x))
    vals = ((rows @ x) * (rows @ w)) ** 2
    return float(np.mean(vals.real))


def exact_sketch_expectation(x: np.ndarray, w: np.ndarray) -> float:
    """Exact mean of the single-cell sketch estimate over all joint hash values.

    Enumerates every assignment of units to the d stream positions; the
    counters of a 1x1 sketch are then the inner products of the assignment
    with x and w.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    rows = _all_unit_rows(len(x))
    cx = rows @ x
    cw = rows @ w
    return float(np.mean(((cx * cw) ** 2).real))
