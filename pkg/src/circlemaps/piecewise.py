"""Piecewise function carrier with exact per-piece antiderivatives.

Used for densities (evaluate rho, integrate to get the cumulative g) and
for first-branch derivatives (evaluate f1', integrate to get f1).  Pieces
tile an interval; each knows its exact integral from its left endpoint, so
the global primitive is a prefix sum plus one partial integral.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    value: Callable  # x within [lo, hi] -> values
    integral: Callable  # x within [lo, hi] -> integral of value over [lo, x]


def const_piece(lo: float, hi: float, v: float) -> Piece:
    return Piece(lo, hi, lambda x: np.full_like(np.asarray(x, dtype=float), v), lambda x: v * (np.asarray(x, dtype=float) - lo))


def smoothstep_piece(lo: float, hi: float, v0: float, v1: float) -> Piece:
    """Cubic ease between levels v0 and v1 with zero slope at both ends."""
    w = hi - lo
    dv = v1 - v0

    def value(x):
        s = (np.asarray(x, dtype=float) - lo) / w
        return v0 + dv * s * s * (3.0 - 2.0 * s)

    def integral(x):
        s = (np.asarray(x, dtype=float) - lo) / w
        return w * (v0 * s + dv * s**3 * (1.0 - 0.5 * s))

    return Piece(lo, hi, value, integral)


def bump_piece(hi: float, base: float, coef: float, omega) -> Piece:
    """Piece base + coef * omega(x) on [0, hi]; integral via the modulus primitive."""

    def value(x):
        x = np.asarray(x, dtype=float)
        return base + coef * np.asarray(omega(x), dtype=float)

    def integral(x):
        x = np.asarray(x, dtype=float)
        return base * x + coef * np.asarray(omega.primitive(x), dtype=float)

    return Piece(0.0, hi, value, integral)


class PiecewiseFunction:
    """Contiguous pieces on [lo, hi] with vectorized evaluation and primitive."""

    def __init__(self, pieces: Sequence[Piece]):
        if not pieces:
            raise ValueError("need at least one piece")
        for left, right in zip(pieces, pieces[1:]):
            if abs(left.hi - right.lo) > 1e-12:
                raise ValueError("pieces must tile the interval contiguously")
        self.pieces = list(pieces)
        self.lo = pieces[0].lo
        self.hi = pieces[-1].hi
        self.breaks = np.array([p.lo for p in pieces] + [pieces[-1].hi])
        self._break_list = self.breaks.tolist()
        masses = [float(np.asarray(p.integral(p.hi))) for p in pieces]
        self.prefix = np.concatenate([[0.0], np.cumsum(masses)])

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def _indices(self, x):
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def _prepare(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if (arr < self.lo - 1e-9).any() or (arr > self.hi + 1e-9).any():
            raise ValueError(
                f"argument outside [{self.lo}, {self.hi}]: "
                f"range [{arr.min()}, {arr.max()}]"
            )
        return np.clip(arr, self.lo, self.hi), scalar

    def _scalar_index(self, x: float) -> tuple[float, int]:
        if x < self.lo - 1e-9 or x > self.hi + 1e-9:
            raise ValueError(f"argument {x} outside [{self.lo}, {self.hi}]")
        x = min(max(x, self.lo), self.hi)
        i = min(max(bisect_right(self._break_list, x) - 1, 0), len(self.pieces) - 1)
        return x, i

    def __call__(self, x):
        if isinstance(x, float):  # hot scalar path for ODE loops
            x, i = self._scalar_index(x)
            return float(np.asarray(self.pieces[i].value(x)))
        arr, scalar = self._prepare(x)
        idx = self._indices(arr)
        out = np.empty_like(arr)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = np.asarray(piece.value(arr[mask]), dtype=float)
        return float(out[0]) if scalar else out

    def primitive(self, x):
        """Integral from the left endpoint of the first piece to x."""
        if isinstance(x, float):
            x, i = self._scalar_index(x)
            return float(self.prefix[i]) + float(np.asarray(self.pieces[i].integral(x)))
        arr, scalar = self._prepare(x)
        idx = self._indices(arr)
        out = np.empty_like(arr)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = self.prefix[i] + np.asarray(piece.integral(arr[mask]), dtype=float)
        return float(out[0]) if scalar else out
