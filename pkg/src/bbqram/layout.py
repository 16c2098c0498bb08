"""
Packing the segment tree into BBQRAM memory cells.

Cell ``z >= 1`` holds the sign of leaf ``z`` and the two children of
flat tree node ``z - 1``; cell 0 holds the sign of leaf 0, the root and a
filler word. Node values are stored as ``t``-bit words through a codec:
:class:`FixedPointFormat` (unsigned fixed point, round half to even) or
:class:`Float64Word` (the raw IEEE-754 bit pattern, used by exact mode).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FixedPointOverflowError, OutOfRangeError
from .preprocessing import SegTree


@dataclass(frozen=True)
class FixedPointFormat:
    int_bits: int = 16
    frac_bits: int = 16

    def __post_init__(self):
        if self.int_bits < 0 or self.frac_bits < 0:
            raise ValueError("bit counts must be non-negative")
        if not 2 <= self.width <= 64:
            raise ValueError(f"word width {self.width} outside [2, 64]")

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def limit(self) -> float:
        return 2.0 ** self.int_bits

    def encode(self, x: float) -> int:
        return fp_encode(x, self)

    def decode(self, w: int) -> float:
        return fp_decode(w, self)

    def encode_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if np.any(xs < 0) or not np.all(np.isfinite(xs)):
            raise ValueError("fixed-point values must be finite and non-negative")
        scaled = np.rint(np.ldexp(xs, self.frac_bits))
        if np.any(xs >= self.limit) or np.any(scaled >= 2.0 ** self.width):
            raise FixedPointOverflowError(
                f"value {float(xs.max())} does not fit in {self.int_bits} integer bits")
        return scaled.astype(np.uint64)

    def decode_array(self, ws) -> np.ndarray:
        return np.ldexp(np.asarray(ws, dtype=np.uint64).astype(np.float64), -self.frac_bits)

    def round(self, x: float) -> float:
        """Nearest representable value (ties to even), with overflow check."""
        return self.decode(self.encode(x))


@dataclass(frozen=True)
class Float64Word:
    """Lossless 64-bit codec: a word is the binary64 bit pattern of the value."""

    @property
    def width(self) -> int:
        return 64

    def encode(self, x: float) -> int:
        if not x >= 0 or not np.isfinite(x):
            raise ValueError("stored values must be finite and non-negative")
        return int(np.float64(x + 0.0).view(np.uint64))

    def decode(self, w: int) -> float:
        return float(np.uint64(w).view(np.float64))

    def encode_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64) + 0.0
        if np.any(xs < 0) or not np.all(np.isfinite(xs)):
            raise ValueError("stored values must be finite and non-negative")
        return xs.view(np.uint64).copy()

    def decode_array(self, ws) -> np.ndarray:
        return np.asarray(ws, dtype=np.uint64).view(np.float64).copy()


def fp_encode(x: float, fmt: FixedPointFormat) -> int:
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"cannot encode {x!r} as unsigned fixed point")
    if x >= fmt.limit:
        raise FixedPointOverflowError(f"{x} >= 2**{fmt.int_bits}")
    # multiplying by a power of two is exact; round() is half-to-even
    w = round(x * 2.0 ** fmt.frac_bits)
    if w >= 1 << fmt.width:
        raise FixedPointOverflowError(f"{x} rounds past the top of the format")
    return int(w)


def fp_decode(w: int, fmt: FixedPointFormat) -> float:
    if not 0 <= w < 1 << fmt.width:
        raise OutOfRangeError(f"word {w} wider than {fmt.width} bits")
    return float(np.ldexp(float(w), -fmt.frac_bits))


def _check_cell_index(z: int) -> int:
    if z < 1:
        raise OutOfRangeError(f"cell {z} does not hold a sibling pair")
    return z.bit_length() - 1


def level_of(z: int, K: int | None = None) -> int:
    if K is not None and z >= K:
        raise OutOfRangeError(f"cell {z} outside [1, {K})")
    return _check_cell_index(z) + 1


def offset_of(z: int, K: int | None = None) -> int:
    if K is not None and z >= K:
        raise OutOfRangeError(f"cell {z} outside [1, {K})")
    return z - (1 << _check_cell_index(z))


@dataclass(frozen=True)
class MemoryCell:
    sign: int
    word_left: int
    word_right: int


FILLER = 0


def cell_words(tree: SegTree, codec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised layout: ``(signs, left_words, right_words)`` arrays of length K."""
    K = tree.size
    left = np.empty(K, dtype=np.uint64)
    right = np.empty(K, dtype=np.uint64)
    if K > 1:
        # children of flat node z-1 sit at flat indices 2z-1 and 2z
        z = np.arange(1, K)
        left[1:] = codec.encode_array(tree.nodes[2 * z - 1])
        right[1:] = codec.encode_array(tree.nodes[2 * z])
    left[0] = codec.encode_array(tree.nodes[:1])[0]
    right[0] = FILLER
    return tree.leaf_signs.astype(np.uint8), left, right


def layout_cells(tree: SegTree, fmt) -> list[MemoryCell]:
    signs, left, right = cell_words(tree, fmt)
    return [MemoryCell(int(s), int(lw), int(rw)) for s, lw, rw in zip(signs, left, right)]
