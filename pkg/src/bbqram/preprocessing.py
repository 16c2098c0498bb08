"""
Matrix ingestion and the segment tree of squared norms.

The tree lives in one flat array in heap order: the root sits at index 0
and node ``(h, p)`` (level ``h``, position ``p``) at ``2**h + p - 1``, so
the children of flat index ``i`` are ``2*i + 1`` and ``2*i + 2`` and the
leaves occupy the last ``K`` slots in row-major order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NonFiniteError, OutOfRangeError, ZeroMatrixError


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class DenseMatrix:
    """A real matrix padded with zeros up to power-of-two dimensions."""

    entries: np.ndarray
    orig_rows: int
    orig_cols: int

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def size(self) -> int:
        return self.entries.size

    @property
    def depth(self) -> int:
        return (self.size - 1).bit_length()

    @property
    def flat(self) -> np.ndarray:
        return self.entries.reshape(-1)

    def frobenius(self) -> float:
        return float(np.sqrt(np.sum(self.entries * self.entries)))


def pad_matrix(raw, rows: int | None = None, cols: int | None = None) -> DenseMatrix:
    """Validate ``raw`` and zero-pad it to power-of-two dimensions.

    ``rows``/``cols``, when given, are the declared dimensions of ``raw``
    (e.g. from a JSON header) and must agree with its shape.
    """
    a = np.array(raw, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if rows is not None and rows != a.shape[0] or cols is not None and cols != a.shape[1]:
        raise ValueError(f"declared shape ({rows}, {cols}) does not match data shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    if not np.any(a):
        raise ZeroMatrixError("matrix has no nonzero entry")
    a = a + 0.0  # -0.0 -> +0.0
    m, n = a.shape
    padded = np.zeros((_next_pow2(m), _next_pow2(n)), dtype=np.float64)
    padded[:m, :n] = a
    padded.setflags(write=False)
    return DenseMatrix(padded, m, n)


def row_major(i: int, j: int, N: int, M: int | None = None) -> int:
    if not 0 <= j < N or i < 0 or (M is not None and i >= M):
        raise OutOfRangeError(f"index ({i}, {j}) outside a matrix with {N} columns")
    return i * N + j


def unflatten(z: int, N: int, K: int | None = None) -> tuple[int, int]:
    if z < 0 or (K is not None and z >= K):
        raise OutOfRangeError(f"flat index {z} out of range")
    return z // N, z % N


@dataclass(frozen=True)
class SegTree:
    depth: int
    nodes: np.ndarray
    leaf_signs: np.ndarray

    @property
    def size(self) -> int:
        """Number of leaves ``K``."""
        return self.leaf_signs.shape[0]

    @property
    def root(self) -> float:
        return float(self.nodes[0])

    def index(self, h: int, p: int) -> int:
        if not 0 <= h <= self.depth or not 0 <= p < (1 << h):
            raise OutOfRangeError(f"no node ({h}, {p}) in a tree of depth {self.depth}")
        return (1 << h) + p - 1

    def node(self, h: int, p: int) -> float:
        return float(self.nodes[self.index(h, p)])

    def level(self, h: int) -> np.ndarray:
        lo = (1 << h) - 1
        return self.nodes[lo:2 * lo + 1]

    @property
    def leaves(self) -> np.ndarray:
        return self.level(self.depth)


def _signs(values: np.ndarray) -> np.ndarray:
    return (values < 0).astype(np.uint8)


def build_segment_tree(m: DenseMatrix) -> SegTree:
    flat = m.flat
    nodes = kernels.build_heap(np.ascontiguousarray(flat * flat))
    nodes.setflags(write=False)
    signs = _signs(flat)
    signs.setflags(write=False)
    return SegTree(m.depth, nodes, signs)


def update_entry(tree: SegTree, z: int, new_value: float) -> SegTree:
    """Return a copy of ``tree`` with leaf ``z`` set to ``new_value**2``.

    Only the ``depth`` ancestors of the leaf are recomputed.
    """
    K = tree.size
    if not 0 <= z < K:
        raise OutOfRangeError(f"flat index {z} outside [0, {K})")
    if not np.isfinite(new_value):
        raise NonFiniteError("update value must be finite")
    new_value = float(new_value) + 0.0
    nodes = tree.nodes.copy()
    signs = tree.leaf_signs.copy()
    nodes[K - 1 + z] = new_value * new_value
    signs[z] = 1 if new_value < 0 else 0
    kernels.update_path(nodes, K - 1 + z)
    nodes.setflags(write=False)
    signs.setflags(write=False)
    return SegTree(tree.depth, nodes, signs)
