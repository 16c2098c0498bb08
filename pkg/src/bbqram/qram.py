"""
Bucket-brigade QRAM: a binary tree of three-state switches over K cells.

The simulator tracks routing (which switches a query activates and in
what state) and charges cost units; amplitudes never enter it. One unit
is one tree level crossed by one logical packet, with pipelined address
routing, plus one unit per constant-time CNOT/SWAP block. A query
therefore costs ``4k + 2`` units and a write ``4k + 1``, whatever the
number of addresses in superposition.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from enum import Enum, IntEnum

import numpy as np

from . import kernels
from .errors import DirtyTreeError, OutOfRangeError, PathMismatchError
from .layout import MemoryCell


class Switch(IntEnum):
    WAIT = kernels.WAIT
    ZERO = kernels.ZERO
    ONE = kernels.ONE
    SUPERPOSED = kernels.SUPERPOSED


class FieldSelector(Enum):
    SIGN = "sign"
    MIDDLE = "middle"
    BOTH = "both"

    def width(self, t: int) -> int:
        return {"sign": 1, "middle": t, "both": 2 * t}[self.value]


@dataclass
class StepCounters:
    routing_steps: int = 0
    bus_steps: int = 0
    copy_ops: int = 0
    uncompute_steps: int = 0
    queries: int = 0
    writes: int = 0

    @property
    def units(self) -> int:
        return self.routing_steps + self.bus_steps + self.copy_ops + self.uncompute_steps

    def snapshot(self) -> "StepCounters":
        return StepCounters(**asdict(self))

    def __sub__(self, other: "StepCounters") -> "StepCounters":
        return StepCounters(**{f: getattr(self, f) - getattr(other, f) for f in asdict(self)})

    def as_dict(self) -> dict:
        return asdict(self)


def query_units(k: int) -> int:
    return 4 * k + 2


def write_units(k: int) -> int:
    return 4 * k + 1


@dataclass(frozen=True)
class ActivePaths:
    leaves: np.ndarray
    token: int

    def __contains__(self, z) -> bool:
        i = np.searchsorted(self.leaves, z)
        return bool(i < self.leaves.size and self.leaves[i] == z)

    def __len__(self) -> int:
        return int(self.leaves.size)


@dataclass(frozen=True)
class Transfer:
    """Bits carried back by the bus, one entry per reached leaf.

    ``fields`` is ``(signs,)``, ``(middle_words,)`` or
    ``(left_words, right_words)`` depending on the selector.
    """

    selector: FieldSelector
    width: int
    leaves: np.ndarray
    fields: tuple

    def lookup(self, addresses) -> tuple:
        idx = np.searchsorted(self.leaves, addresses)
        return tuple(f[idx] for f in self.fields)

    def as_dict(self) -> dict:
        if self.selector is FieldSelector.BOTH:
            left, right = self.fields
            vals = [(int(lw) << self.width) | int(rw) for lw, rw in zip(left, right)]
        else:
            vals = [int(x) for x in self.fields[0]]
        return dict(zip(self.leaves.tolist(), vals))


class QramTree:
    """Switch tree of depth ``k`` over ``2**k`` cells of ``1 + 2*width`` bits."""

    _tokens = itertools.count(1)

    def __init__(self, depth: int, width: int):
        if depth < 0:
            raise ValueError("depth must be non-negative")
        self.depth = depth
        self.width = width
        self.size = 1 << depth
        self.switches = np.zeros(self.size - 1, dtype=np.int8)
        self.signs = np.zeros(self.size, dtype=np.uint8)
        self.left = np.zeros(self.size, dtype=np.uint64)
        self.right = np.zeros(self.size, dtype=np.uint64)
        self.bus = 0
        self.counters = StepCounters()
        self._active: int | None = None

    @classmethod
    def from_cells(cls, cells, depth: int, width: int) -> "QramTree":
        """A tree initialised through counted writes of every cell."""
        q = cls(depth, width)
        for z, cell in enumerate(cells):
            q.write_cell(z, cell)
        return q

    def is_clean(self) -> bool:
        return self._active is None and not self.switches.any()

    def active_switches(self) -> np.ndarray:
        return np.flatnonzero(self.switches)

    def switch(self, d: int, p: int) -> Switch:
        return Switch(int(self.switches[(1 << d) - 1 + p]))

    def read_cell(self, z: int) -> MemoryCell:
        """Classical inspection of a cell; not a quantum operation, not counted."""
        self._check_address(z)
        return MemoryCell(int(self.signs[z]), int(self.left[z]), int(self.right[z]))

    def _check_address(self, z) -> None:
        if not 0 <= z < self.size:
            raise OutOfRangeError(f"address {z} outside [0, {self.size})")

    def route(self, support) -> ActivePaths:
        if not self.is_clean():
            raise DirtyTreeError("routing requires every switch in the wait state")
        leaves = np.unique(np.asarray(support, dtype=np.int64).reshape(-1))
        if leaves.size == 0:
            raise ValueError("address support is empty")
        if leaves[0] < 0 or leaves[-1] >= self.size:
            raise OutOfRangeError(f"address outside [0, {self.size})")
        kernels.route_switches(self.switches, leaves, self.depth)
        self.counters.routing_steps += self.depth
        self._active = next(self._tokens)
        return ActivePaths(leaves, self._active)

    def _check_paths(self, paths: ActivePaths) -> None:
        if self._active is None or paths.token != self._active:
            raise PathMismatchError("paths do not match the tree's active route")

    def bus_transfer(self, paths: ActivePaths, sel: FieldSelector) -> Transfer:
        self._check_paths(paths)
        z = paths.leaves
        if sel is FieldSelector.SIGN:
            fields = (self.signs[z].copy(),)
        elif sel is FieldSelector.MIDDLE:
            fields = (self.left[z].copy(),)
        else:
            fields = (self.left[z].copy(), self.right[z].copy())
        # down, CNOT cell->bus, up, CNOT bus->working
        self.counters.bus_steps += 2 * self.depth
        self.counters.copy_ops += 2
        return Transfer(sel, self.width, z, fields)

    def uncompute_route(self, paths: ActivePaths) -> None:
        self._check_paths(paths)
        self.switches[:] = Switch.WAIT
        self._active = None
        self.counters.uncompute_steps += self.depth

    def query(self, addresses, sel: FieldSelector) -> Transfer:
        """One full retrieval: route, bus round trip, uncompute."""
        paths = self.route(addresses)
        out = self.bus_transfer(paths, sel)
        self.uncompute_route(paths)
        self.counters.queries += 1
        return out

    def write_cell(self, z: int, cell: MemoryCell) -> None:
        self._check_address(z)
        limit = 1 << self.width
        if cell.sign not in (0, 1) or not (0 <= cell.word_left < limit and 0 <= cell.word_right < limit):
            raise ValueError(f"cell does not fit a 1+2*{self.width}-bit layout")
        paths = self.route([z])
        self.bus = (cell.sign, cell.word_left, cell.word_right)
        self.counters.bus_steps += self.depth
        old = (int(self.signs[z]), int(self.left[z]), int(self.right[z]))
        self.signs[z], self.left[z], self.right[z] = self.bus
        self.bus = old
        self.counters.copy_ops += 1
        self.counters.bus_steps += self.depth
        self.bus = 0
        self.uncompute_route(paths)
        self.counters.writes += 1
