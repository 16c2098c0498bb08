"""
End-to-end amplitude encoding of a real matrix through the QRAM.

Cost convention (all counts in the QRAM's units, see :mod:`bbqram.qram`):

* every query costs ``4k + 2``; the preparation issues ``2k + 2`` of them
  (``k`` sibling retrievals and their ``k`` uncomputes, one sign retrieval
  and its uncompute);
* setting the address to ``0...01``, each U2CR application, the CZ phase
  fix and the final flip of ``v`` cost one unit each (``k + 3`` in all);
* the swap-tree shift (depth ``ceil(log2(k + 1))``) acts on ``v`` and
  ``a`` only and runs concurrently with the ``l``/``r`` uncompute query,
  which is never shorter, so it adds no units; its layer count is
  reported separately.

Hence ``total = (2k + 2)(4k + 2) + k + 3 = 8k^2 + 13k + 7``. Writing the
``K`` cells beforehand costs ``K (4k + 1)`` and is reported on its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatchError, DirtyTreeError, DisentanglementError
from .layout import Float64Word, MemoryCell, cell_words
from .preprocessing import DenseMatrix, build_segment_tree
from .qram import QramTree, StepCounters, query_units, write_units
from .quantum_ops import (Exact, FixedPoint, RegisterLayout, SparseState, circular_shift_left,
                          cz_sign, dump_state, primitive_signs, primitive_siblings, set_address,
                          swap_tree_layers, u2cr, u2cr_weights, uncompute_lr, uncompute_signs)


@dataclass(frozen=True)
class PrepConfig:
    mode: Exact | FixedPoint = Exact()
    prune_threshold: float | None = None
    trace: bool = False

    @property
    def codec(self):
        return self.mode.fmt if isinstance(self.mode, FixedPoint) else Float64Word()

    @property
    def threshold(self) -> float:
        return self.mode.prune_threshold if self.prune_threshold is None else self.prune_threshold


@dataclass
class PrepResult:
    final_amplitudes: np.ndarray
    frobenius: float
    depth: int
    counters: StepCounters
    init_counters: StepCounters
    gate_units: dict
    shift_layers: int
    orig_shape: tuple
    trace: list | None = None
    max_support: int = 0

    @property
    def amplitudes(self) -> dict:
        M, N = self.final_amplitudes.shape
        return {(i, j): float(self.final_amplitudes[i, j]) for i in range(M) for j in range(N)}


def expected_prep_units(k: int) -> int:
    return (2 * k + 2) * query_units(k) + k + 3


def expected_init_units(k: int) -> int:
    return (1 << k) * write_units(k)


def _assert_clean(qram: QramTree) -> None:
    if not qram.is_clean():
        raise DirtyTreeError("a switch was left active after a query")


def _trace_record(h: int, state: SparseState, w0, w1, after: SparseState) -> dict:
    codec = state.layout.codec
    k = state.layout.depth
    order = np.argsort(state.a, kind="stable")
    branches = [{
        "address": format(int(state.a[i]), f"0{k}b"),
        "l": codec.decode(int(state.l[i])),
        "r": codec.decode(int(state.r[i])),
        "weights": [float(w0[i]), float(w1[i])],
    } for i in order]
    return {"h": h, "branches": branches, "state": dump_state(after)}


def prepare_state(m: DenseMatrix, cfg: PrepConfig = PrepConfig()) -> PrepResult:
    k = m.depth
    if k == 0:
        raise ValueError("state preparation needs at least two entries (K >= 2)")
    tree = build_segment_tree(m)
    codec = cfg.codec
    signs, left, right = cell_words(tree, codec)

    qram = QramTree(k, codec.width)
    for z in range(1 << k):
        qram.write_cell(z, MemoryCell(int(signs[z]), int(left[z]), int(right[z])))
    init = qram.counters.snapshot()

    gates = {"set_address": 0, "u2cr": 0, "cz": 0, "clear_v": 0}
    shift_layers = 0
    trace = [] if cfg.trace else None
    state = SparseState.basis(RegisterLayout(k, codec))
    state = set_address(state, 1)
    gates["set_address"] += 1
    max_support = len(state)

    for h in range(1, k + 1):
        state = primitive_siblings(state, qram, h)
        _assert_clean(qram)
        if trace is not None:
            w0, w1 = u2cr_weights(state, cfg.mode)
            split = u2cr(state, cfg.mode, cfg.threshold)
            trace.append(_trace_record(h, state, w0, w1, split))
            state = split
        else:
            state = u2cr(state, cfg.mode, cfg.threshold)
        gates["u2cr"] += 1
        max_support = max(max_support, len(state))
        state = uncompute_lr(state, qram, h)
        _assert_clean(qram)
        state = circular_shift_left(state)
        shift_layers += len(swap_tree_layers(k + 1))

    state = primitive_signs(state, qram)
    _assert_clean(qram)
    state = cz_sign(state)
    gates["cz"] += 1
    state = uncompute_signs(state, qram)
    _assert_clean(qram)

    if state.s.any() or state.l.any() or state.r.any() or not np.all(state.v == 1):
        raise DisentanglementError("working registers are not in |0>_s |0>_l |0>_r |1>_v")
    if np.unique(state.a).size != len(state):
        raise DisentanglementError("address labels are not unique after clean-up")
    state = state.with_(v=np.zeros_like(state.v))
    gates["clear_v"] += 1

    flat = np.zeros(1 << k)
    flat[state.a] = state.amp.real
    if np.any(np.abs(state.amp.imag) > 0):
        raise DisentanglementError("final amplitudes acquired an imaginary part")
    return PrepResult(
        final_amplitudes=flat.reshape(m.rows, m.cols),
        frobenius=float(np.sqrt(tree.root)),
        depth=k,
        counters=qram.counters - init,
        init_counters=init,
        gate_units=gates,
        shift_layers=shift_layers,
        orig_shape=(m.orig_rows, m.orig_cols),
        trace=trace,
        max_support=max_support,
    )


@dataclass
class VerificationReport:
    max_abs_error: float
    worst_index: tuple
    norm_deviation: float
    sign_mismatches: list = field(default_factory=list)
    tol: float = 0.0

    @property
    def passed(self) -> bool:
        return (self.max_abs_error <= self.tol and self.norm_deviation <= self.tol
                and not self.sign_mismatches)


def verify_state(result: PrepResult, m: DenseMatrix, tol: float = 1e-9) -> VerificationReport:
    got = result.final_amplitudes
    if got.shape != m.entries.shape:
        raise DimMismatchError(f"result shape {got.shape} != matrix shape {m.entries.shape}")
    want = m.entries / m.frobenius()
    err = np.abs(got - want)
    worst = np.unravel_index(int(np.argmax(err)), err.shape)
    bad = np.argwhere(((want < 0) & (got >= 0)) | ((want > 0) & (got <= 0)))
    return VerificationReport(
        max_abs_error=float(err.max()),
        worst_index=(int(worst[0]), int(worst[1])),
        norm_deviation=abs(float(np.sum(got * got)) - 1.0),
        sign_mismatches=[(int(i), int(j)) for i, j in bad],
        tol=tol,
    )


@dataclass
class CostReport:
    k: int
    queries: int
    retrievals: int
    uncomputes: int
    counters: StepCounters
    gate_units: dict
    shift_layers: int
    total_units: int
    expected_units: int
    init_writes: int
    init_units: int
    expected_init_units: int

    @property
    def deviation(self) -> int:
        return self.total_units - self.expected_units

    @property
    def init_deviation(self) -> int:
        return self.init_units - self.expected_init_units

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            **self.counters.as_dict(),
            "retrievals": self.retrievals,
            "uncomputes": self.uncomputes,
            "query_units": self.counters.units,
            "gate_units": dict(self.gate_units),
            "shift_layers": self.shift_layers,
            "total_units": self.total_units,
            "expected_units": self.expected_units,
            "deviation": self.deviation,
            "init": {
                "writes": self.init_writes,
                "units": self.init_units,
                "expected_units": self.expected_init_units,
                "deviation": self.init_deviation,
            },
        }


def cost_report(result: PrepResult) -> CostReport:
    c = result.counters
    k = result.depth
    return CostReport(
        k=k,
        queries=c.queries,
        retrievals=k + 1,
        uncomputes=c.queries - (k + 1),
        counters=c.snapshot(),
        gate_units=dict(result.gate_units),
        shift_layers=result.shift_layers,
        total_units=c.units + sum(result.gate_units.values()),
        expected_units=expected_prep_units(k),
        init_writes=result.init_counters.writes,
        init_units=result.init_counters.units,
        expected_init_units=expected_init_units(k),
    )
