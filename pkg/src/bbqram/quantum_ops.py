"""
Sparse statevector over the registers ``(s, l, r, v, a)``.

A state is stored column-wise: one numpy array per register plus a
complex amplitude array, one row per basis label with a nonzero
amplitude. Every operation returns a new state.

Retrievals are XOR copies out of a :class:`~bbqram.qram.QramTree`, so
re-running the same query on the same addresses clears the target
registers again. The state remembers which retrievals are outstanding
and the address-register epoch they were made at; ``uncompute_*``
refuses to run if the address register moved in between.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import (FixedPointOverflowError, NegativeDecodeError, OutOfRangeError,
                     PreconditionError, StaleAddressError, ZeroAngleError)
from .layout import FixedPointFormat, Float64Word
from .qram import FieldSelector, QramTree

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class RegisterLayout:
    depth: int
    codec: FixedPointFormat | Float64Word = Float64Word()

    s_width = 1
    v_width = 1

    @property
    def l_width(self) -> int:
        return self.codec.width

    @property
    def r_width(self) -> int:
        return self.codec.width

    @property
    def a_width(self) -> int:
        return self.depth

    @property
    def total_qubits(self) -> int:
        return 2 + 2 * self.codec.width + self.depth


@dataclass(frozen=True)
class Exact:
    """Weights computed in double precision from the decoded words."""

    prune_threshold: float = 0.0


@dataclass(frozen=True)
class FixedPoint:
    """Weights produced by the rounded arithmetic pipeline in ``fmt``."""

    fmt: FixedPointFormat = FixedPointFormat()

    @property
    def prune_threshold(self) -> float:
        return 2.0 ** (-self.fmt.frac_bits - 8)


@dataclass(frozen=True, eq=False)
class SparseState:
    layout: RegisterLayout
    s: np.ndarray
    l: np.ndarray
    r: np.ndarray
    v: np.ndarray
    a: np.ndarray
    amp: np.ndarray
    addr_epoch: int = 0
    pending: tuple = field(default=())

    @classmethod
    def basis(cls, layout: RegisterLayout, s=0, l=0, r=0, v=0, a=0, amp=1.0) -> "SparseState":
        return cls.from_dict(layout, {(s, l, r, v, a): amp})

    @classmethod
    def from_dict(cls, layout: RegisterLayout, amplitudes: dict) -> "SparseState":
        labels = list(amplitudes)
        if not labels:
            raise ValueError("a state needs at least one basis label")
        cols = list(zip(*labels))
        st = cls(layout,
                 np.array(cols[0], dtype=np.uint8),
                 np.array(cols[1], dtype=np.uint64),
                 np.array(cols[2], dtype=np.uint64),
                 np.array(cols[3], dtype=np.uint8),
                 np.array(cols[4], dtype=np.int64),
                 np.array([amplitudes[k] for k in labels], dtype=np.complex128))
        st._check_widths()
        return st

    def _check_widths(self) -> None:
        k, t = self.layout.depth, self.layout.codec.width
        if np.any(self.s > 1) or np.any(self.v > 1):
            raise ValueError("s and v are single qubits")
        if np.any(self.a < 0) or np.any(self.a >= 1 << k):
            raise ValueError(f"address wider than {k} bits")
        if t < 64 and (np.any(self.l >> np.uint64(t)) or np.any(self.r >> np.uint64(t))):
            raise ValueError(f"l/r wider than {t} bits")

    def __len__(self) -> int:
        return int(self.amp.size)

    def with_(self, **changes) -> "SparseState":
        return replace(self, **changes)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))

    def addresses(self) -> np.ndarray:
        return np.unique(self.a)

    def as_dict(self) -> dict:
        return {(int(s), int(l), int(r), int(v), int(a)): complex(x)
                for s, l, r, v, a, x in zip(self.s, self.l, self.r, self.v, self.a, self.amp)}

    def order(self) -> np.ndarray:
        """Row order sorted by (a, v, s, l, r)."""
        return np.lexsort((self.r, self.l, self.s, self.v, self.a))

    def _pending(self) -> dict:
        return dict(self.pending)

    def _with_pending(self, key, value) -> "SparseState":
        p = self._pending()
        if value is None:
            p.pop(key, None)
        else:
            p[key] = value
        return self.with_(pending=tuple(sorted(p.items())))

    def _toggle_pending(self, key, value) -> "SparseState":
        # a retrieval opens a record; the identical query run again closes it
        return self._with_pending(key, None if key in self._pending() else value)


def dump_state(state: SparseState) -> list[dict]:
    """Records ``(s, l, r, v, a, amp_real, amp_imag)`` sorted by address."""
    codec = state.layout.codec
    k = state.layout.depth
    rows = []
    for i in state.order():
        rows.append({
            "s": int(state.s[i]),
            "l": codec.decode(int(state.l[i])),
            "r": codec.decode(int(state.r[i])),
            "v": int(state.v[i]),
            "a": format(int(state.a[i]), f"0{k}b") if k else "",
            "amp_real": float(state.amp[i].real),
            "amp_imag": float(state.amp[i].imag),
        })
    return rows


# --- address register manipulation --------------------------------------

def set_address(state: SparseState, value: int) -> SparseState:
    """Flip address bits (X gates) so that an all-zero register holds ``value``."""
    if np.any(state.a != 0):
        raise PreconditionError("address register must be |0> before it is set")
    if not 0 <= value < 1 << state.layout.depth:
        raise OutOfRangeError(f"address {value} too wide")
    return state.with_(a=np.full_like(state.a, value), addr_epoch=state.addr_epoch + 1)


@lru_cache(maxsize=None)
def swap_tree_layers(n: int) -> tuple:
    """Layers of disjoint SWAPs that rotate ``n`` qubits left by one.

    Positions count from the most significant qubit. Layer ``j`` merges
    adjacent blocks of ``2**(j-1)`` already-rotated qubits by swapping the
    last qubit of each left block with the last qubit of its right
    neighbour, giving depth ``ceil(log2 n)``.
    """
    layers = []
    span = 2
    while span // 2 < n:
        half = span // 2
        layer = []
        for start in range(0, n, span):
            if start + half < n:
                layer.append((start + half - 1, min(start + span, n) - 1))
        layers.append(tuple(layer))
        span *= 2
    return tuple(layers)


def _swap_pairs(n: int, reverse: bool = False) -> np.ndarray:
    layers = swap_tree_layers(n)
    if reverse:
        layers = layers[::-1]
    pairs = [p for layer in layers for p in layer]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _shift(state: SparseState, reverse: bool) -> SparseState:
    k = state.layout.depth
    n = k + 1
    words = (state.v.astype(np.int64) << k) | state.a
    out = kernels.apply_swaps(words, _swap_pairs(n, reverse), n)
    return state.with_(v=(out >> k).astype(np.uint8), a=out & ((1 << k) - 1),
                       addr_epoch=state.addr_epoch + 1)


def circular_shift_left(state: SparseState) -> SparseState:
    """Rotate the ``v || a`` bit string left by one position."""
    return _shift(state, reverse=False)


def circular_shift_right(state: SparseState) -> SparseState:
    return _shift(state, reverse=True)


# --- retrieval primitives ------------------------------------------------

def _xor_query(state: SparseState, qram: QramTree, sel: FieldSelector):
    return qram.query(state.addresses(), sel).lookup(state.a)


def _check_qram(state: SparseState, qram: QramTree) -> None:
    if qram.depth != state.layout.depth or qram.width != state.layout.codec.width:
        raise PreconditionError("QRAM geometry does not match the register layout")


def primitive_root(state: SparseState, qram: QramTree) -> SparseState:
    """XOR the root word (middle field of cell 0) into ``l``."""
    _check_qram(state, qram)
    if np.any(state.a != 0) or np.any(state.r != 0):
        raise PreconditionError("root retrieval needs a = 0 and r = 0")
    (root,) = _xor_query(state, qram, FieldSelector.MIDDLE)
    if np.any((state.l != 0) & (state.l != root)):
        raise PreconditionError("l must be empty (or hold the root, to uncompute)")
    out = state.with_(l=state.l ^ root)
    return out._toggle_pending("root", state.addr_epoch)


def _siblings_domain(state: SparseState, h: int) -> None:
    k = state.layout.depth
    if not 1 <= h <= k:
        raise PreconditionError(f"level {h} outside [1, {k}]")
    lo, hi = 1 << (h - 1), 1 << h
    if np.any(state.a < lo) or np.any(state.a >= hi):
        raise PreconditionError(f"every address must lie in [{lo}, {hi}) at level {h}")


def primitive_siblings(state: SparseState, qram: QramTree, h: int) -> SparseState:
    """XOR the sibling pair of cell ``a`` into ``(l, r)`` for every label."""
    _check_qram(state, qram)
    _siblings_domain(state, h)
    left, right = _xor_query(state, qram, FieldSelector.BOTH)
    loaded = (state.l == left) & (state.r == right)
    empty = (state.l == 0) & (state.r == 0)
    if not np.all(empty | loaded):
        raise PreconditionError("l and r must be empty (or hold this level's pair)")
    out = state.with_(l=state.l ^ left, r=state.r ^ right)
    return out._toggle_pending("lr", (h, state.addr_epoch))


def primitive_signs(state: SparseState, qram: QramTree) -> SparseState:
    """XOR the sign bit of cell ``a`` into ``s`` for every label."""
    _check_qram(state, qram)
    if np.any(state.l != 0) or np.any(state.r != 0):
        raise PreconditionError("sign retrieval needs l = r = 0")
    (signs,) = _xor_query(state, qram, FieldSelector.SIGN)
    if np.any((state.s != 0) & (state.s != signs)):
        raise PreconditionError("s must be empty (or hold the retrieved sign)")
    return state.with_(s=state.s ^ signs)._toggle_pending("sign", state.addr_epoch)


def _check_fresh(state: SparseState, key: str):
    rec = state._pending().get(key)
    if rec is None:
        raise PreconditionError(f"no outstanding '{key}' retrieval to uncompute")
    epoch = rec[1] if isinstance(rec, tuple) else rec
    if epoch != state.addr_epoch:
        raise StaleAddressError("address register changed since the paired retrieval")
    return rec


def uncompute_lr(state: SparseState, qram: QramTree, h: int) -> SparseState:
    rec = _check_fresh(state, "lr")
    if rec[0] != h:
        raise PreconditionError(f"outstanding retrieval was for level {rec[0]}, not {h}")
    out = primitive_siblings(state, qram, h)
    assert not (out.l.any() or out.r.any())
    return out


def uncompute_signs(state: SparseState, qram: QramTree) -> SparseState:
    _check_fresh(state, "sign")
    out = primitive_signs(state, qram)
    assert not out.s.any()
    return out


def uncompute_root(state: SparseState, qram: QramTree) -> SparseState:
    _check_fresh(state, "root")
    return primitive_root(state, qram)


# --- basis-to-amplitude --------------------------------------------------

def ry_weights(theta):
    """Direct single rotation: ``Ry(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>``."""
    return np.cos(np.asarray(theta) / 2.0), np.sin(np.asarray(theta) / 2.0)


def cascade_ry(theta_word: int, fmt: FixedPointFormat) -> tuple[float, float]:
    """Apply one controlled Ry(2**(j - frac_bits)) per set bit ``j`` of the angle word.

    Bits are visited from the most significant down, exactly as a cascade
    controlled by the basis-encoded angle register would fire them.
    """
    if theta_word == 0:
        raise ZeroAngleError("the cascade is defined for non-zero angles only")
    if not 0 < theta_word < 1 << fmt.width:
        raise OutOfRangeError(f"angle word {theta_word} wider than {fmt.width} bits")
    if fmt.decode(theta_word) > 2 * math.pi + fmt.ulp:
        raise ValueError("angle exceeds 2*pi")
    c, s = kernels.cascade_weights(np.array([theta_word], dtype=np.uint64), fmt.frac_bits, fmt.width)
    return float(c[0]), float(s[0])


def _round_to(x: np.ndarray, fmt: FixedPointFormat) -> np.ndarray:
    """Round non-negative reals onto the fixed-point grid (returns words)."""
    scaled = np.rint(np.ldexp(x, fmt.frac_bits))
    if np.any(scaled >= 2.0 ** fmt.width):
        raise FixedPointOverflowError(f"intermediate value overflows {fmt.int_bits} integer bits")
    return scaled.astype(np.uint64)


def _pipeline(a_words: np.ndarray, b_words: np.ndarray, fmt: FixedPointFormat):
    """Vectorised fixed-point arithmetic: returns (theta_words, w0, w1)."""
    a_words = np.asarray(a_words, dtype=np.uint64)
    b_words = np.asarray(b_words, dtype=np.uint64)
    sum_words = a_words + b_words
    overflow = sum_words < a_words
    if fmt.width < 64:
        overflow |= (sum_words >> np.uint64(fmt.width)) != 0
    if overflow.any():
        raise FixedPointOverflowError("a + b overflows the format")
    both_zero = sum_words == 0
    total = np.where(both_zero, 1, sum_words).astype(np.float64)
    q = fmt.decode_array(_round_to(b_words.astype(np.float64) / total, fmt))
    root = fmt.decode_array(_round_to(np.sqrt(q), fmt))
    half_angle = _round_to(np.arcsin(np.minimum(root, 1.0)), fmt)
    theta = half_angle << np.uint64(1)
    if fmt.width < 64 and np.any(theta >> np.uint64(fmt.width)):
        raise FixedPointOverflowError("2*arcsin needs at least 2 integer bits")
    theta = np.where(both_zero, np.uint64(0), theta)
    w0 = np.ones(theta.size)
    w1 = np.zeros(theta.size)
    nz = theta != 0
    if nz.any():
        c, s = kernels.cascade_weights(theta[nz], fmt.frac_bits, fmt.width)
        w0[nz], w1[nz] = c, s
    w0[both_zero] = INV_SQRT2
    w1[both_zero] = INV_SQRT2
    return theta, w0, w1


def u2cr_fixed_pipeline(a_word: int, b_word: int, fmt: FixedPointFormat):
    """Scalar pipeline: sum, divide, sqrt, arcsin, double, cascade.

    Returns ``(theta_word, (w0, w1))``. ``theta_word`` is 0 when no
    rotation fires: for ``b = 0`` the weights are ``(1, 0)``, and for
    ``a = b = 0`` the flag branch applies a Hadamard instead.
    """
    theta, w0, w1 = _pipeline(np.array([a_word], dtype=np.uint64),
                              np.array([b_word], dtype=np.uint64), fmt)
    return int(theta[0]), (float(w0[0]), float(w1[0]))


def u2cr_weights(state: SparseState, mode) -> tuple[np.ndarray, np.ndarray]:
    codec = state.layout.codec
    if isinstance(mode, FixedPoint):
        if codec == mode.fmt:
            aw, bw = state.l, state.r
        else:
            aw = mode.fmt.encode_array(codec.decode_array(state.l))
            bw = mode.fmt.encode_array(codec.decode_array(state.r))
        _, w0, w1 = _pipeline(aw, bw, mode.fmt)
        return w0, w1
    a = codec.decode_array(state.l)
    b = codec.decode_array(state.r)
    if np.any(a < 0) or np.any(b < 0):
        raise NegativeDecodeError("decoded a negative node value")
    total = a + b
    zero = total == 0
    safe = np.where(zero, 1.0, total)
    w0 = np.where(zero, INV_SQRT2, np.sqrt(a / safe))
    w1 = np.where(zero, INV_SQRT2, np.sqrt(b / safe))
    return w0, w1


def prune(state: SparseState, threshold: float) -> SparseState:
    mag = np.abs(state.amp)
    keep = mag > 0 if threshold <= 0 else mag >= threshold
    if keep.all():
        return state
    if not keep.any():
        raise PreconditionError("pruning would remove every component")
    return state.with_(s=state.s[keep], l=state.l[keep], r=state.r[keep],
                       v=state.v[keep], a=state.a[keep], amp=state.amp[keep])


def u2cr(state: SparseState, mode=Exact(), prune_threshold: float | None = None) -> SparseState:
    """Split every label on ``v`` with weights ``sqrt(l/(l+r))``, ``sqrt(r/(l+r))``."""
    if np.any(state.v != 0):
        raise PreconditionError("u2cr targets a clean v qubit")
    w0, w1 = u2cr_weights(state, mode)
    n = len(state)
    out = state.with_(
        s=np.concatenate([state.s, state.s]),
        l=np.concatenate([state.l, state.l]),
        r=np.concatenate([state.r, state.r]),
        v=np.concatenate([np.zeros(n, np.uint8), np.ones(n, np.uint8)]),
        a=np.concatenate([state.a, state.a]),
        amp=np.concatenate([state.amp * w0, state.amp * w1]),
    )
    thr = mode.prune_threshold if prune_threshold is None else prune_threshold
    return prune(out, thr)


def cz_sign(state: SparseState) -> SparseState:
    flip = (state.s == 1) & (state.v == 1)
    return state.with_(amp=np.where(flip, -state.amp, state.amp))
