import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bbqram import (Exact, FixedPoint, FixedPointFormat, Float64Word, MemoryCell, OutOfRangeError,
                    PreconditionError, QramTree, RegisterLayout, SparseState, StaleAddressError,
                    ZeroAngleError, build_segment_tree, cascade_ry, circular_shift_left, cz_sign,
                    layout_cells, pad_matrix, primitive_root, primitive_siblings, primitive_signs,
                    u2cr, u2cr_fixed_pipeline, uncompute_lr, uncompute_signs)
from bbqram.quantum_ops import (circular_shift_right, dump_state, ry_weights, set_address,
                                swap_tree_layers, u2cr_weights, uncompute_root)

FMT = FixedPointFormat()


def rotl(word, n):
    return ((word << 1) | (word >> (n - 1))) & ((1 << n) - 1)


def qram_for(m, codec=Float64Word()):
    t = build_segment_tree(m)
    return QramTree.from_cells(layout_cells(t, codec), t.depth, codec.width), t


def spread(k, level, codec=Float64Word()):
    """Uniform superposition over the addresses of one level."""
    lay = RegisterLayout(k, codec)
    lo = 1 << (level - 1)
    n = lo
    st_ = SparseState.from_dict(lay, {(0, 0, 0, 0, a): 1 / math.sqrt(n) for a in range(lo, 2 * lo)})
    return st_.with_(addr_epoch=1)


# --- circular shift ------------------------------------------------------

@given(st.integers(1, 12), st.data())
def test_shift_matches_rotation(k, data):
    n = k + 1
    words = data.draw(st.lists(st.integers(0, (1 << n) - 1), min_size=1, max_size=8, unique=True))
    lay = RegisterLayout(k)
    s = SparseState.from_dict(lay, {(0, 0, 0, w >> k, w & ((1 << k) - 1)): 1.0 for w in words})
    out = circular_shift_left(s)
    got = sorted((int(v) << k) | int(a) for v, a in zip(out.v, out.a))
    assert got == sorted(rotl(w, n) for w in words)
    back = circular_shift_right(out)
    assert sorted((int(v) << k) | int(a) for v, a in zip(back.v, back.a)) == sorted(words)
    assert out.addr_epoch == s.addr_epoch + 1


@pytest.mark.parametrize("n", range(2, 40))
def test_swap_tree_depth_and_disjoint(n):
    layers = swap_tree_layers(n)
    assert len(layers) == math.ceil(math.log2(n))
    for layer in layers:
        qubits = [q for pair in layer for q in pair]
        assert len(qubits) == len(set(qubits))
        assert all(0 <= q < n for q in qubits)


def test_shift_example():
    lay = RegisterLayout(3)
    s = SparseState.basis(lay, v=1, a=0b001)
    out = circular_shift_left(s)
    assert (int(out.v[0]), int(out.a[0])) == (0, 0b011)


# --- retrieval primitives ------------------------------------------------

def test_siblings_twice_clears(golden):
    q, t = qram_for(pad_matrix(golden))
    c = Float64Word()
    s = spread(3, 2)
    once = primitive_siblings(s, q, 2)
    got = {int(a): (c.decode(int(l)), c.decode(int(r))) for a, l, r in zip(once.a, once.l, once.r)}
    assert got == {2: (t.node(2, 0), t.node(2, 1)), 3: (t.node(2, 2), t.node(2, 3))}
    twice = primitive_siblings(once, q, 2)
    assert not twice.l.any() and not twice.r.any()
    assert q.is_clean()


def test_signs_and_root_twice_clear(golden):
    q, t = qram_for(pad_matrix(golden))
    lay = RegisterLayout(3)
    s = SparseState.from_dict(lay, {(0, 0, 0, 0, a): 1 / math.sqrt(8) for a in range(8)})
    once = primitive_signs(s, q)
    assert once.s.tolist() == [0, 0, 1, 0, 0, 0, 0, 1]
    assert not primitive_signs(once, q).s.any()
    r = primitive_root(SparseState.basis(lay), q)
    assert Float64Word().decode(int(r.l[0])) == t.root
    assert not uncompute_root(r, q).l.any()


def test_root_ignores_filler(golden):
    m = pad_matrix(golden)
    q, t = qram_for(m)
    q2, _ = qram_for(m)
    cell = q2.read_cell(0)
    q2.write_cell(0, MemoryCell(cell.sign, cell.word_left, 0xDEADBEEF))
    s = SparseState.basis(RegisterLayout(3))
    assert primitive_root(s, q).as_dict() == primitive_root(s, q2).as_dict()


def test_primitive_domains(golden):
    q, _ = qram_for(pad_matrix(golden))
    with pytest.raises(PreconditionError):
        primitive_siblings(spread(3, 1), q, 2)
    loaded = primitive_siblings(spread(3, 1), q, 1)
    with pytest.raises(PreconditionError):
        primitive_signs(loaded, q)
    with pytest.raises(PreconditionError):
        primitive_root(SparseState.basis(RegisterLayout(3), a=1), q)


def test_stale_address_detected(golden):
    q, _ = qram_for(pad_matrix(golden))
    s = primitive_siblings(spread(3, 1), q, 1)
    s = u2cr(s)
    with pytest.raises(StaleAddressError):
        uncompute_lr(circular_shift_left(s), q, 1)
    sg = primitive_signs(SparseState.basis(RegisterLayout(3), a=2).with_(addr_epoch=1), q)
    with pytest.raises(StaleAddressError):
        uncompute_signs(circular_shift_left(sg), q)
    with pytest.raises(PreconditionError):
        uncompute_signs(SparseState.basis(RegisterLayout(3)), q)


def test_set_address():
    s = set_address(SparseState.basis(RegisterLayout(3)), 1)
    assert int(s.a[0]) == 1 and s.addr_epoch == 1
    with pytest.raises(PreconditionError):
        set_address(s, 2)
    with pytest.raises(OutOfRangeError):
        set_address(SparseState.basis(RegisterLayout(3)), 8)


# --- U2CR ----------------------------------------------------------------

def _state_with(a, b, codec=Float64Word()):
    lay = RegisterLayout(2, codec)
    return SparseState.basis(lay, l=codec.encode(a), r=codec.encode(b), a=1)


def test_u2cr_golden_level_one():
    w0, w1 = u2cr_weights(_state_with(24.89, 7.59), Exact())
    assert w0[0] == pytest.approx(math.sqrt(24.89 / 32.48), abs=1e-15)
    assert w1[0] == pytest.approx(math.sqrt(7.59 / 32.48), abs=1e-15)
    assert w0[0] == pytest.approx(0.8754, abs=1e-4)
    assert w1[0] == pytest.approx(0.4834, abs=1e-4)


def test_u2cr_degenerate_inputs():
    w0, w1 = u2cr_weights(_state_with(0.0, 0.0), Exact())
    assert (w0[0], w1[0]) == (pytest.approx(1 / math.sqrt(2)), pytest.approx(1 / math.sqrt(2)))
    out = u2cr(_state_with(5.0, 0.0))
    assert len(out) == 1 and int(out.v[0]) == 0 and out.amp[0] == 1.0


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_u2cr_exact_unitary(a, b):
    w0, w1 = u2cr_weights(_state_with(a, b), Exact())
    assert abs(w0[0] ** 2 + w1[0] ** 2 - 1.0) <= 1e-12


@given(st.floats(0, 1000), st.floats(0, 1000))
def test_u2cr_fixed_unitary(a, b):
    theta, (w0, w1) = u2cr_fixed_pipeline(FMT.encode(a), FMT.encode(b), FMT)
    assert abs(w0 ** 2 + w1 ** 2 - 1.0) <= 1e-12
    if FMT.encode(b) == 0 and FMT.encode(a) > 0:
        assert theta == 0 and (w0, w1) == (1.0, 0.0)


def test_u2cr_fixed_close_to_exact():
    # ratios bounded away from 0 and 1: the fixed pipeline error stays within a few ulps
    rng = np.random.default_rng(11)
    worst = 0.0
    for a, b in rng.uniform(0.5, 100.0, size=(500, 2)):
        aw, bw = FMT.encode(a), FMT.encode(b)
        _, (w0, w1) = u2cr_fixed_pipeline(aw, bw, FMT)
        ea, eb = FMT.decode(aw), FMT.decode(bw)
        worst = max(worst, abs(w0 - math.sqrt(ea / (ea + eb))), abs(w1 - math.sqrt(eb / (ea + eb))))
    assert worst <= 2.0 ** -13


def test_u2cr_fixed_zero_pair_is_hadamard():
    theta, w = u2cr_fixed_pipeline(0, 0, FMT)
    assert theta == 0 and w == (pytest.approx(2 ** -0.5), pytest.approx(2 ** -0.5))


def test_u2cr_fixed_sum_overflow():
    f = FixedPointFormat(4, 4)
    with pytest.raises(OverflowError):
        u2cr_fixed_pipeline(200, 100, f)


@given(st.integers(1, (1 << 19) - 1))
def test_cascade_equals_direct_rotation(word):
    f = FixedPointFormat(3, 16)
    if f.decode(word) > 2 * math.pi:
        return
    c, s = cascade_ry(word, f)
    dc, ds = ry_weights(f.decode(word))
    assert abs(c - dc) <= 1e-12 and abs(s - ds) <= 1e-12


def test_cascade_errors():
    f = FixedPointFormat(4, 8)
    with pytest.raises(ZeroAngleError):
        cascade_ry(0, f)
    with pytest.raises(ValueError):
        cascade_ry(f.encode(7.0), f)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(-3.0, 3.0))
def test_u2cr_commutes_with_phase(a, b, phi):
    s = _state_with(a, b)
    phased = s.with_(amp=s.amp * np.exp(1j * phi))
    lhs = u2cr(phased)
    rhs = u2cr(s)
    np.testing.assert_allclose(lhs.amp, rhs.amp * np.exp(1j * phi), atol=1e-14)


def test_u2cr_needs_clean_v():
    with pytest.raises(PreconditionError):
        u2cr(SparseState.basis(RegisterLayout(2), v=1))


def test_fixed_prune_threshold():
    assert FixedPoint(FixedPointFormat(16, 16)).prune_threshold == 2.0 ** -24


def test_cz_sign():
    lay = RegisterLayout(1)
    s = SparseState.from_dict(lay, {(1, 0, 0, 1, 0): 0.5, (1, 0, 0, 0, 1): 0.5, (0, 0, 0, 1, 1): 0.5})
    assert cz_sign(s).amp.real.tolist() == [-0.5, 0.5, 0.5]


def test_dump_state_sorted():
    lay = RegisterLayout(2)
    s = SparseState.from_dict(lay, {(0, 0, 0, 1, 3): 0.6, (0, 0, 0, 0, 1): 0.8})
    rows = dump_state(s)
    assert [r["a"] for r in rows] == ["01", "11"]
    assert rows[0]["amp_real"] == 0.8
