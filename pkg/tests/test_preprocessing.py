import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from bbqram import (NonFiniteError, OutOfRangeError, ZeroMatrixError, build_segment_tree,
                    pad_matrix, row_major, unflatten, update_entry)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
matrices = hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=9), elements=finite)


def rebuild(leaves):
    """Level-by-level sums, root first."""
    levels = [np.asarray(leaves, dtype=float)]
    while levels[0].size > 1:
        x = levels[0]
        levels.insert(0, x[0::2] + x[1::2])
    return levels


def test_pad_shapes(golden):
    m = pad_matrix(golden[:, :3])
    assert m.entries.shape == (2, 4)
    assert (m.orig_rows, m.orig_cols) == (2, 3)
    assert m.entries[0, 3] == 0.0 and m.entries[1, 3] == 0.0
    assert m.depth == 3


def test_pad_one_by_three():
    m = pad_matrix([[1.0, 2.0, 3.0]])
    assert m.entries.tolist() == [[1.0, 2.0, 3.0, 0.0]]


def test_pad_rejects_zero_and_nonfinite():
    with pytest.raises(ZeroMatrixError):
        pad_matrix([[0.0, -0.0]])
    with pytest.raises(NonFiniteError):
        pad_matrix([[1.0, np.nan]])
    with pytest.raises(NonFiniteError):
        pad_matrix([[np.inf, 1.0]])


def test_pad_checks_declared_shape():
    with pytest.raises(ValueError):
        pad_matrix([[1.0, 2.0]], rows=2, cols=2)


def test_negative_zero_is_positive():
    m = pad_matrix([[-0.0, 1.0]])
    assert not np.signbit(m.entries[0, 0])
    assert build_segment_tree(m).leaf_signs[0] == 0


def test_entries_read_only(golden):
    m = pad_matrix(golden)
    with pytest.raises(ValueError):
        m.entries[0, 0] = 1.0


@given(st.integers(0, 7), st.integers(0, 7))
def test_row_major_roundtrip(i, j):
    z = row_major(i, j, 8, 8)
    assert unflatten(z, 8, 64) == (i, j)


def test_index_errors():
    with pytest.raises(OutOfRangeError):
        row_major(0, 4, 4)
    with pytest.raises(OutOfRangeError):
        row_major(2, 0, 4, M=2)
    with pytest.raises(OutOfRangeError):
        unflatten(8, 4, 8)


def test_golden_tree_levels(golden):
    t = build_segment_tree(pad_matrix(golden))
    np.testing.assert_allclose(t.level(1), [24.89, 7.59], rtol=1e-12)
    np.testing.assert_allclose(t.level(2), [14.45, 10.44, 1.09, 6.50], rtol=1e-12)
    assert t.root == pytest.approx(32.48, rel=1e-12)
    assert t.leaf_signs.tolist() == [0, 0, 1, 0, 0, 0, 0, 1]
    assert t.node(2, 3) == t.nodes[t.index(2, 3)] == pytest.approx(6.5)
    with pytest.raises(OutOfRangeError):
        t.index(1, 2)


@given(matrices)
def test_tree_matches_rebuild_oracle(a):
    if not np.any(a):
        a[0, 0] = 1.0
    m = pad_matrix(a)
    t = build_segment_tree(m)
    for h, level in enumerate(rebuild(m.flat ** 2)):
        np.testing.assert_allclose(t.level(h), level, rtol=1e-12, atol=0)
    assert t.root == pytest.approx(float(np.sum(m.flat ** 2)), rel=1e-12)
    assert np.all(t.nodes >= 0)


@given(matrices, st.data())
def test_update_matches_rebuild(a, data):
    a[0, 0] = 1.0
    m = pad_matrix(a)
    t = build_segment_tree(m)
    z = data.draw(st.integers(0, m.size - 1))
    x = data.draw(finite)
    if x == 0 and np.count_nonzero(m.flat) == 1 and m.flat[z] != 0:
        x = 2.0
    u = update_entry(t, z, x)
    flat = m.flat.copy()
    flat[z] = x
    fresh = build_segment_tree(pad_matrix(flat.reshape(m.entries.shape)))
    assert np.array_equal(u.nodes, fresh.nodes)
    assert np.array_equal(u.leaf_signs, fresh.leaf_signs)
    # input tree untouched
    assert np.array_equal(t.nodes, build_segment_tree(m).nodes)


def test_update_errors(golden):
    t = build_segment_tree(pad_matrix(golden))
    with pytest.raises(OutOfRangeError):
        update_entry(t, 8, 1.0)
    with pytest.raises(NonFiniteError):
        update_entry(t, 0, np.nan)
