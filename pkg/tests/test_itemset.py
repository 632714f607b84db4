import numpy as np
import pytest
from hypothesis import given, strategies as st

from valuelearn.itemset import ItemSet, masks_to_matrix, matrix_to_masks, popcounts


def test_basic_operations():
    a = ItemSet.of(5, [3, 1, 1])
    b = ItemSet.of(5, [1, 4])
    assert a.indices == (1, 3)
    assert (a | b).indices == (1, 3, 4)
    assert (a & b).indices == (1,)
    assert (a - b).indices == (3,)
    assert a.complement().indices == (0, 2, 4)
    assert ItemSet.of(5, [1]) <= a and not a <= b
    assert 3 in a and 0 not in a and 7 not in a
    assert len(ItemSet.full(5)) == 5 and len(ItemSet.empty(5)) == 0
    assert str(a) == "{1,3}"


def test_range_and_dimension_errors():
    with pytest.raises(ValueError):
        ItemSet.of(3, [3])
    with pytest.raises(ValueError):
        ItemSet.of(3, [-1])
    with pytest.raises(ValueError):
        ItemSet.of(3, [0]) | ItemSet.of(4, [0])
    with pytest.raises(ValueError):
        ItemSet.of(200, [1]).mask


def test_mask_roundtrip():
    S = ItemSet.from_mask(6, 0b101001)
    assert S.indices == (0, 3, 5) and S.mask == 0b101001
    X = masks_to_matrix(np.arange(64), 6)
    assert np.array_equal(matrix_to_masks(X), np.arange(64))
    assert np.array_equal(popcounts(6), X.sum(axis=1))


def test_equality_and_hash_ignore_representation():
    assert ItemSet.of(4, [2, 0]) == ItemSet.from_mask(4, 0b101)
    assert len({ItemSet.of(4, [0, 2]), ItemSet.from_mask(4, 5)}) == 1


index_lists = st.lists(st.integers(0, 149), max_size=40)


@given(index_lists, index_lists)
def test_bitset_and_sparse_agree(xs, ys):
    # n = 150 keeps only the sparse form, n = 128 also keeps a bitmask
    for n_small in (128,):
        xs_s = [x for x in xs if x < n_small]
        ys_s = [y for y in ys if y < n_small]
        a, b = ItemSet.of(n_small, xs_s), ItemSet.of(n_small, ys_s)
        A, B = ItemSet.of(150, xs_s), ItemSet.of(150, ys_s)
        assert a.is_bitset and not A.is_bitset
        assert (a | b).indices == (A | B).indices
        assert (a & b).indices == (A & B).indices
        assert (a - b).indices == (A - B).indices
        assert a.issubset(b) == A.issubset(B)
        assert len(a) == len(A) == len(set(xs_s))
        for i in range(n_small):
            assert (i in a) == (i in A)


@given(index_lists)
def test_indicator_roundtrip(xs):
    S = ItemSet.of(150, xs)
    assert ItemSet.from_indicator(S.indicator()) == S
    assert S.indicator().sum() == len(S)
