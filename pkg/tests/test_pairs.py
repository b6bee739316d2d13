"""Canonical pair ordering and its index arithmetic."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multising.pairs import (
    pair_array,
    pair_count,
    pair_index,
    pair_labels,
    pair_list,
    row_slice,
)


def test_pair_count_small_values():
    assert [pair_count(p) for p in range(1, 7)] == [0, 1, 3, 6, 10, 15]


def test_pair_list_p4_is_row_major_lower_triangle():
    assert pair_list(4) == [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]


def test_pair_list_degenerate():
    assert pair_list(1) == []
    assert pair_list(2) == [(2 - 1, 0)]


def test_pair_index_matches_list_position():
    assert pair_index(3, 1) == 4
    assert pair_index(1, 0) == 0
    assert pair_index(2, 1) == 2


def test_pair_index_symmetric_in_arguments():
    assert pair_index(1, 3) == pair_index(3, 1)
    assert pair_index(0, 5) == pair_index(5, 0)


def test_pair_index_rejects_diagonal():
    with pytest.raises(ValueError):
        pair_index(2, 2)


def test_pair_index_bounds_checked_when_p_given():
    assert pair_index(3, 0, p=4) == 3
    with pytest.raises(ValueError):
        pair_index(4, 0, p=4)
    with pytest.raises(ValueError):
        pair_index(-1, 2)


def test_row_slice_covers_row_three():
    assert row_slice(3) == slice(3, 6)
    pl = pair_list(5)
    assert pl[row_slice(3)] == [(3, 0), (3, 1), (3, 2)]


def test_pair_array_shape_and_content():
    arr = pair_array(4)
    assert arr.shape == (6, 2)
    assert arr.tolist() == [list(t) for t in pair_list(4)]
    assert pair_array(1).shape == (0, 2)


def test_pair_labels_uses_variable_names():
    assert pair_labels(["a", "b", "c"]) == [("b", "a"), ("c", "a"), ("c", "b")]


@given(st.integers(min_value=1, max_value=14))
def test_pair_index_inverts_pair_list(p):
    for k, (r, j) in enumerate(pair_list(p)):
        assert pair_index(r, j, p) == k


@given(st.integers(min_value=1, max_value=14))
def test_row_slices_partition_the_flat_vector(p):
    covered = []
    for r in range(p):
        s = row_slice(r)
        assert s.stop - s.start == r
        covered.extend(range(s.start, s.stop))
    assert covered == list(range(pair_count(p)))


@given(st.integers(min_value=2, max_value=14))
def test_pair_array_rows_are_strictly_lower(p):
    arr = pair_array(p)
    assert (arr[:, 0] > arr[:, 1]).all()
    assert arr[:, 0].max() == p - 1
    assert len(np.unique(arr[:, 0] * p + arr[:, 1])) == pair_count(p)
