import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wslab import multiindex as mi
from wslab.errors import ValidationError


def brute_graded(d, n):
    """Enumerate by sorting all of {0..n}^d: degree up, then lex descending."""
    pts = [p for p in itertools.product(range(n + 1), repeat=d) if sum(p) <= n]
    return sorted(pts, key=lambda p: (sum(p), tuple(-x for x in p)))


def test_unit():
    assert mi.unit(3, 2) == (0, 1, 0)
    assert mi.unit(1, 1) == (1,)
    with pytest.raises(ValidationError):
        mi.unit(2, 3)
    with pytest.raises(ValidationError):
        mi.unit(2, 0)


def test_leq():
    assert mi.leq((1, 0), (1, 2))
    assert not mi.leq((2, 0), (1, 2))
    assert mi.leq((0, 0), (0, 0))


def test_rank_small():
    assert [mi.rank(i) for i in [(0, 0), (1, 0), (0, 1), (2, 0)]] == [0, 1, 2, 3]
    for k in range(12):
        assert mi.rank((k,)) == k
        assert mi.unrank(1, k) == (k,)


def test_unrank_5_matches_enumeration():
    # brute force puts (1,1) at position 4 and (0,2) at 5
    order = brute_graded(2, 2)
    assert order[4] == (1, 1)
    assert order[5] == (0, 2)
    assert mi.unrank(2, 5) == order[5]
    assert mi.rank((1, 1)) == 4


def test_level():
    assert mi.level(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert mi.level(3, 0) == [(0, 0, 0)]
    assert len(mi.level(3, 2)) == 6
    assert mi.count_level(3, 2) == 6


@pytest.mark.parametrize("d,n", [(1, 6), (2, 5), (3, 4), (4, 3)])
def test_basis_matches_brute_force(d, n):
    assert list(mi.basis(d, n)) == brute_graded(d, n)
    assert mi.count_upto(d, n) == len(brute_graded(d, n))
    for p, idx in enumerate(mi.basis(d, n)):
        assert mi.rank(idx) == p
        assert mi.unrank(d, p) == idx


def test_neighbors_tables():
    d, n = 3, 3
    succ, pred = mi.neighbors(d, n)
    B = mi.basis(d, n)
    for p, idx in enumerate(B):
        for j in range(d):
            up = mi.shift(idx, j + 1)
            assert succ[p, j] == (mi.rank(up) if sum(up) <= n else -1)
            down = mi.shift(idx, j + 1, -1)
            assert pred[p, j] == (-1 if down is None else mi.rank(down))
    assert not succ.flags.writeable


def test_shift_negative_is_none():
    assert mi.shift((0, 2), 1, -1) is None
    assert mi.shift((0, 2), 2, -1) == (0, 1)


def test_limits():
    with pytest.raises(ValidationError):
        mi.check_limits(0)
    with pytest.raises(ValidationError):
        mi.check_limits(2, -1)
    with pytest.raises(ValidationError):
        mi.as_index([1, -1])
    with pytest.raises(ValidationError):
        mi.as_index([1.5, 0])
    with pytest.raises(ValidationError):
        mi.as_index([1, 0], d=3)
    with pytest.raises(ValidationError):
        mi.unrank(2, -1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_rank_unrank_roundtrip(idx):
    idx = tuple(idx)
    assert mi.unrank(len(idx), mi.rank(idx)) == idx


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 60))
def test_rank_monotone_in_degree(d, pos):
    a = mi.unrank(d, pos)
    b = mi.unrank(d, pos + 1)
    assert sum(a) <= sum(b)
    assert mi.rank(b) == pos + 1


def test_degrees_array():
    assert np.array_equal(mi.degrees(2, 2), [0, 1, 1, 2, 2, 2])
