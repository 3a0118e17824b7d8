"""Multi-indices in Z_+^d and the graded basis layout.

A multi-index is a plain tuple of non-negative ints.  Basis positions
follow graded lexicographic order: first by total degree, then, inside a
degree, lexicographically descending, so for d = 2 the layout starts
(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
"""

from functools import lru_cache
from math import comb

import numpy as np

from .config import MAX_D, MAX_N
from .errors import ValidationError


def check_limits(d, n=None):
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValidationError(f"d must be a positive integer, got {d!r}")
    if d > MAX_D:
        raise ValidationError(f"d={d} exceeds the limit {MAX_D}")
    if n is not None:
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValidationError(f"N must be a non-negative integer, got {n!r}")
        if n > MAX_N:
            raise ValidationError(f"N={n} exceeds the limit {MAX_N}")


def as_index(entries, d=None):
    """Coerce to a validated multi-index tuple."""
    try:
        idx = tuple(int(e) for e in entries)
    except (TypeError, ValueError):
        raise ValidationError(f"not a multi-index: {entries!r}") from None
    if any(int(e) != e for e in entries):
        raise ValidationError(f"multi-index entries must be integers: {entries!r}")
    if not idx:
        raise ValidationError("multi-index must have at least one entry")
    if any(e < 0 for e in idx):
        raise ValidationError(f"multi-index entries must be >= 0: {idx!r}")
    if d is not None and len(idx) != d:
        raise ValidationError(f"expected a multi-index of length {d}, got {idx!r}")
    return idx


def degree(idx):
    return sum(idx)


def unit(d, j):
    """The multi-index with a single 1 in direction ``j`` (1-based)."""
    check_limits(d)
    if not 1 <= j <= d:
        raise ValidationError(f"direction {j} out of range 1..{d}")
    return tuple(1 if k == j - 1 else 0 for k in range(d))


def add(a, b):
    if len(a) != len(b):
        raise ValidationError(f"dimension mismatch: {a!r} vs {b!r}")
    return tuple(x + y for x, y in zip(a, b))


def shift(idx, j, step=1):
    """``idx + step * eps_j``; None when the result leaves Z_+^d."""
    out = list(idx)
    out[j - 1] += step
    if out[j - 1] < 0:
        return None
    return tuple(out)


def leq(a, b):
    """Componentwise partial order."""
    if len(a) != len(b):
        raise ValidationError(f"dimension mismatch: {a!r} vs {b!r}")
    return all(x <= y for x, y in zip(a, b))


def count_level(d, k):
    """Number of multi-indices of total degree exactly ``k``."""
    if k < 0:
        return 0
    return comb(k + d - 1, d - 1)


def count_upto(d, n):
    """Number of multi-indices of total degree at most ``n`` (dim of H_n)."""
    if n < 0:
        return 0
    return comb(n + d, d)


def _level(d, k):
    if d == 1:
        return [(k,)]
    out = []
    for first in range(k, -1, -1):
        out.extend((first,) + rest for rest in _level(d - 1, k - first))
    return out


def level(d, k):
    """All multi-indices with ``|I| = k`` in basis order."""
    check_limits(d)
    if k < 0:
        return []
    return _level(d, k)


def rank(idx):
    """Basis position of ``idx``."""
    idx = as_index(idx)
    d = len(idx)
    k = sum(idx)
    pos = count_upto(d, k - 1)
    rem = k
    for i in range(d - 1):
        # indices agreeing so far but with a larger entry here come first
        tail = d - 1 - i
        for v in range(idx[i] + 1, rem + 1):
            pos += count_level(tail, rem - v)
        rem -= idx[i]
    return pos


def unrank(d, position, n=None):
    """Inverse of :func:`rank`; ``n`` optionally bounds the total degree."""
    check_limits(d)
    if position < 0:
        raise ValidationError(f"position must be >= 0, got {position}")
    if n is not None and position >= count_upto(d, n):
        raise ValidationError(
            f"position {position} out of range for d={d}, N={n} "
            f"({count_upto(d, n)} indices)"
        )
    k = 0
    while count_upto(d, k) <= position:
        k += 1
    offset = position - count_upto(d, k - 1)
    out = []
    rem = k
    for i in range(d - 1):
        tail = d - 1 - i
        v = rem
        while True:
            block = count_level(tail, rem - v)
            if offset < block:
                break
            offset -= block
            v -= 1
        out.append(v)
        rem -= v
    out.append(rem)
    return tuple(out)


@lru_cache(maxsize=64)
def basis(d, n):
    """Tuple of all indices with ``|I| <= n`` in basis order."""
    check_limits(d)
    out = []
    for k in range(n + 1):
        out.extend(_level(d, k))
    return tuple(out)


@lru_cache(maxsize=64)
def positions(d, n):
    """Map index -> basis position for ``|I| <= n``."""
    return {idx: pos for pos, idx in enumerate(basis(d, n))}


@lru_cache(maxsize=64)
def neighbors(d, n):
    """Successor / predecessor position tables on H_n.

    ``succ[p, j]`` is the position of ``I + eps_{j+1}`` (or -1 when that
    leaves H_n), ``pred[p, j]`` the position of ``I - eps_{j+1}`` (or -1).
    """
    idxs = basis(d, n)
    pos = positions(d, n)
    succ = np.full((len(idxs), d), -1, dtype=np.int64)
    pred = np.full((len(idxs), d), -1, dtype=np.int64)
    for p, idx in enumerate(idxs):
        for j in range(d):
            up = list(idx)
            up[j] += 1
            succ[p, j] = pos.get(tuple(up), -1)
            if idx[j] > 0:
                down = list(idx)
                down[j] -= 1
                pred[p, j] = pos[tuple(down)]
    succ.setflags(write=False)
    pred.setflags(write=False)
    return succ, pred


@lru_cache(maxsize=64)
def degrees(d, n):
    arr = np.array([sum(idx) for idx in basis(d, n)], dtype=np.int64)
    arr.setflags(write=False)
    return arr


def to_json(idx):
    return [int(e) for e in idx]
