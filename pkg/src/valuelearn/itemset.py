"""Subsets of a finite ground set [n] = {0, ..., n-1}.

An ItemSet always keeps the sorted index tuple. For n <= 128 it also keeps
the equivalent bitmask, which is what the exhaustive oracles work with.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

BITSET_MAX_N = 128


@dataclass(frozen=True)
class ItemSet:
    n: int
    indices: tuple[int, ...]
    _mask: int | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"ground-set size must be nonnegative, got {self.n}")
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise ValueError(f"indices must lie in [0, {self.n}), got {idx}")
        object.__setattr__(self, "indices", idx)
        if self.n <= BITSET_MAX_N:
            mask = 0
            for i in idx:
                mask |= 1 << i
            object.__setattr__(self, "_mask", mask)

    # -- constructors ---------------------------------------------------
    @classmethod
    def of(cls, n: int, items: Iterable[int] = ()) -> "ItemSet":
        return cls(n, tuple(items))

    @classmethod
    def empty(cls, n: int) -> "ItemSet":
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> "ItemSet":
        return cls(n, tuple(range(n)))

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "ItemSet":
        if mask < 0 or mask >> n:
            raise ValueError(f"mask {mask} has bits outside [0, {n})")
        return cls(n, tuple(i for i in range(n) if mask >> i & 1))

    @classmethod
    def from_indicator(cls, x) -> "ItemSet":
        x = np.asarray(x)
        return cls(x.shape[0], tuple(np.flatnonzero(x).tolist()))

    # -- representations ------------------------------------------------
    @property
    def is_bitset(self) -> bool:
        return self._mask is not None

    @property
    def mask(self) -> int:
        """Bitmask with bit i set iff i is in the set (n <= 128 only)."""
        if self._mask is None:
            raise ValueError(f"bit representation is only kept for n <= {BITSET_MAX_N}")
        return self._mask

    def indicator(self, dtype=bool) -> np.ndarray:
        x = np.zeros(self.n, dtype=dtype)
        if self.indices:
            x[list(self.indices)] = 1
        return x

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.indices, dtype=np.int64, count=len(self.indices))

    # -- set protocol ---------------------------------------------------
    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        if self._mask is not None:
            return 0 <= i < self.n and bool(self._mask >> i & 1)
        k = bisect_left(self.indices, i)
        return k < len(self.indices) and self.indices[k] == i

    def _check_same_n(self, other: "ItemSet"):
        if self.n != other.n:
            raise ValueError(f"ground-set sizes differ: {self.n} vs {other.n}")

    def union(self, other: "ItemSet") -> "ItemSet":
        self._check_same_n(other)
        return ItemSet(self.n, self.indices + other.indices)

    def intersection(self, other: "ItemSet") -> "ItemSet":
        self._check_same_n(other)
        return ItemSet(self.n, tuple(set(self.indices) & set(other.indices)))

    def difference(self, other: "ItemSet") -> "ItemSet":
        self._check_same_n(other)
        return ItemSet(self.n, tuple(set(self.indices) - set(other.indices)))

    def complement(self) -> "ItemSet":
        return ItemSet(self.n, tuple(set(range(self.n)) - set(self.indices)))

    def add(self, i: int) -> "ItemSet":
        return ItemSet(self.n, self.indices + (i,))

    def issubset(self, other: "ItemSet") -> bool:
        self._check_same_n(other)
        if self._mask is not None and other._mask is not None:
            return self._mask & ~other._mask == 0
        return set(self.indices) <= set(other.indices)

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.indices)) + "}"


def all_masks(n: int) -> range:
    return range(1 << n)


def masks_to_matrix(masks, n: int) -> np.ndarray:
    """Rows of 0/1 indicators, one per bitmask."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)


def matrix_to_masks(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=bool)
    if X.shape[1] > 62:
        raise ValueError("bitmask conversion needs n <= 62")
    return (X.astype(np.int64) << np.arange(X.shape[1])).sum(axis=1)


def popcounts(n: int) -> np.ndarray:
    """|S| for every mask S in [0, 2^n)."""
    c = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        b = 1 << i
        c[b:2 * b] = c[:b] + 1
    return c
