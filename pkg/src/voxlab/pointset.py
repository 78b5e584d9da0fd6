"""Dense point sets over a fixed finite universe ``0..n-1``.

A :class:`PointSet` is the common currency between the closure-space
operators, the logic checker, and the volume layer: membership is stored as
a boolean vector, so set algebra stays vectorized even at voxel scale.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np


class UniverseMismatchError(ValueError):
    """Two point sets (or a set and a space) disagree on universe size."""


def _check_same_universe(a: "PointSet", b: "PointSet") -> None:
    if a.size != b.size:
        raise UniverseMismatchError(
            f"universe size mismatch: {a.size} != {b.size}"
        )


class PointSet:
    """Immutable subset of the universe ``{0, .., size-1}``."""

    __slots__ = ("_bits",)

    def __init__(self, bits: np.ndarray):
        arr = np.asarray(bits, dtype=bool)
        if arr.ndim != 1:
            raise ValueError("membership vector must be one-dimensional")
        arr = arr.copy()
        arr.flags.writeable = False
        self._bits = arr

    # Constructors --------------------------------------------------------

    @classmethod
    def empty(cls, size: int) -> "PointSet":
        if size < 0:
            raise ValueError("universe size must be >= 0")
        return cls(np.zeros(size, dtype=bool))

    @classmethod
    def full(cls, size: int) -> "PointSet":
        if size < 0:
            raise ValueError("universe size must be >= 0")
        return cls(np.ones(size, dtype=bool))

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]) -> "PointSet":
        bits = np.zeros(size, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64, count=-1)
        if idx.size:
            if idx.min() < 0 or idx.max() >= size:
                raise ValueError(f"point index out of range for universe {size}")
            bits[idx] = True
        return cls(bits)

    # Views ---------------------------------------------------------------

    @property
    def size(self) -> int:
        """Number of points in the universe (not the member count)."""
        return int(self._bits.shape[0])

    @property
    def bits(self) -> np.ndarray:
        """Read-only membership vector."""
        return self._bits

    def count(self) -> int:
        return int(self._bits.sum())

    def is_empty(self) -> bool:
        return not self._bits.any()

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self._bits)

    def __contains__(self, point: int) -> bool:
        return 0 <= point < self.size and bool(self._bits[point])

    def __iter__(self):
        return iter(self.indices().tolist())

    def __len__(self) -> int:
        return self.count()

    # Algebra (closed over the same universe) ------------------------------

    def union(self, other: "PointSet") -> "PointSet":
        _check_same_universe(self, other)
        return PointSet(self._bits | other._bits)

    def intersection(self, other: "PointSet") -> "PointSet":
        _check_same_universe(self, other)
        return PointSet(self._bits & other._bits)

    def difference(self, other: "PointSet") -> "PointSet":
        _check_same_universe(self, other)
        return PointSet(self._bits & ~other._bits)

    def complement(self) -> "PointSet":
        return PointSet(~self._bits)

    def subset_of(self, other: "PointSet") -> bool:
        _check_same_universe(self, other)
        return bool(np.all(~self._bits | other._bits))

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __invert__ = complement

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.size == other.size and bool(
            np.array_equal(self._bits, other._bits)
        )

    def __hash__(self):
        return hash((self.size, self._bits.tobytes()))

    def __repr__(self) -> str:
        members = self.indices().tolist()
        if len(members) > 12:
            head = ", ".join(map(str, members[:12]))
            return f"PointSet(n={self.size}, {{{head}, ...}} #{len(members)})"
        return f"PointSet(n={self.size}, {{{', '.join(map(str, members))}}})"
