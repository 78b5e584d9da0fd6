"""Finite closure spaces and the relations that generate them.

Every finite closure space here is *complete*: the closure operator is fully
determined by a relation ``R : X -> 2^X`` via ``C(A) = union of R(x) for x
in A``. Working with the relation form lets the same machinery describe tiny
explicit graphs in tests and multi-million-voxel grids, where the relation
is kept implicit and closure is computed by array shifts instead.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pointset import PointSet, UniverseMismatchError


class Connectivity(enum.Enum):
    """Voxel adjacency scheme: 6 face neighbors, or the full 26-neighborhood."""

    FACE6 = "face6"
    FULL26 = "full26"


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a voxel universe: dimensions, spacing (mm) and adjacency.

    Linearization is x-fastest: ``index = x + nx * (y + ny * z)``, matching
    the on-disk order of volume payloads.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    connectivity: Connectivity = Connectivity.FACE6

    def __post_init__(self):
        nx, ny, nz = self.dims
        if nx < 1 or ny < 1 or nz < 1:
            raise ValueError(f"grid dims must each be >= 1, got {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def n(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def linear_index(self, x: int, y: int, z: int) -> int:
        nx, ny, nz = self.dims
        if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
            raise IndexError(f"voxel ({x}, {y}, {z}) outside grid {self.dims}")
        return x + nx * (y + ny * z)

    def coords(self, index: int) -> tuple[int, int, int]:
        nx, ny, _ = self.dims
        x = index % nx
        y = (index // nx) % ny
        z = index // (nx * ny)
        return x, y, z


class Relation:
    """Explicit relation ``R : {0..n-1} -> 2^{0..n-1}`` as adjacency lists."""

    __slots__ = ("_n", "_targets", "_reversed")

    def __init__(self, n: int, neighbors: Sequence[Iterable[int]]):
        if len(neighbors) != n:
            raise ValueError(f"expected {n} neighbor sets, got {len(neighbors)}")
        targets = []
        for x, row in enumerate(neighbors):
            arr = np.unique(np.fromiter((int(t) for t in row), dtype=np.int64))
            if arr.size and (arr[0] < 0 or arr[-1] >= n):
                raise ValueError(f"neighbor of point {x} outside universe of size {n}")
            arr.flags.writeable = False
            targets.append(arr)
        self._n = n
        self._targets = tuple(targets)
        self._reversed: Relation | None = None

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[int, Iterable[int]]) -> "Relation":
        return cls(n, [mapping.get(x, ()) for x in range(n)])

    @property
    def n(self) -> int:
        return self._n

    def neighbors(self, x: int) -> np.ndarray:
        return self._targets[x]

    def reversed(self) -> "Relation":
        """The relation with every edge flipped (cached)."""
        if self._reversed is None:
            rows: list[list[int]] = [[] for _ in range(self._n)]
            for x, row in enumerate(self._targets):
                for t in row.tolist():
                    rows[t].append(x)
            rev = Relation(self._n, rows)
            rev._reversed = self
            self._reversed = rev
        return self._reversed

    def is_reflexive(self) -> bool:
        return all(x in row for x, row in enumerate(self._targets))

    def is_symmetric(self) -> bool:
        edges = {(x, int(t)) for x, row in enumerate(self._targets) for t in row}
        return all((t, x) in edges for x, t in edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self._n == other._n and all(
            np.array_equal(a, b) for a, b in zip(self._targets, other._targets)
        )

    def __repr__(self) -> str:
        return f"Relation(n={self._n})"


def lift(rel: Relation, xs: PointSet) -> PointSet:
    """Union of ``R(x)`` over all members of ``xs``."""
    if xs.size != rel.n:
        raise UniverseMismatchError(
            f"point set universe {xs.size} does not match relation size {rel.n}"
        )
    bits = np.zeros(rel.n, dtype=bool)
    for x in xs.indices().tolist():
        bits[rel.neighbors(x)] = True
    return PointSet(bits)


class ClosureSpace:
    """Finite complete closure space, represented by its generating relation."""

    def __init__(self, relation: Relation):
        self._relation = relation

    @property
    def n(self) -> int:
        return self._relation.n

    @property
    def relation(self) -> Relation:
        return self._relation

    # Bit-level kernels; PointSet wrappers live at module level.

    def closure_bits(self, bits: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        rel = self._relation
        for x in np.flatnonzero(bits).tolist():
            out[rel.neighbors(x)] = True
        return out

    def preimage_bits(self, bits: np.ndarray) -> np.ndarray:
        """Points whose relation image meets ``bits`` (closure along reversed edges)."""
        out = np.zeros(self.n, dtype=bool)
        rev = self._relation.reversed()
        for x in np.flatnonzero(bits).tolist():
            out[rev.neighbors(x)] = True
        return out

    def is_symmetric(self) -> bool:
        return self._relation.is_symmetric()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


_FACE_OFFSETS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


def _dilate_grid(mask3: np.ndarray, connectivity: Connectivity) -> np.ndarray:
    """One closure step on a (nz, ny, nx) boolean grid, center included."""
    if connectivity is Connectivity.FULL26:
        # The 3x3x3 box is separable: dilate along each axis in turn.
        out = mask3.copy()
        for axis in range(3):
            shifted = out.copy()
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(1, None)
            hi[axis] = slice(None, -1)
            shifted[tuple(lo)] |= out[tuple(hi)]
            shifted[tuple(hi)] |= out[tuple(lo)]
            out = shifted
        return out
    out = mask3.copy()
    out[1:, :, :] |= mask3[:-1, :, :]
    out[:-1, :, :] |= mask3[1:, :, :]
    out[:, 1:, :] |= mask3[:, :-1, :]
    out[:, :-1, :] |= mask3[:, 1:, :]
    out[:, :, 1:] |= mask3[:, :, :-1]
    out[:, :, :-1] |= mask3[:, :, 1:]
    return out


class GridSpace(ClosureSpace):
    """Closure space over a voxel grid, with vectorized closure.

    The adjacency is reflexive (every voxel neighbors itself) and symmetric,
    so closure of a mask is the mask plus its one-voxel border and preimage
    coincides with closure. The explicit :class:`Relation` is only
    materialized on demand; at clinical volume sizes it never is.
    """

    def __init__(self, spec: GridSpec):
        self._spec = spec
        self._relation_cache: Relation | None = None

    @property
    def spec(self) -> GridSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._spec.n

    @property
    def relation(self) -> Relation:
        if self._relation_cache is None:
            self._relation_cache = grid_relation(self._spec)
        return self._relation_cache

    def as_grid(self, bits: np.ndarray) -> np.ndarray:
        nx, ny, nz = self._spec.dims
        return bits.reshape(nz, ny, nx)

    def closure_bits(self, bits: np.ndarray) -> np.ndarray:
        grid = _dilate_grid(self.as_grid(bits), self._spec.connectivity)
        return grid.reshape(-1)

    def preimage_bits(self, bits: np.ndarray) -> np.ndarray:
        return self.closure_bits(bits)

    def is_symmetric(self) -> bool:
        return True


# Spatial-core operators ----------------------------------------------------


def _check_space_set(space: ClosureSpace, xs: PointSet) -> None:
    if xs.size != space.n:
        raise UniverseMismatchError(
            f"point set universe {xs.size} does not match space size {space.n}"
        )


def closure_of(space: ClosureSpace, xs: PointSet) -> PointSet:
    """``C(xs)``: union of relation images over members of ``xs``."""
    _check_space_set(space, xs)
    return PointSet(space.closure_bits(xs.bits))


def interior_of(space: ClosureSpace, xs: PointSet) -> PointSet:
    """Dual of closure: ``I(A) = C(A^c)^c``."""
    _check_space_set(space, xs)
    return PointSet(~space.closure_bits(~xs.bits))


def induced_relation(space: ClosureSpace) -> Relation:
    """Relation recovered from the space: ``R(x) = C({x})``."""
    n = space.n
    rows = []
    bits = np.zeros(n, dtype=bool)
    for x in range(n):
        bits[x] = True
        rows.append(np.flatnonzero(space.closure_bits(bits)))
        bits[x] = False
    return Relation(n, rows)


def induced_space(rel: Relation) -> ClosureSpace:
    """Complete space generated by ``rel``: closure is the lifting of ``rel``."""
    return ClosureSpace(rel)


def grid_relation(spec: GridSpec) -> Relation:
    """Explicit voxel adjacency: each voxel plus its face (or box) neighbors.

    Reflexive and symmetric by construction. Intended for small grids;
    large grids should stay in :class:`GridSpace` form.
    """
    nx, ny, nz = spec.dims
    rows: list[list[int]] = []
    if spec.connectivity is Connectivity.FULL26:
        offsets = [
            (dx, dy, dz)
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            for dz in (-1, 0, 1)
        ]
    else:
        offsets = [(0, 0, 0), *_FACE_OFFSETS]
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                row = []
                for dx, dy, dz in offsets:
                    tx, ty, tz = x + dx, y + dy, z + dz
                    if 0 <= tx < nx and 0 <= ty < ny and 0 <= tz < nz:
                        row.append(tx + nx * (ty + ny * tz))
                rows.append(row)
    return Relation(spec.n, rows)


@dataclass(frozen=True)
class SpaceClassification:
    pretopological: bool
    topological: bool


_SAMPLE_SEED = 0xC105
_SAMPLE_COUNT = 64


def _subset_sample(space: ClosureSpace, exhaustive_limit: int):
    """Subsets to probe: exhaustive when feasible, else a fixed deterministic mix.

    Above the exhaustive limit the sample is all singletons, the empty set,
    the full set, and 64 pseudo-random subsets from a fixed seed.
    """
    n = space.n
    if n <= exhaustive_limit:
        for code in range(1 << n):
            bits = np.zeros(n, dtype=bool)
            for i in range(n):
                if code >> i & 1:
                    bits[i] = True
            yield bits
        return
    yield np.zeros(n, dtype=bool)
    yield np.ones(n, dtype=bool)
    for x in range(n):
        bits = np.zeros(n, dtype=bool)
        bits[x] = True
        yield bits
    rng = np.random.default_rng(_SAMPLE_SEED)
    for _ in range(_SAMPLE_COUNT):
        yield rng.random(n) < 0.5


def classify_space(space: ClosureSpace, exhaustive_limit: int = 12) -> SpaceClassification:
    """Check extensivity (pretopological) and idempotence (topological).

    Exhaustive over all ``2^n`` subsets when ``n <= exhaustive_limit``;
    otherwise over the deterministic sample documented above, so the answer
    is a sound refutation but only a sampled confirmation.
    """
    pretopological = True
    topological = True
    for bits in _subset_sample(space, exhaustive_limit):
        c = space.closure_bits(bits)
        if pretopological and bool(np.any(bits & ~c)):
            pretopological = False
        if topological and not np.array_equal(space.closure_bits(c), c):
            topological = False
        if not pretopological and not topological:
            break
    return SpaceClassification(
        pretopological=pretopological,
        topological=pretopological and topological,
    )
