"""Scalar voxel volumes, binary masks, and the overlap metrics between them."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pointset import PointSet


class DType(enum.Enum):
    """Supported scalar element types (a deliberate subset of NIfTI's)."""

    U8 = "u8"
    I16 = "i16"
    F32 = "f32"

    @property
    def np_dtype(self) -> np.dtype:
        return np.dtype({DType.U8: "u1", DType.I16: "i2", DType.F32: "f4"}[self])


class ThresholdOp(enum.Enum):
    GT = ">"
    GE = ">="
    LT = "<"
    LE = "<="


class DimsMismatchError(ValueError):
    """Two volumes/masks with different grid dimensions were combined."""


@dataclass(frozen=True)
class VoxelVolume:
    """Raw scalar 3-D image in x-fastest order, immutable after construction.

    ``scl_slope``/``scl_inter`` follow the NIfTI convention: stored values are
    mapped through ``value * slope + inter`` unless slope is zero, which means
    no scaling. Spacing and the scaling pair are kept at the single-precision
    resolution the file format has, so serialization round-trips exactly.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    dtype: DType
    data: np.ndarray
    scl_slope: float = 0.0
    scl_inter: float = 0.0
    description: str = ""

    def __post_init__(self):
        nx, ny, nz = self.dims
        if nx < 1 or ny < 1 or nz < 1:
            raise ValueError(f"dims must each be >= 1, got {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(
            self, "spacing", tuple(float(np.float32(s)) for s in self.spacing)
        )
        object.__setattr__(self, "scl_slope", float(np.float32(self.scl_slope)))
        object.__setattr__(self, "scl_inter", float(np.float32(self.scl_inter)))
        if len(self.description.encode("utf-8")) > 80:
            raise ValueError("description exceeds 80 bytes")
        arr = np.asarray(self.data, dtype=self.dtype.np_dtype).reshape(-1)
        if arr.shape[0] != self.n:
            raise ValueError(
                f"data length {arr.shape[0]} does not match dims {self.dims}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def grid(self) -> np.ndarray:
        """(nz, ny, nx) view, so ``grid()[z, y, x]`` addresses voxel (x, y, z)."""
        nx, ny, nz = self.dims
        return self.data.reshape(nz, ny, nx)

    def scaled_values(self) -> np.ndarray:
        if self.scl_slope != 0.0:
            return self.data.astype(np.float64) * self.scl_slope + self.scl_inter
        return self.data.astype(np.float64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VoxelVolume):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.spacing == other.spacing
            and self.dtype is other.dtype
            and self.scl_slope == other.scl_slope
            and self.scl_inter == other.scl_inter
            and self.description == other.description
            and bool(np.array_equal(self.data, other.data))
        )


@dataclass(frozen=True)
class BinaryMask:
    """Voxel membership mask over the same x-fastest universe as volumes."""

    dims: tuple[int, int, int]
    points: PointSet

    def __post_init__(self):
        nx, ny, nz = self.dims
        if self.points.size != nx * ny * nz:
            raise DimsMismatchError(
                f"point set universe {self.points.size} does not match dims {self.dims}"
            )

    @property
    def n(self) -> int:
        return self.points.size

    def count(self) -> int:
        return self.points.count()

    @classmethod
    def empty(cls, dims: tuple[int, int, int]) -> "BinaryMask":
        nx, ny, nz = dims
        return cls(dims, PointSet.empty(nx * ny * nz))


def threshold(volume: VoxelVolume, op: ThresholdOp, c: float) -> BinaryMask:
    """Mask of voxels whose scaled value compares true against ``c``."""
    values = volume.scaled_values()
    if op is ThresholdOp.GT:
        bits = values > c
    elif op is ThresholdOp.GE:
        bits = values >= c
    elif op is ThresholdOp.LT:
        bits = values < c
    else:
        bits = values <= c
    return BinaryMask(volume.dims, PointSet(bits))


def dice(x: BinaryMask, y: BinaryMask) -> float:
    """Dice similarity: twice the overlap over the size sum, in [0, 1].

    Two empty masks count as perfect agreement (1.0); the raw formula is
    undefined there.
    """
    if x.dims != y.dims:
        raise DimsMismatchError(f"mask dims differ: {x.dims} vs {y.dims}")
    cx, cy = x.count(), y.count()
    if cx == 0 and cy == 0:
        return 1.0
    overlap = (x.points & y.points).count()
    return 2.0 * overlap / (cx + cy)


@dataclass(frozen=True)
class MaskStats:
    voxel_count: int
    volume_mm3: float


def mask_stats(mask: BinaryMask, spacing: Sequence[float]) -> MaskStats:
    sx, sy, sz = spacing
    count = mask.count()
    return MaskStats(voxel_count=count, volume_mm3=count * sx * sy * sz)


def mask_to_pointset(mask: BinaryMask) -> PointSet:
    return mask.points


def pointset_to_mask(dims: tuple[int, int, int], points: PointSet) -> BinaryMask:
    return BinaryMask(dims, points)


def mask_to_volume(mask: BinaryMask, spacing: tuple[float, float, float],
                   description: str = "") -> VoxelVolume:
    """Encode a mask as a U8 volume with values in {0, 1} for persistence."""
    return VoxelVolume(
        dims=mask.dims,
        spacing=spacing,
        dtype=DType.U8,
        data=mask.points.bits.astype(np.uint8),
        description=description,
    )


def volume_to_mask(volume: VoxelVolume) -> BinaryMask:
    """Read any scalar volume as a mask: a voxel is in iff its raw value != 0."""
    return BinaryMask(volume.dims, PointSet(volume.data != 0))
