"""Minimal NIfTI-1 reader/writer for the 3-D scalar subset this tool uses.

Supports single-file ``.nii`` volumes (optionally gzip-wrapped) with unsigned
byte, signed short, or float payloads. Byte-swapped files are detected via
``sizeof_hdr`` and transparently swapped. Writing is deterministic: the same
volume always serializes to the same bytes, gzip included.
"""
from __future__ import annotations

import gzip
import struct

import numpy as np

from .volumes import DType, VoxelVolume

HEADER_SIZE = 348
MAGIC = b"n+1\x00"
VOX_OFFSET = 352

_GZIP_MAGIC = b"\x1f\x8b"

_DTYPE_BY_CODE = {
    2: DType.U8,
    4: DType.I16,
    16: DType.F32,
}
_CODE_BY_DTYPE = {v: k for k, v in _DTYPE_BY_CODE.items()}
_BITPIX = {DType.U8: 8, DType.I16: 16, DType.F32: 32}
_NP_DTYPE = {DType.U8: "u1", DType.I16: "i2", DType.F32: "f4"}


class NiftiError(ValueError):
    """Malformed or unsupported NIfTI payload."""


def _is_gzip(data: bytes) -> bool:
    return data[:2] == _GZIP_MAGIC


def read_nifti(data: bytes) -> VoxelVolume:
    """Parse a NIfTI-1 single file (plain or gzip) into a :class:`VoxelVolume`."""
    if _is_gzip(data):
        try:
            data = gzip.decompress(data)
        except (OSError, EOFError) as exc:
            raise NiftiError(f"corrupt gzip stream: {exc}") from exc
    if len(data) < HEADER_SIZE:
        raise NiftiError(f"file too short for a header: {len(data)} bytes")

    endian = "<"
    (sizeof_hdr,) = struct.unpack_from("<i", data, 0)
    if sizeof_hdr != HEADER_SIZE:
        (swapped,) = struct.unpack_from(">i", data, 0)
        if swapped != HEADER_SIZE:
            raise NiftiError(f"bad sizeof_hdr {sizeof_hdr}; not a NIfTI-1 file")
        endian = ">"

    magic = data[344:348]
    if magic != MAGIC:
        raise NiftiError(f"bad magic {magic!r}; expected {MAGIC!r}")

    dim = struct.unpack_from(endian + "8h", data, 40)
    (datatype, bitpix) = struct.unpack_from(endian + "2h", data, 70)
    pixdim = struct.unpack_from(endian + "8f", data, 76)
    (vox_offset,) = struct.unpack_from(endian + "f", data, 108)
    (scl_slope, scl_inter) = struct.unpack_from(endian + "2f", data, 112)
    descrip = data[148:228].split(b"\x00", 1)[0].decode("utf-8", errors="replace")

    ndim = dim[0]
    if ndim < 1 or ndim > 7:
        raise NiftiError(f"implausible dim[0] = {ndim}")
    if ndim > 3:
        # Trailing singleton dimensions are fine; real 4-D data is not.
        for d in range(4, ndim + 1):
            if dim[d] > 1:
                raise NiftiError("4D not supported")
    dims = tuple(max(1, dim[i]) if i <= ndim else 1 for i in (1, 2, 3))
    spacing = tuple(float(pixdim[i]) if i <= ndim and pixdim[i] > 0 else 1.0
                    for i in (1, 2, 3))

    dtype = _DTYPE_BY_CODE.get(datatype)
    if dtype is None:
        raise NiftiError(f"unsupported datatype code {datatype}")
    if bitpix not in (0, _BITPIX[dtype]):
        raise NiftiError(f"bitpix {bitpix} inconsistent with datatype {datatype}")

    n = dims[0] * dims[1] * dims[2]
    offset = int(vox_offset) if vox_offset >= HEADER_SIZE else VOX_OFFSET
    itemsize = _BITPIX[dtype] // 8
    end = offset + n * itemsize
    if len(data) < end:
        raise NiftiError(f"truncated payload: need {end} bytes, have {len(data)}")
    raw = np.frombuffer(data, dtype=endian + _NP_DTYPE[dtype], count=n, offset=offset)

    # NaN scale means "no scaling", same as the slope == 0 convention.
    slope = float(scl_slope) if np.isfinite(scl_slope) else 0.0
    inter = float(scl_inter) if np.isfinite(scl_inter) else 0.0

    return VoxelVolume(
        dims=dims,
        spacing=spacing,
        dtype=dtype,
        data=raw.astype(raw.dtype.newbyteorder("=")),
        scl_slope=slope,
        scl_inter=inter,
        description=descrip,
    )


def write_nifti(volume: VoxelVolume, compress: bool = False) -> bytes:
    """Serialize a volume as little-endian NIfTI-1; gzip when ``compress``."""
    header = bytearray(HEADER_SIZE)
    struct.pack_into("<i", header, 0, HEADER_SIZE)
    struct.pack_into("<8h", header, 40, 3, *volume.dims, 1, 1, 1, 1)
    struct.pack_into(
        "<2h", header, 70, _CODE_BY_DTYPE[volume.dtype], _BITPIX[volume.dtype]
    )
    struct.pack_into("<8f", header, 76, 1.0, *volume.spacing, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<f", header, 108, float(VOX_OFFSET))
    struct.pack_into("<2f", header, 112, volume.scl_slope, volume.scl_inter)
    descrip = volume.description.encode("utf-8")
    header[148:148 + len(descrip)] = descrip
    header[344:348] = MAGIC

    payload = volume.data.astype("<" + _NP_DTYPE[volume.dtype], copy=False).tobytes()
    out = bytes(header) + b"\x00\x00\x00\x00" + payload
    if compress:
        # mtime pinned to zero keeps the gzip wrapper reproducible.
        out = gzip.compress(out, mtime=0)
    return out
