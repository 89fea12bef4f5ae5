"""Binary dumps of sampled arrays (``.wgrd``).

Layout, all little-endian: magic ``b"WGRD"``, ``u32`` format version,
``u8`` complex flag, ``u8`` rank, ``u16`` reserved (zero), ``u64`` dims,
then ``float64`` payload in C order with real and imaginary parts
interleaved when the complex flag is set.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"WGRD"
VERSION = 1
_HEAD = struct.Struct("<4sIBBH")


class GridFormatError(ValueError):
    """Malformed or unsupported ``.wgrd`` content."""


def dumps(array) -> bytes:
    a = np.asarray(array)
    is_complex = np.iscomplexobj(a)
    if not (is_complex or np.issubdtype(a.dtype, np.number) or a.dtype == bool):
        raise GridFormatError(f"cannot store dtype {a.dtype}")
    if a.ndim > 255:
        raise GridFormatError("rank above 255")
    head = _HEAD.pack(MAGIC, VERSION, int(is_complex), a.ndim, 0)
    dims = struct.pack(f"<{a.ndim}Q", *a.shape)
    data = np.ascontiguousarray(a, dtype="<c16" if is_complex else "<f8")
    return head + dims + data.tobytes()


def loads(buf: bytes) -> np.ndarray:
    if len(buf) < _HEAD.size:
        raise GridFormatError("truncated header")
    magic, version, cflag, rank, _ = _HEAD.unpack_from(buf)
    if magic != MAGIC:
        raise GridFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise GridFormatError(f"unsupported format version {version}")
    if cflag not in (0, 1):
        raise GridFormatError(f"bad complex flag {cflag}")
    off = _HEAD.size + 8 * rank
    if len(buf) < off:
        raise GridFormatError("truncated dims")
    shape = struct.unpack_from(f"<{rank}Q", buf, _HEAD.size)
    dtype = np.dtype("<c16" if cflag else "<f8")
    count = int(np.prod(shape, dtype=np.int64))
    if len(buf) - off != count * dtype.itemsize:
        raise GridFormatError(f"payload has {len(buf) - off} bytes, expected {count * dtype.itemsize}")
    return np.frombuffer(buf, dtype=dtype, offset=off).reshape(shape).astype(
        complex if cflag else float)


def save(path, array) -> Path:
    path = Path(path)
    path.write_bytes(dumps(array))
    return path


def load(path) -> np.ndarray:
    return loads(Path(path).read_bytes())
