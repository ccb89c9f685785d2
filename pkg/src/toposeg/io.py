"""Bit-exact file formats: binary PGM masks and the TLM float container.

TLM layout: magic ``TLM1``, three unsigned 32-bit little-endian integers
(categories, height, width), then categories*height*width IEEE-754 float32
values, little-endian, category-major then row-major. Likelihood maps add a
[0, 1] range check on top of the raw container; gradient tensors use the
container without the range check.
"""

from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, LabelRangeError, TruncationError, ValueRangeError
from .grid import LabelMask, LikelihoodMap

TLM_MAGIC = b"TLM1"
PGM_MAXVAL = 255

# Guard against absurd headers before allocating payload buffers.
_MAX_ELEMENTS = 1 << 31


def encode_tensor(data: np.ndarray) -> bytes:
    """Serialize a 3-d float array as raw TLM container bytes (no range check)."""
    a = np.asarray(data)
    if a.ndim != 3:
        raise FormatError(f"TLM tensors are 3-d, got shape {a.shape}")
    if min(a.shape) < 1:
        raise FormatError(f"TLM dimensions must be >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueRangeError("TLM payload contains non-finite values")
    c, h, w = a.shape
    header = TLM_MAGIC + struct.pack("<III", c, h, w)
    payload = np.ascontiguousarray(a, dtype="<f4").tobytes()
    return header + payload


def decode_tensor(blob: bytes) -> np.ndarray:
    """Parse raw TLM container bytes into a float64 array (no range check)."""
    if len(blob) < 4 or blob[:4] != TLM_MAGIC:
        raise FormatError("bad TLM magic bytes")
    if len(blob) < 16:
        raise TruncationError("TLM header truncated")
    c, h, w = struct.unpack("<III", blob[4:16])
    if c < 1 or h < 1 or w < 1:
        raise FormatError(f"TLM dimensions must be >= 1, got ({c}, {h}, {w})")
    n = c * h * w
    if n > _MAX_ELEMENTS:
        raise FormatError(f"TLM dimensions overflow: {c}x{h}x{w} elements")
    expected = 16 + 4 * n
    if len(blob) < expected:
        raise TruncationError(f"TLM payload truncated: expected {expected} bytes, got {len(blob)}")
    if len(blob) > expected:
        raise FormatError(f"TLM trailing data: expected {expected} bytes, got {len(blob)}")
    a = np.frombuffer(blob, dtype="<f4", count=n, offset=16).reshape(c, h, w)
    if not np.all(np.isfinite(a)):
        raise ValueRangeError("TLM payload contains non-finite values")
    return a.astype(np.float64)


def encode_map(m: LikelihoodMap) -> bytes:
    return encode_tensor(m.data)


def decode_map(blob: bytes) -> LikelihoodMap:
    a = decode_tensor(blob)
    if a.min() < 0.0 or a.max() > 1.0:
        raise ValueRangeError(
            f"likelihood values must lie in [0, 1], found range [{a.min()}, {a.max()}]"
        )
    return LikelihoodMap(a)


def write_map(path, m: LikelihoodMap) -> None:
    Path(path).write_bytes(encode_map(m))


def read_map(path) -> LikelihoodMap:
    return decode_map(Path(path).read_bytes())


def write_tensor(path, data: np.ndarray) -> None:
    Path(path).write_bytes(encode_tensor(data))


def read_tensor(path) -> np.ndarray:
    return decode_tensor(Path(path).read_bytes())


def encode_mask(mask: LabelMask) -> bytes:
    header = f"P5\n{mask.width} {mask.height}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + mask.data.astype(np.uint8).tobytes()


def decode_mask(blob: bytes, categories: int | None = None) -> LabelMask:
    """Parse binary PGM bytes. ``categories`` bounds the accepted labels;
    when omitted it is inferred as max(1, max label)."""
    if blob[:2] != b"P5":
        raise FormatError("not a binary PGM: missing P5 magic")
    # Header: three whitespace-separated integers, '#' comments allowed.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            nl = blob.find(b"\n", pos)
            if nl < 0:
                raise FormatError("PGM header comment never ends")
            pos = nl + 1
            continue
        m = re.match(rb"\d+", blob[pos:])
        if not m:
            raise FormatError("malformed PGM header")
        fields.append(int(m.group(0)))
        pos += m.end()
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"PGM dimensions must be >= 1, got {width}x{height}")
    if maxval != PGM_MAXVAL:
        raise FormatError(f"PGM maxval must be {PGM_MAXVAL}, got {maxval}")
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise FormatError("PGM header not terminated by whitespace")
    pos += 1
    payload = blob[pos : pos + height * width]
    if len(payload) < height * width:
        raise TruncationError(
            f"PGM payload truncated: expected {height * width} bytes, got {len(payload)}"
        )
    a = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    top = int(a.max()) if a.size else 0
    if categories is None:
        categories = max(1, top)
    elif top > categories:
        raise LabelRangeError(f"mask label {top} exceeds declared category count {categories}")
    return LabelMask(a, categories)


def write_mask(path, mask: LabelMask) -> None:
    Path(path).write_bytes(encode_mask(mask))


def read_mask(path, categories: int | None = None) -> LabelMask:
    return decode_mask(Path(path).read_bytes(), categories)
