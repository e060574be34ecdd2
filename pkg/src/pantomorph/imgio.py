"""Image file I/O: portable float maps for float data, PNG/JPEG via Pillow.

Float images (ray maps, ST maps, render intermediates) use the PFM
format: ``PF`` header, width/height line, a negative scale marking
little-endian float32, then rows bottom to top.  PFM keeps full float
precision and needs no third-party codec.  ``.exr`` paths are rejected
with a pointer to PFM since no EXR codec is available here.

Arrays are top-down ``(height, width[, channels])`` everywhere in
memory; the bottom-up flip happens only at the file boundary.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

_LDR_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp")


def write_pfm(path, image) -> None:
    """Write a float32 PFM; accepts (H, W) grayscale or (H, W, 3) color."""
    arr = np.asarray(image, dtype=np.float32)
    if arr.ndim == 2:
        header = b"Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        header = b"PF"
    else:
        raise ValueError(f"PFM supports (H, W) or (H, W, 3) arrays, got shape {arr.shape}")
    h, w = arr.shape[:2]
    data = np.ascontiguousarray(arr[::-1])
    if data.dtype.byteorder == ">":  # pragma: no cover - big-endian hosts only
        data = data.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(header + b"\n")
        fh.write(f"{w} {h}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(data.tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a PFM file back as a top-down float32 array."""
    with open(path, "rb") as fh:
        return parse_pfm(fh.read(), name=str(path))


def parse_pfm(raw: bytes, name: str = "<bytes>") -> np.ndarray:
    """Decode in-memory PFM bytes; see :func:`read_pfm`."""
    path = name
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PFM header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace byte terminates the header
    magic, ws, hs, scale_s = tokens
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise ValueError(f"{path}: not a PFM file (magic {magic!r})")
    w, h = int(ws), int(hs)
    scale = float(scale_s)
    dtype = "<f4" if scale < 0 else ">f4"
    count = w * h * channels
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
    if data.size != count:
        raise ValueError(f"{path}: PFM payload short, expected {count} floats")
    shape = (h, w) if channels == 1 else (h, w, 3)
    return data.reshape(shape)[::-1].astype(np.float32, copy=False)


def to_uint8(image) -> np.ndarray:
    """Quantize a [0, 1] float image to uint8 (round half to even, clipped)."""
    arr = np.asarray(image, dtype=np.float64)
    return np.clip(np.rint(arr * 255.0), 0.0, 255.0).astype(np.uint8)


def write_png(path, image) -> None:
    """Write uint8 data as-is, float data after [0, 1] quantization."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        arr = to_uint8(arr)
    Image.fromarray(arr).save(path)


def read_image(path) -> np.ndarray:
    """Load any supported image as float64; LDR formats are scaled to [0, 1]."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return read_pfm(path).astype(np.float64)
    if suffix == ".exr":
        raise ValueError(
            f"{path}: EXR is not supported in this build; use .pfm for float images"
        )
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64) / 65535.0
    return arr.astype(np.float64)


def write_image(path, image) -> None:
    """Write float data to .pfm, quantized LDR data to Pillow formats."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        write_pfm(path, image)
        return
    if suffix == ".exr":
        raise ValueError(
            f"{path}: EXR is not supported in this build; use .pfm for float images"
        )
    if suffix in _LDR_SUFFIXES:
        write_png(path, image)
        return
    raise ValueError(f"{path}: unsupported image suffix {suffix!r}")


def _require_struct_float32() -> None:  # sanity for exotic platforms
    if struct.calcsize("f") != 4:  # pragma: no cover
        raise RuntimeError("float32 layout unavailable; PFM I/O needs IEEE binary32")


_require_struct_float32()
