"""Rasterized lens maps: pixel grids to view coordinates, ray maps, ST maps.

Pixel (0, 0) is the top-left texel; view coordinates put +x right and
+y up with the reference axis spanning [-1, 1] at the frame edge.  Ray
maps store one unit direction per pixel (NaN when the pixel sees past
the projection's field).  ST maps address a rectilinear source frame in
normalized coordinates with t running bottom-up, the convention
compositing packages expect, and are stored float32 so a file round
trip is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .imgio import read_pfm, write_pfm
from .projection import HORIZONTAL, VERTICAL, LensDomainError, LensParams


def _check_size(width: int, height: int) -> None:
    if not (isinstance(width, int) and isinstance(height, int)):
        raise TypeError(f"width/height must be ints, got {width!r} x {height!r}")
    if width < 1 or height < 1:
        raise ValueError(f"width/height must be >= 1, got {width} x {height}")


def view_extent(width: int, height: int, reference_axis: str = HORIZONTAL):
    """Half-extents of the view frame; the reference axis is 1 by definition."""
    _check_size(width, height)
    if reference_axis == HORIZONTAL:
        return 1.0, height / width
    if reference_axis == VERTICAL:
        return width / height, 1.0
    raise ValueError(f"reference_axis must be horizontal or vertical, got {reference_axis!r}")


def pixel_to_view(width: int, height: int, reference_axis: str = HORIZONTAL):
    """View-coordinate grids for every pixel center; returns ``(vx, vy)``.

    The y row coordinate is flipped (rows grow downward, view y grows
    upward); the subtraction order keeps the center row at +0.0.
    """
    ex, ey = view_extent(width, height, reference_axis)
    raw_x = 2.0 * (np.arange(width, dtype=np.float64) + 0.5) / width - 1.0
    raw_y = 2.0 * (np.arange(height, dtype=np.float64) + 0.5) / height - 1.0
    vx_row = raw_x * ex
    vy_col = (0.0 - raw_y) * ey
    vx = np.tile(vx_row, (height, 1))
    vy = np.tile(vy_col[:, None], (1, width))
    return vx, vy


@dataclass
class RayMap:
    """Per-pixel unit primary rays; invalid pixels carry NaN and valid=False."""

    gx: np.ndarray
    gy: np.ndarray
    gz: np.ndarray
    valid: np.ndarray

    @property
    def width(self) -> int:
        return self.gx.shape[1]

    @property
    def height(self) -> int:
        return self.gx.shape[0]


@dataclass
class STMap:
    """Per-pixel source coordinates in [0, 1]; NaN marks unmapped texels."""

    s: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        self.s = np.asarray(self.s, dtype=np.float32)
        self.t = np.asarray(self.t, dtype=np.float32)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.s) & np.isfinite(self.t)

    @property
    def width(self) -> int:
        return self.s.shape[1]

    @property
    def height(self) -> int:
        return self.s.shape[0]


def generate_raymap(lens: LensParams, width: int, height: int, backend=None) -> RayMap:
    """Trace every pixel center of a ``width x height`` frame through the lens."""
    vx, vy = pixel_to_view(width, height, lens.reference_axis)
    gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend=backend)
    return RayMap(gx, gy, gz, valid)


def raymap_to_stmap(raymap: RayMap, omega: float, reference_axis: str = HORIZONTAL) -> STMap:
    """Project a ray map onto a rectilinear source frame with angle of view ``omega``.

    ``omega`` (radians) spans the chosen reference axis of the source;
    the other axis follows from the ray map's aspect ratio.  Rays at or
    behind the lens plane (gz <= 0) cannot hit a rectilinear frame and
    come out NaN.
    """
    if not (0.0 < omega < math.pi):
        raise LensDomainError(
            "a rectilinear source frame needs an angle of view in (0, 180) deg, "
            f"got {math.degrees(omega) if math.isfinite(omega) else omega:.6g}"
        )
    aspect = raymap.width / raymap.height
    if reference_axis == HORIZONTAL:
        ax, ay = 1.0, aspect
    elif reference_axis == VERTICAL:
        ax, ay = 1.0 / aspect, 1.0
    else:
        raise ValueError(f"reference_axis must be horizontal or vertical, got {reference_axis!r}")
    c = 1.0 / math.tan(omega / 2.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        denom = 2.0 * raymap.gz
        s = c / denom * (raymap.gx * ax) + 0.5
        t = c / denom * (raymap.gy * ay) + 0.5
        bad = ~raymap.valid | ~(raymap.gz > 0.0)
    s = np.where(bad, np.nan, s)
    t = np.where(bad, np.nan, t)
    return STMap(s, t)


def apply_stmap(image, stmap: STMap, backend=None) -> np.ndarray:
    """Resample ``image`` through an ST map; unmapped texels come out zero."""
    arr = np.asarray(image, dtype=np.float64)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[..., None]
    ih, iw = arr.shape[:2]
    s = stmap.s.astype(np.float64)
    t = stmap.t.astype(np.float64)
    x = s * iw - 0.5
    y = (1.0 - t) * ih - 0.5
    out = kernels.gather_bilinear(arr, x, y, backend=backend)
    return out[..., 0] if squeeze else out


def sidecar_path(path) -> Path:
    """Path of the lens-description JSON that rides along a map file."""
    return Path(path).with_suffix(".lens.json")


def _write_sidecar(path, sidecar: dict) -> None:
    text = json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
    sidecar_path(path).write_text(text, encoding="ascii")


def write_raymap(path, raymap: RayMap, sidecar: dict = None) -> None:
    """Store a ray map as a 3-channel PFM (x, y, z); NaN marks invalid pixels."""
    stack = np.stack(
        [
            np.where(raymap.valid, raymap.gx, np.nan),
            np.where(raymap.valid, raymap.gy, np.nan),
            np.where(raymap.valid, raymap.gz, np.nan),
        ],
        axis=-1,
    )
    write_pfm(path, stack.astype(np.float32))
    if sidecar is not None:
        _write_sidecar(path, sidecar)


def read_raymap(path) -> RayMap:
    arr = read_pfm(path)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{path}: ray maps need 3 channels, got shape {arr.shape}")
    gx = arr[..., 0].astype(np.float64)
    gy = arr[..., 1].astype(np.float64)
    gz = arr[..., 2].astype(np.float64)
    valid = np.isfinite(gx) & np.isfinite(gy) & np.isfinite(gz)
    return RayMap(gx, gy, gz, valid)


def write_stmap(path, stmap: STMap, sidecar: dict = None) -> None:
    """Store an ST map as a 3-channel PFM: s, t, and a 0/1 coverage channel."""
    coverage = stmap.valid.astype(np.float32)
    stack = np.stack([stmap.s, stmap.t, coverage], axis=-1)
    write_pfm(path, stack)
    if sidecar is not None:
        _write_sidecar(path, sidecar)


def read_stmap(path) -> STMap:
    arr = read_pfm(path)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{path}: ST maps need 3 channels, got shape {arr.shape}")
    return STMap(arr[..., 0], arr[..., 1])
