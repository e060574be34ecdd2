"""Panorama sampling: equirectangular sources rendered through a lens.

The source covers the full sphere: longitude [-pi, pi] left to right
with 0 at image center, latitude +pi/2 at the top row.  Longitude wraps
when sampling, latitude clamps at the poles.  Rendering traces a ray
map (optionally through distortion), samples the panorama bilinearly
and returns RGBA float64 with alpha 1 where the projection has
coverage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .chromatic import ChromaticParams, dispersion_fringe
from .distortion import DistortionParams, distort_view
from .imgio import read_image
from .mapgen import RayMap, pixel_to_view
from .projection import LensParams


@dataclass
class Panorama:
    """Equirectangular image, float64 RGB in [0, 1] for LDR sources."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = np.repeat(arr[..., None], 3, axis=2)
        if arr.ndim != 3 or arr.shape[2] < 3:
            raise ValueError(f"panorama needs (H, W, >=3) pixels, got shape {arr.shape}")
        self.data = np.ascontiguousarray(arr[..., :3])

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_file(cls, path) -> "Panorama":
        return cls(read_image(path))


def _pixels(pano) -> np.ndarray:
    if isinstance(pano, Panorama):
        return pano.data
    return Panorama(np.asarray(pano)).data


def sample_equirect(pano, raymap: RayMap, backend=None) -> np.ndarray:
    """Sample a panorama along a ray map; invalid pixels come out black."""
    return kernels.equirect_sample(
        raymap.gx, raymap.gy, raymap.gz, raymap.valid, _pixels(pano), backend=backend
    )


def render_projection(
    pano,
    lens: LensParams,
    width: int,
    height: int,
    distortion: DistortionParams = None,
    chromatic: ChromaticParams = None,
    vignette: bool = False,
    backend=None,
) -> np.ndarray:
    """Render a panorama through a lens; returns (height, width, 4) float64.

    Stages: view grid, optional distortion, primary rays, panorama
    sampling, optional vignette, optional chromatic fringe.  The fringe
    pass reuses the distortion offsets already baked into the ray map,
    displacing only the per-wavelength residual, so geometry is warped
    once.  Alpha carries projection coverage and skips the color passes.
    """
    data = _pixels(pano)
    vx, vy = pixel_to_view(width, height, lens.reference_axis)
    if distortion is not None and not distortion.is_identity:
        ox, oy = distort_view(vx, vy, distortion, backend=backend)
    else:
        ox, oy = vx, vy
    gx, gy, gz, valid = kernels.rays_from_view(ox, oy, lens, backend=backend)
    rgb = kernels.equirect_sample(gx, gy, gz, valid, data, backend=backend)
    if vignette:
        rgb = rgb * kernels.vignette_grid(ox, oy, lens, backend=backend)[..., None]
    if chromatic is not None and chromatic.dispersion != 0.0:
        rgb = dispersion_fringe(
            rgb, ox - vx, oy - vy, chromatic, lens.reference_axis, backend=backend
        )
    alpha = valid.astype(np.float64)
    return np.dstack([rgb, alpha])
