"""Chromatic aberration: cyclic spectrum weights and a two-pass fringe blur.

A continuous spectrum is sampled at ``n`` evenly spaced points of a
cyclic RGB response.  Even ``n`` keeps white balance exact: the response
of t and t + 1/2 always sums to (1, 1, 1), so pairs of taps cancel.

Pass one displaces each tap along the local distortion offset, scaled by
``1 + (t - 1/2) * dispersion``, and weights it by the spectrum - the
lateral color fringe.  Pass two blurs at quarter strength perpendicular
to the dispersion with uniform weights, softening the fringe the way a
misfocused element would.  With zero dispersion both passes collapse to
the plain resample bit for bit.

Offsets here are view-space vectors; conversion to pixels flips y and
scales by half the reference-axis resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distortion import DistortionParams, distort_view
from .mapgen import pixel_to_view
from .projection import HORIZONTAL, VERTICAL


@dataclass(frozen=True)
class ChromaticParams:
    """Dispersion strength and the (even) number of spectrum taps."""

    dispersion: float = 0.0
    samples: int = 2

    def __post_init__(self) -> None:
        if not math.isfinite(self.dispersion):
            raise ValueError(f"dispersion must be finite, got {self.dispersion!r}")
        if not isinstance(self.samples, int):
            raise TypeError(f"samples must be an int, got {self.samples!r}")
        if self.samples < 2 or self.samples % 2 != 0:
            raise ValueError(f"samples must be an even int >= 2, got {self.samples}")


def _clamp01(x):
    return np.clip(x, 0.0, 1.0)


def spectrum(t):
    """Cyclic RGB response at spectrum position(s) ``t``; shape ``t.shape + (3,)``.

    Channel c is a clamped triangle wave of ``t`` shifted by (1/4, 0, 3/4).
    """
    t = np.asarray(t, dtype=np.float64)
    shifts = np.array([0.25, 0.0, 0.75])
    m = np.mod(t[..., None] + shifts, 1.0)
    return _clamp01(1.5 - np.abs(4.0 * m - 2.0))


def spectrum_fast(t):
    """Branch-free rewrite of :func:`spectrum` without the modulo.

    Red folds its wrapped tail in with a second ramp and blue is the
    complement that keeps r + g + b invariant; agrees with
    :func:`spectrum` to rounding.
    """
    t = np.asarray(t, dtype=np.float64)
    a = _clamp01(1.5 - np.abs(4.0 * t - 1.0))
    b = _clamp01(4.0 * t - 3.5)
    r = a + b
    g = _clamp01(1.5 - np.abs(4.0 * t - 2.0))
    bl = 1.0 - a - b
    return np.stack([r, g, bl], axis=-1)


def spectrum_taps(params: ChromaticParams):
    """Tap positions ``i/n`` and their white-balanced weights ``(2/n) chi``."""
    ts = np.arange(params.samples, dtype=np.float64) / params.samples
    return ts, (2.0 / params.samples) * spectrum_fast(ts)


def sample_offset(t: float, dispersion: float, dvx: float, dvy: float):
    """View-space displacement of the spectral tap at ``t`` (pass one)."""
    g = 1.0 + (t - 0.5) * dispersion
    return g * dvx, g * dvy


def perpendicular_offset(sx: float, sy: float):
    """Quarter-strength perpendicular of a pass-one offset (pass two)."""
    return -0.25 * sy, 0.25 * sx


def pixel_scale(width: int, height: int, reference_axis: str = HORIZONTAL) -> float:
    """Pixels per view unit; identical for both axes at a given frame."""
    if reference_axis == HORIZONTAL:
        return width / 2.0
    if reference_axis == VERTICAL:
        return height / 2.0
    raise ValueError(f"reference_axis must be horizontal or vertical, got {reference_axis!r}")


def _passes(arr, base_x, base_y, dvx, dvy, chromatic, reference_axis, backend):
    ih, iw, nc = arr.shape
    if nc != 3:
        raise ValueError(f"chromatic passes need 3 channels, got {nc}")
    scale = pixel_scale(iw, ih, reference_axis)
    # view -> pixel: y flips; the perpendicular is taken in view space
    disp_x = dvx * scale
    disp_y = (0.0 - dvy) * scale
    perp_x = (0.0 - dvy) * scale
    perp_y = (0.0 - dvx) * scale
    d = chromatic.dispersion
    ts, w1 = spectrum_taps(chromatic)
    out = kernels.disperse(
        arr, base_x, base_y, d * disp_x, d * disp_y, ts, w1, backend=backend
    )
    w2 = np.full((chromatic.samples, 3), 1.0 / chromatic.samples)
    zero = np.zeros_like(disp_x)
    return kernels.disperse(
        out, zero, zero, 0.25 * d * perp_x, 0.25 * d * perp_y, ts, w2, backend=backend
    )


def dispersion_fringe(image, delta_vx, delta_vy, chromatic: ChromaticParams,
                      reference_axis: str = HORIZONTAL, backend=None):
    """Fringe-only passes for an image whose geometry is already resampled.

    ``delta_vx``/``delta_vy`` give the view-space distortion offset each
    pixel went through; only the dispersive part displaces taps here.
    """
    arr = np.ascontiguousarray(image, dtype=np.float64)
    zero = np.zeros(arr.shape[:2])
    return _passes(arr, zero, zero, np.asarray(delta_vx, dtype=np.float64),
                   np.asarray(delta_vy, dtype=np.float64), chromatic, reference_axis, backend)


def chromatic_distort(image, distortion: DistortionParams, chromatic: ChromaticParams,
                      reference_axis: str = HORIZONTAL, backend=None):
    """Distort a flat image with chromatic fringing in one resampling step.

    Each output pixel gathers its spectrum taps around the distorted
    source position.  At zero dispersion this equals resampling through
    the distortion alone.
    """
    arr = np.ascontiguousarray(image, dtype=np.float64)
    ih, iw = arr.shape[:2]
    vx, vy = pixel_to_view(iw, ih, reference_axis)
    ox, oy = distort_view(vx, vy, distortion, backend=backend)
    dvx = ox - vx
    dvy = oy - vy
    scale = pixel_scale(iw, ih, reference_axis)
    base_x = dvx * scale
    base_y = (0.0 - dvy) * scale
    return _passes(arr, base_x, base_y, dvx, dvy, chromatic, reference_axis, backend)
