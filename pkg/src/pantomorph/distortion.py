"""Lens distortion in view coordinates (division model, per-axis radials).

The radial term divides rather than multiplies, which keeps the model
stable at strong distortion; each power axis carries its own even-order
polynomial and the two are blended by the same azimuth weights the
projection uses.  Decentering (p) and a quadratic shift (q) follow, all
relative to an optical center offset (c):

    f  = v - c
    r2 = |f|^2
    v' = f / (1 + blend(P_x(r2), P_y(r2))) + f (f . p) + r2 q + c

With every coefficient zero the output equals the input bit for bit,
which downstream identity checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

from . import kernels
from .mapgen import RayMap, pixel_to_view
from .projection import LensParams


def _check_pair(name: str, pair) -> Tuple[float, float]:
    try:
        a, b = (float(pair[0]), float(pair[1]))
    except (TypeError, IndexError, ValueError):
        raise ValueError(f"{name} must be a pair of numbers, got {pair!r}") from None
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"{name} must be finite, got {pair!r}")
    return a, b


def _check_coeffs(name: str, coeffs) -> Tuple[float, ...]:
    out = tuple(float(c) for c in coeffs)
    if not all(math.isfinite(c) for c in out):
        raise ValueError(f"{name} coefficients must be finite, got {coeffs!r}")
    return out


@dataclass(frozen=True)
class DistortionParams:
    """Division-model distortion; defaults describe the identity."""

    c: Tuple[float, float] = (0.0, 0.0)
    p: Tuple[float, float] = (0.0, 0.0)
    q: Tuple[float, float] = (0.0, 0.0)
    radial_x: Tuple[float, ...] = field(default_factory=tuple)
    radial_y: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _check_pair("c", self.c))
        object.__setattr__(self, "p", _check_pair("p", self.p))
        object.__setattr__(self, "q", _check_pair("q", self.q))
        object.__setattr__(self, "radial_x", _check_coeffs("radial_x", self.radial_x))
        object.__setattr__(self, "radial_y", _check_coeffs("radial_y", self.radial_y))

    @property
    def cx(self) -> float:
        return self.c[0]

    @property
    def cy(self) -> float:
        return self.c[1]

    @property
    def px(self) -> float:
        return self.p[0]

    @property
    def py(self) -> float:
        return self.p[1]

    @property
    def qx(self) -> float:
        return self.q[0]

    @property
    def qy(self) -> float:
        return self.q[1]

    @property
    def is_identity(self) -> bool:
        return (
            self.c == (0.0, 0.0)
            and self.p == (0.0, 0.0)
            and self.q == (0.0, 0.0)
            and not any(self.radial_x)
            and not any(self.radial_y)
        )


IDENTITY = DistortionParams()


def distort_view(vx, vy, params: DistortionParams, backend=None):
    """Distort view-coordinate grids; returns ``(ox, oy)`` float64 arrays."""
    return kernels.distort_grid(vx, vy, params, backend=backend)


def distort_point(vx: float, vy: float, params: DistortionParams):
    """Scalar mirror of :func:`distort_view` for single coordinates."""
    fx = vx - params.cx
    fy = vy - params.cy
    r2 = fx * fx + fy * fy
    if r2 == 0.0:
        phix, phiy = 1.0, 0.0
    else:
        phix = fx * fx / r2
        phiy = fy * fy / r2

    def poly(coeffs) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = r2 * (c + acc)
        return acc

    d = 1.0 + (phix * poly(params.radial_x) + phiy * poly(params.radial_y))
    fp = fx * params.px + fy * params.py
    ox = fx / d + fx * fp + r2 * params.qx + params.cx
    oy = fy / d + fy * fp + r2 * params.qy + params.cy
    return ox, oy


def distorted_raymap(
    lens: LensParams, width: int, height: int, params: DistortionParams, backend=None
) -> RayMap:
    """Ray map whose view coordinates pass through the distortion first."""
    vx, vy = pixel_to_view(width, height, lens.reference_axis)
    if not params.is_identity:
        vx, vy = distort_view(vx, vy, params, backend=backend)
    gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend=backend)
    return RayMap(gx, gy, gz, valid)
