"""Scalar math for the anamorphic azimuthal projection model.

Coordinate conventions
----------------------
* Left-handed camera space: +x right, +y up, +z along the optical axis
  into the scene.
* View coordinates ``(vx, vy)`` are centered on the optical axis and
  normalized so the reference axis (the one whose angle of view fixed the
  focal length) spans [-1, 1] at the frame edge.  The other axis spans
  +/- its physical extent relative to the reference axis.
* Angles are radians throughout the library; the CLI and HTTP layers
  convert to degrees.

Each power axis carries an azimuthal projection factor ``k`` in [-1, 1]:
1 is rectilinear (gnomonic), 1/2 stereographic, 0 equidistant, -1/2
equisolid, -1 orthographic.  A pixel's incident angle is the
azimuth-weighted blend of the two per-axis angles, so the projection
preserves each pixel's azimuth and modulates only its radius on the
visual sphere.  An optional third factor ``kz`` overrides ``ky`` on the
bottom half of the frame (``vy < 0``), producing an asymmetric
projection.

Out-of-field coordinates (arcsine branch exceeded, or a blended angle
beyond pi) yield *invalid* results - NaN angles or rays with
``valid=False`` - never exceptions.  Callers mask them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
_AXES = (HORIZONTAL, VERTICAL)

_INVALID = float("nan")


class LensDomainError(ValueError):
    """A requested angle or focal length is outside the projection's reach."""


def _check_unit_interval(name: str, value: float) -> None:
    if not (-1.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name} must lie in [-1, 1], got {value!r}")


@dataclass(frozen=True)
class KVector:
    """Power-axis projection factors; ``kz`` overrides ``ky`` for ``vy < 0``."""

    kx: float
    ky: float
    kz: Optional[float] = None

    def __post_init__(self) -> None:
        _check_unit_interval("kx", self.kx)
        _check_unit_interval("ky", self.ky)
        if self.kz is not None:
            _check_unit_interval("kz", self.kz)

    @property
    def is_symmetric(self) -> bool:
        return self.kz is None

    def as_tuple(self) -> tuple:
        if self.kz is None:
            return (self.kx, self.ky)
        return (self.kx, self.ky, self.kz)

    @classmethod
    def parse(cls, text: str) -> "KVector":
        """Parse ``"kx,ky"`` or ``"kx,ky,kz"`` (as used by the CLI)."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (2, 3):
            raise ValueError(f"expected 2 or 3 comma-separated k values, got {text!r}")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"k components must be numeric, got {text!r}") from None
        return cls(*values)


@dataclass(frozen=True)
class LensParams:
    """Projection factors plus the shared reciprocal focal length.

    A single focal length serves both power axes, so only one reference
    angle of view (horizontal or vertical) can be chosen; the other axis'
    angle follows from the focal length.
    """

    k: KVector
    focal_reciprocal: float
    reference_axis: str = HORIZONTAL

    def __post_init__(self) -> None:
        if not (self.focal_reciprocal > 0.0 and math.isfinite(self.focal_reciprocal)):
            raise ValueError(
                f"focal_reciprocal must be finite and > 0, got {self.focal_reciprocal!r}"
            )
        if self.reference_axis not in _AXES:
            raise ValueError(
                f"reference_axis must be one of {_AXES}, got {self.reference_axis!r}"
            )

    @property
    def focal_length(self) -> float:
        return 1.0 / self.focal_reciprocal

    @property
    def reference_k(self) -> float:
        return self.k.kx if self.reference_axis == HORIZONTAL else self.k.ky

    @classmethod
    def from_aov(cls, k: KVector, omega: float, reference_axis: str = HORIZONTAL) -> "LensParams":
        """Build lens parameters from a reference-axis angle of view (radians)."""
        if reference_axis not in _AXES:
            raise ValueError(f"reference_axis must be one of {_AXES}, got {reference_axis!r}")
        k_axis = k.kx if reference_axis == HORIZONTAL else k.ky
        return cls(k, focal_from_aov(omega, k_axis), reference_axis)

    @classmethod
    def from_focal_length(
        cls, k: KVector, focal_length: float, reference_axis: str = HORIZONTAL
    ) -> "LensParams":
        if not (focal_length > 0.0 and math.isfinite(focal_length)):
            raise ValueError(f"focal_length must be finite and > 0, got {focal_length!r}")
        return cls(k, 1.0 / focal_length, reference_axis)


@dataclass(frozen=True)
class IncidentRay:
    """Unit primary ray for one view coordinate; ``valid=False`` means masked."""

    gx: float
    gy: float
    gz: float
    valid: bool

    def as_tuple(self) -> tuple:
        return (self.gx, self.gy, self.gz)


INVALID_RAY = IncidentRay(_INVALID, _INVALID, _INVALID, False)


def azimuthal_theta(r: float, f_inv: float, k: float) -> float:
    """Incident angle of one power axis at view radius ``r``.

    Three branches joined continuously at k=0: arctangent for k>0, linear
    for k=0, arcsine for k<0.  Returns NaN when the arcsine argument
    leaves [-1, 0] - the pixel lies beyond the maximum field of that
    projection - so the caller can mask it.
    """
    if r < 0.0:
        raise ValueError(f"radius must be >= 0, got {r!r}")
    x = r * f_inv
    if k > 0.0:
        return math.atan(x * k) / k
    if k == 0.0:
        return x
    a = x * k
    if a < -1.0:
        return _INVALID
    return math.asin(a) / k


def phi_weights(vx: float, vy: float) -> tuple:
    """Anamorphic interpolation weights (cos^2, sin^2 of the view azimuth).

    The pair always sums to 1.  The origin is degenerate (any split is
    equivalent there since both axis angles vanish); returns (1, 0) by
    convention.
    """
    d = vx * vx + vy * vy
    if d == 0.0:
        return (1.0, 0.0)
    return (vx * vx / d, vy * vy / d)


def select_ky(k: KVector, vy: float) -> float:
    """Effective y-axis factor: ``kz`` on the bottom half when present."""
    if k.kz is not None and vy < 0.0:
        return k.kz
    return k.ky


def incident_angle(vx: float, vy: float, lens: LensParams) -> float:
    """Blended incident angle theta' at a view coordinate; NaN when invalid.

    Axes with exactly zero weight contribute nothing even if their own
    angle is undefined, which keeps the frame axes clean of NaN leakage.
    """
    r = math.sqrt(vx * vx + vy * vy)
    if r == 0.0:
        return 0.0
    wx, wy = phi_weights(vx, vy)
    f_inv = lens.focal_reciprocal
    acc = 0.0
    if wx > 0.0:
        tx = azimuthal_theta(r, f_inv, lens.k.kx)
        if math.isnan(tx):
            return _INVALID
        acc += wx * tx
    if wy > 0.0:
        ty = azimuthal_theta(r, f_inv, select_ky(lens.k, vy))
        if math.isnan(ty):
            return _INVALID
        acc += wy * ty
    return acc


def primary_ray(vx: float, vy: float, lens: LensParams) -> IncidentRay:
    """Unit primary ray for a view coordinate.

    The ray keeps the view azimuth and tilts away from the optical axis
    by the blended incident angle.  Coordinates whose blended angle is
    undefined or exceeds pi (behind the visual sphere's far pole) come
    back invalid.
    """
    r = math.sqrt(vx * vx + vy * vy)
    if r == 0.0:
        return IncidentRay(0.0, 0.0, 1.0, True)
    tp = incident_angle(vx, vy, lens)
    if math.isnan(tp) or tp > math.pi:
        return INVALID_RAY
    s = math.sin(tp)
    return IncidentRay(s * (vx / r), s * (vy / r), math.cos(tp), True)


def max_aov(k: float) -> float:
    """Largest achievable angle of view for one power axis.

    Exclusive bound for k>0 (the tangent pole), inclusive otherwise.
    """
    if k > 0.0:
        return math.pi / k
    if k == 0.0:
        return math.tau
    return math.pi / -k


def focal_from_aov(omega: float, k_axis: float) -> float:
    """Reciprocal focal length that yields ``omega`` on an axis with ``k_axis``."""
    if not (omega > 0.0 and math.isfinite(omega)):
        raise LensDomainError(f"angle of view must be finite and > 0, got {omega!r}")
    limit = max_aov(k_axis)
    if k_axis > 0.0:
        if omega >= limit:
            raise LensDomainError(
                f"angle of view {math.degrees(omega):.4g} deg is unreachable for "
                f"k={k_axis:g}; it must stay below {math.degrees(limit):.4g} deg"
            )
        return math.tan(omega / 2.0 * k_axis) / k_axis
    if omega > limit:
        raise LensDomainError(
            f"angle of view {math.degrees(omega):.4g} deg is unreachable for "
            f"k={k_axis:g}; the maximum is {math.degrees(limit):.4g} deg"
        )
    if k_axis == 0.0:
        return omega / 2.0
    return math.sin(omega / 2.0 * k_axis) / k_axis


def aov_from_focal(f_inv: float, k_axis: float) -> float:
    """Angle of view of one power axis given the reciprocal focal length.

    Exact inverse of :func:`focal_from_aov` on its valid domain.
    """
    if not (f_inv > 0.0 and math.isfinite(f_inv)):
        raise LensDomainError(f"focal_reciprocal must be finite and > 0, got {f_inv!r}")
    if k_axis > 0.0:
        return 2.0 * math.atan(k_axis * f_inv) / k_axis
    if k_axis == 0.0:
        return 2.0 * f_inv
    a = k_axis * f_inv
    if a < -1.0:
        raise LensDomainError(
            f"focal length too short for k={k_axis:g}: requires f >= {-k_axis:g}"
        )
    return 2.0 * math.asin(a) / k_axis


def _edge_angle(r: float, f_inv: float, k: float, where: str) -> float:
    t = azimuthal_theta(r, f_inv, k)
    if math.isnan(t):
        raise LensDomainError(
            f"{where} frame edge lies beyond the maximum field for k={k:g} "
            f"(axis limit {math.degrees(max_aov(k)):.4g} deg)"
        )
    return t


def _check_aspect(aspect: float) -> None:
    if not (aspect > 0.0 and math.isfinite(aspect)):
        raise ValueError(f"aspect must be finite and > 0, got {aspect!r}")


def aov_horizontal(lens: LensParams, aspect: float) -> float:
    """Horizontal angle of view for a width/height ratio of ``aspect``."""
    _check_aspect(aspect)
    if lens.reference_axis == HORIZONTAL:
        return aov_from_focal(lens.focal_reciprocal, lens.k.kx)
    return 2.0 * _edge_angle(aspect, lens.focal_reciprocal, lens.k.kx, "horizontal")


def aov_vertical(lens: LensParams, aspect: float) -> float:
    """Vertical angle of view; asymmetric lenses sum unequal half-angles."""
    _check_aspect(aspect)
    ey = 1.0 if lens.reference_axis == VERTICAL else 1.0 / aspect
    f_inv = lens.focal_reciprocal
    top = _edge_angle(ey, f_inv, lens.k.ky, "top")
    if lens.k.kz is None:
        return 2.0 * top
    return top + _edge_angle(ey, f_inv, lens.k.kz, "bottom")


def aov_diagonal(lens: LensParams, aspect: float) -> float:
    """Diagonal angle of view: twice the blended angle at the frame corner.

    ``aspect`` is width/height.  Asymmetric lenses use the top corner
    (``vy > 0``, i.e. the ``ky`` half).
    """
    if not (aspect > 0.0 and math.isfinite(aspect)):
        raise ValueError(f"aspect must be finite and > 0, got {aspect!r}")
    if lens.reference_axis == HORIZONTAL:
        cx, cy = 1.0, 1.0 / aspect
    else:
        cx, cy = aspect, 1.0
    tp = incident_angle(cx, cy, lens)
    if math.isnan(tp) or tp > math.pi:
        raise LensDomainError(
            "frame corner lies beyond the projection's maximum field; "
            "no diagonal angle of view exists for this lens/aspect"
        )
    return 2.0 * tp


def axis_vignette(theta: float, k: float) -> float:
    """Single-axis vignette mask for an incident angle.

    Interpolates between the cosine law of illumination (k=-1, power 1)
    and the inverse-square law (k=1, power 2); the angle scale pins the
    falloff boundary to the axis' maximum field.
    """
    return abs(math.cos(max(abs(k), 0.5) * theta)) ** ((k + 3.0) / 2.0)


def vignette(vx: float, vy: float, lens: LensParams) -> float:
    """Anamorphic vignette mask in [0, 1]; 0 outside the valid field."""
    r = math.sqrt(vx * vx + vy * vy)
    if r == 0.0:
        return 1.0
    wx, wy = phi_weights(vx, vy)
    f_inv = lens.focal_reciprocal
    acc = 0.0
    blend = 0.0
    if wx > 0.0:
        tx = azimuthal_theta(r, f_inv, lens.k.kx)
        if math.isnan(tx):
            return 0.0
        acc += wx * axis_vignette(tx, lens.k.kx)
        blend += wx * tx
    if wy > 0.0:
        ky = select_ky(lens.k, vy)
        ty = azimuthal_theta(r, f_inv, ky)
        if math.isnan(ty):
            return 0.0
        acc += wy * axis_vignette(ty, ky)
        blend += wy * ty
    if blend > math.pi:
        return 0.0
    return acc


def lerp_k(a: KVector, b: KVector, t: float) -> KVector:
    """Componentwise blend of two k-vectors, clamped to [-1, 1].

    A missing ``kz`` stands for ``ky`` (a symmetric lens); the result
    carries ``kz`` only if either endpoint was asymmetric.
    """
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t!r}")

    def mix(x: float, y: float) -> float:
        return min(1.0, max(-1.0, (1.0 - t) * x + t * y))

    kx = mix(a.kx, b.kx)
    ky = mix(a.ky, b.ky)
    if a.kz is None and b.kz is None:
        return KVector(kx, ky)
    az = a.ky if a.kz is None else a.kz
    bz = b.ky if b.kz is None else b.kz
    return KVector(kx, ky, mix(az, bz))
