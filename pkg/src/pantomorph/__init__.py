"""Anamorphic azimuthal lens toolkit.

Generates primary-ray maps, ST maps, vignettes, lens distortion with
chromatic fringing, and panorama renders from a compact parametric lens
model: one azimuthal projection factor per power axis (plus an optional
bottom-half override), blended by view azimuth, sharing a single focal
length.
"""

from .chromatic import ChromaticParams, chromatic_distort, dispersion_fringe, spectrum, spectrum_fast
from .distortion import DistortionParams, distort_point, distort_view, distorted_raymap
from .kernels import BACKENDS, HAS_NUMBA, active_backend
from .mapgen import (
    RayMap,
    STMap,
    apply_stmap,
    generate_raymap,
    pixel_to_view,
    raymap_to_stmap,
    read_raymap,
    read_stmap,
    write_raymap,
    write_stmap,
)
from .profiles import (
    PRESET_NAMES,
    LensProfile,
    ProfileError,
    perception_tags,
    preset,
    preset_registry,
    projection_name,
)
from .projection import (
    HORIZONTAL,
    VERTICAL,
    IncidentRay,
    KVector,
    LensDomainError,
    LensParams,
    aov_diagonal,
    aov_from_focal,
    aov_horizontal,
    aov_vertical,
    azimuthal_theta,
    focal_from_aov,
    incident_angle,
    lerp_k,
    max_aov,
    phi_weights,
    primary_ray,
    vignette,
)
from .remap import Panorama, render_projection, sample_equirect

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "HAS_NUMBA",
    "HORIZONTAL",
    "VERTICAL",
    "ChromaticParams",
    "DistortionParams",
    "IncidentRay",
    "KVector",
    "LensDomainError",
    "LensParams",
    "LensProfile",
    "PRESET_NAMES",
    "Panorama",
    "ProfileError",
    "RayMap",
    "STMap",
    "active_backend",
    "aov_diagonal",
    "aov_from_focal",
    "aov_horizontal",
    "aov_vertical",
    "apply_stmap",
    "azimuthal_theta",
    "chromatic_distort",
    "dispersion_fringe",
    "distort_point",
    "distort_view",
    "distorted_raymap",
    "focal_from_aov",
    "generate_raymap",
    "incident_angle",
    "lerp_k",
    "max_aov",
    "perception_tags",
    "phi_weights",
    "pixel_to_view",
    "preset",
    "projection_name",
    "preset_registry",
    "primary_ray",
    "raymap_to_stmap",
    "read_raymap",
    "read_stmap",
    "render_projection",
    "sample_equirect",
    "spectrum",
    "spectrum_fast",
    "vignette",
    "write_raymap",
    "write_stmap",
]
