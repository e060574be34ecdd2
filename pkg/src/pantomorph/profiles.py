"""Lens profiles: JSON persistence, validation, and the preset registry.

A profile bundles everything needed to reproduce a look: projection
factors, reciprocal focal length, optional distortion and chromatic
blocks, the vignette flag, and free-form metadata.  Serialization is
canonical (sorted keys, two-space indent, trailing newline) so
save/load/save is byte-identical; unknown fields are rejected by name
rather than silently dropped.

The presets pair each content type with its recommended k values and
the demonstration focal length, and tag every component with the
perception qualities that projection preserves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .chromatic import ChromaticParams
from .distortion import DistortionParams
from .projection import HORIZONTAL, VERTICAL, KVector, LensParams

SCHEMA_VERSION = 1

# detent value -> projection family name
DETENT_NAMES = {
    1.0: "rectilinear",
    0.5: "stereographic",
    0.0: "equidistant",
    -0.5: "equisolid",
    -1.0: "orthographic",
}

# projection family -> perceived qualities it preserves
PERCEPTION_TAGS = {
    "rectilinear": ("straightness",),
    "stereographic": ("shape", "angle"),
    "equidistant": ("speed", "aim"),
    "equisolid": ("distance", "size"),
    "orthographic": (),
}


class ProfileError(ValueError):
    """Profile validation failure, tagged with the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


def projection_name(k: float) -> Optional[str]:
    """Family name when ``k`` sits exactly on a detent, else None."""
    return DETENT_NAMES.get(k)


def perception_tags(k: float) -> tuple:
    name = projection_name(k)
    if name is None:
        return ()
    return PERCEPTION_TAGS[name]


@dataclass
class LensProfile:
    name: str
    lens: LensParams
    distortion: Optional[DistortionParams] = None
    chromatic: Optional[ChromaticParams] = None
    vignette: bool = False
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "kx": self.lens.k.kx,
            "ky": self.lens.k.ky,
            "focal_reciprocal": self.lens.focal_reciprocal,
            "reference_axis": self.lens.reference_axis,
            "vignette": bool(self.vignette),
            "metadata": dict(self.metadata),
        }
        if self.lens.k.kz is not None:
            d["kz"] = self.lens.k.kz
        if self.distortion is not None:
            d["c"] = list(self.distortion.c)
            d["p"] = list(self.distortion.p)
            d["q"] = list(self.distortion.q)
            d["radial_x"] = list(self.distortion.radial_x)
            d["radial_y"] = list(self.distortion.radial_y)
        if self.chromatic is not None:
            d["dispersion"] = self.chromatic.dispersion
            d["samples"] = self.chromatic.samples
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "LensProfile":
        if not isinstance(data, dict):
            raise ProfileError("profile", f"expected a JSON object, got {type(data).__name__}")
        known = {
            "version", "name", "kx", "ky", "kz", "focal_reciprocal", "reference_axis",
            "c", "p", "q", "radial_x", "radial_y", "dispersion", "samples",
            "vignette", "metadata",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ProfileError(unknown[0], "unknown profile field")
        version = data.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ProfileError("version", f"unsupported schema version {version!r}")

        def number(key, default=None, required=False):
            if key not in data:
                if required:
                    raise ProfileError(key, "required field missing")
                return default
            v = data[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ProfileError(key, f"expected a number, got {v!r}")
            if not math.isfinite(v):
                raise ProfileError(key, f"must be finite, got {v!r}")
            return float(v)

        kx = number("kx", required=True)
        ky = number("ky", required=True)
        kz = number("kz")
        f_inv = number("focal_reciprocal", required=True)
        axis = data.get("reference_axis", HORIZONTAL)
        if axis not in (HORIZONTAL, VERTICAL):
            raise ProfileError("reference_axis", f"must be horizontal or vertical, got {axis!r}")
        try:
            lens = LensParams(KVector(kx, ky, kz), f_inv, axis)
        except ValueError as exc:
            raise ProfileError("lens", str(exc)) from None

        distortion = None
        dist_keys = ("c", "p", "q", "radial_x", "radial_y")
        if any(k in data for k in dist_keys):
            try:
                distortion = DistortionParams(
                    c=tuple(data.get("c", (0.0, 0.0))),
                    p=tuple(data.get("p", (0.0, 0.0))),
                    q=tuple(data.get("q", (0.0, 0.0))),
                    radial_x=tuple(data.get("radial_x", ())),
                    radial_y=tuple(data.get("radial_y", ())),
                )
            except (TypeError, ValueError) as exc:
                raise ProfileError("distortion", str(exc)) from None

        chromatic = None
        if "dispersion" in data or "samples" in data:
            samples = data.get("samples", 2)
            if isinstance(samples, bool) or not isinstance(samples, int):
                raise ProfileError("samples", f"expected an even integer >= 2, got {samples!r}")
            try:
                chromatic = ChromaticParams(number("dispersion", 0.0), samples)
            except (TypeError, ValueError) as exc:
                raise ProfileError("samples" if "even" in str(exc) else "dispersion",
                                   str(exc)) from None

        vignette = data.get("vignette", False)
        if not isinstance(vignette, bool):
            raise ProfileError("vignette", f"expected true/false, got {vignette!r}")
        metadata = data.get("metadata", {})
        if not isinstance(metadata, dict):
            raise ProfileError("metadata", f"expected an object, got {metadata!r}")
        name = data.get("name", "")
        if not isinstance(name, str):
            raise ProfileError("name", f"expected a string, got {name!r}")
        return cls(name, lens, distortion, chromatic, vignette, dict(metadata))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "LensProfile":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ProfileError("profile", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


def _k_metadata(k: KVector) -> dict:
    meta = {
        "projection_x": projection_name(k.kx),
        "projection_y": projection_name(k.ky),
        "perception_x": list(perception_tags(k.kx)),
        "perception_y": list(perception_tags(k.ky)),
    }
    if k.kz is not None:
        meta["projection_z"] = projection_name(k.kz)
        meta["perception_z"] = list(perception_tags(k.kz))
    return meta


# content type -> (k vector, demonstration focal length)
_PRESET_TABLE = (
    ("racing", (0.5, -0.5, 0.0), 0.618),
    ("flying", (-0.5, 0.0), 1.0),
    ("stereopsis", (0.0, -0.5), 0.63),
    ("first-person", (0.0, 0.75, -0.5), 0.82),
)

PRESET_NAMES = tuple(row[0] for row in _PRESET_TABLE)


def preset_registry() -> list:
    """Fresh profiles for the recommended content types, in table order."""
    out = []
    for name, kvals, focal in _PRESET_TABLE:
        k = KVector(*kvals)
        lens = LensParams.from_focal_length(k, focal, HORIZONTAL)
        meta = _k_metadata(k)
        meta["focal_length"] = focal
        out.append(LensProfile(name=name, lens=lens, vignette=True, metadata=meta))
    return out


def preset(name: str) -> LensProfile:
    for profile in preset_registry():
        if profile.name == name:
            return profile
    raise ProfileError("preset", f"unknown preset {name!r}; choices: {', '.join(PRESET_NAMES)}")
