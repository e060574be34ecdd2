"""Command-line interface.

Subcommands: ``raymap``, ``stmap``, ``remap``, ``aov``, ``preset
list|show``, ``serve``.  A lens comes either from ``--profile`` or from
``--k`` plus one of ``--fov``/``--focal``; explicit flags override
profile fields.  Exit codes: 0 success, 1 validation problem, 2 I/O
problem.  Angles are degrees on the command line, view sizes are
``WIDTHxHEIGHT`` pixels.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from pathlib import Path

from .distortion import IDENTITY, distorted_raymap
from .imgio import write_pfm, write_png
from .mapgen import raymap_to_stmap, write_raymap, write_stmap
from .chromatic import ChromaticParams
from .profiles import LensProfile, ProfileError, preset, preset_registry
from .projection import (
    HORIZONTAL,
    VERTICAL,
    KVector,
    LensDomainError,
    LensParams,
    aov_diagonal,
    aov_from_focal,
    aov_horizontal,
    aov_vertical,
    focal_from_aov,
)
from .remap import Panorama, render_projection

_AXIS_FLAG = {"h": HORIZONTAL, "v": VERTICAL}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # lets "--k -0.5,0" parse; stock argparse reads "-0.5,0" as a flag
        self._negative_number_matcher = re.compile(r"^-[0-9.,]+$")

    # keep control of exit codes; argparse would sys.exit(2) on bad flags
    def error(self, message):
        raise _UsageError(message)


def _parse_size(text: str):
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise _UsageError(f"--size expects WIDTHxHEIGHT, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--size expects integers, got {text!r}") from None
    if w < 1 or h < 1:
        raise _UsageError(f"--size needs positive dimensions, got {text!r}")
    return w, h


def _add_lens_flags(p, with_render_flags=False):
    p.add_argument("--profile", help="lens profile JSON; flags below override its fields")
    p.add_argument("--k", help="projection factors kx,ky[,kz], each in [-1,1]")
    p.add_argument("--fov", type=float, help="reference-axis angle of view, degrees")
    p.add_argument("--focal", type=float, help="focal length (view units)")
    p.add_argument("--ref-axis", choices=("h", "v"), dest="ref_axis",
                   help="axis the angle of view refers to")
    p.add_argument("--size", default="1920x1080", help="output size WIDTHxHEIGHT")
    if with_render_flags:
        p.add_argument("--vignette", action="store_true", help="apply the vignette mask")
        p.add_argument("--dispersion", type=float, help="chromatic dispersion strength")
        p.add_argument("--samples", type=int, help="spectrum taps (even, >= 2)")


def _build_profile(args) -> LensProfile:
    if args.fov is not None and args.focal is not None:
        raise _UsageError("--fov and --focal are mutually exclusive; pass exactly one")
    profile = None
    if args.profile:
        profile = LensProfile.load(args.profile)
    if profile is None and args.k is None:
        raise _UsageError("--k kx,ky[,kz] is required when no --profile is given")

    k = KVector.parse(args.k) if args.k is not None else profile.lens.k
    if args.ref_axis is not None:
        axis = _AXIS_FLAG[args.ref_axis]
    elif profile is not None:
        axis = profile.lens.reference_axis
    else:
        axis = HORIZONTAL

    if args.focal is not None:
        if not (args.focal > 0.0 and math.isfinite(args.focal)):
            raise _UsageError(f"--focal must be finite and > 0, got {args.focal!r}")
        f_inv = 1.0 / args.focal
    elif args.fov is not None:
        k_axis = k.kx if axis == HORIZONTAL else k.ky
        f_inv = focal_from_aov(math.radians(args.fov), k_axis)
    elif profile is not None:
        f_inv = profile.lens.focal_reciprocal
    else:
        raise _UsageError("one of --fov or --focal is required when no --profile is given")

    lens = LensParams(k, f_inv, axis)
    vignette = getattr(args, "vignette", False)
    dispersion = getattr(args, "dispersion", None)
    samples = getattr(args, "samples", None)
    chromatic = profile.chromatic if profile is not None else None
    if dispersion is not None or samples is not None:
        base = chromatic if chromatic is not None else ChromaticParams()
        chromatic = ChromaticParams(
            dispersion=base.dispersion if dispersion is None else dispersion,
            samples=base.samples if samples is None else samples,
        )
    return LensProfile(
        name=profile.name if profile is not None else "",
        lens=lens,
        distortion=profile.distortion if profile is not None else None,
        chromatic=chromatic,
        vignette=bool(vignette) or bool(profile.vignette if profile is not None else False),
        metadata=dict(profile.metadata) if profile is not None else {},
    )


def _require_out(args) -> Path:
    if not args.out:
        raise _UsageError("--out is required")
    path = Path(args.out)
    if path.suffix.lower() == ".exr":
        raise _UsageError("EXR output is not supported in this build; use .pfm")
    return path


def _cmd_raymap(args) -> int:
    prof = _build_profile(args)
    w, h = _parse_size(args.size)
    out = _require_out(args)
    rm = distorted_raymap(prof.lens, w, h, prof.distortion or IDENTITY)
    write_raymap(out, rm, sidecar=prof.to_dict())
    print(f"wrote {out} ({w}x{h} ray map)")
    return 0


def _cmd_stmap(args) -> int:
    prof = _build_profile(args)
    w, h = _parse_size(args.size)
    out = _require_out(args)
    rm = distorted_raymap(prof.lens, w, h, prof.distortion or IDENTITY)
    omega = aov_from_focal(prof.lens.focal_reciprocal, prof.lens.reference_k)
    st = raymap_to_stmap(rm, omega, prof.lens.reference_axis)
    write_stmap(out, st, sidecar=prof.to_dict())
    print(f"wrote {out} ({w}x{h} ST map, source AOV {math.degrees(omega):.4f} deg)")
    return 0


def _cmd_remap(args) -> int:
    prof = _build_profile(args)
    w, h = _parse_size(args.size)
    out = _require_out(args)
    pano = Panorama.from_file(args.panorama)
    img = render_projection(
        pano, prof.lens, w, h,
        distortion=prof.distortion, chromatic=prof.chromatic, vignette=prof.vignette,
    )
    if out.suffix.lower() == ".pfm":
        write_pfm(out, img[..., :3])  # PFM has no alpha channel
    else:
        write_png(out, img)
    print(f"wrote {out} ({w}x{h})")
    return 0


def _cmd_aov(args) -> int:
    prof = _build_profile(args)
    w, h = _parse_size(args.size)
    aspect = w / h
    omega_h = aov_horizontal(prof.lens, aspect)
    omega_v = aov_vertical(prof.lens, aspect)
    omega_d = aov_diagonal(prof.lens, aspect)
    for name, value in (("omega_h", omega_h), ("omega_v", omega_v), ("omega_d", omega_d)):
        print(f"{name} = {math.degrees(value):.4f} deg")
    return 0


def _cmd_preset(args) -> int:
    if args.preset_cmd == "list":
        for profile in preset_registry():
            print(profile.name)
        return 0
    profile = preset(args.name)
    sys.stdout.write(profile.to_json())
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host = os.environ.get("PANTOMORPH_HOST", "127.0.0.1")
    uvicorn.run(create_app(), host=host, port=args.port, log_level="warning")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="pantomorph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("raymap", help="write a per-pixel primary-ray map (.pfm)")
    _add_lens_flags(p)
    p.add_argument("--out", help="output path (.pfm)")
    p.set_defaults(func=_cmd_raymap)

    p = sub.add_parser("stmap", help="write an ST map addressing a rectilinear frame (.pfm)")
    _add_lens_flags(p)
    p.add_argument("--out", help="output path (.pfm)")
    p.set_defaults(func=_cmd_stmap)

    p = sub.add_parser("remap", help="render an equirectangular panorama through the lens")
    p.add_argument("panorama", help="input panorama (PNG/JPEG/PFM)")
    _add_lens_flags(p, with_render_flags=True)
    p.add_argument("--out", help="output path (.png or .pfm)")
    p.set_defaults(func=_cmd_remap)

    p = sub.add_parser("aov", help="print horizontal/vertical/diagonal angles of view")
    _add_lens_flags(p)
    p.set_defaults(func=_cmd_aov)

    p = sub.add_parser("preset", help="list or show recommended lens presets")
    psub = p.add_subparsers(dest="preset_cmd", required=True)
    psub.add_parser("list", help="preset names, one per line")
    pshow = psub.add_parser("show", help="print one preset as profile JSON")
    pshow.add_argument("name")
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("serve", help="start the HTTP preview service")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ProfileError, LensDomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
