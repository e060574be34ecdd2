"""HTTP preview service.

Endpoints (JSON unless noted):
* ``GET  /api/presets``  - profile dicts for the recommended lens presets.
* ``POST /api/panorama`` - raw image bytes in the body (PNG/JPEG/PFM);
  responds with a content-hash id.  No multipart framing, so a plain
  ``fetch(url, {body: file})`` works.
* ``POST /api/render``   - ``{panorama_id, profile, width, height}``
  where profile is a preset name or a profile object; responds PNG.
* ``GET  /api/aov``      - ``?k=kx,ky[,kz]&focal=f&axis=h|v[&aspect=a]``;
  responds ``{omega_h, omega_v, omega_d}`` in degrees.

Every client error is shaped ``{"field": ..., "message": ...}`` with a
404 (unknown id) or 422 (validation) status.  Renders are stateless;
the only state is a small lock-guarded LRU of decoded panoramas, keyed
by content hash so re-uploads are free and concurrent renders of one
panorama are safe.

When ``frontend/dist`` exists next to the package checkout it is served
at ``/`` for the interactive designer.
"""

from __future__ import annotations

import hashlib
import io
import math
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Union

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel, Field

from .imgio import parse_pfm, to_uint8
from .profiles import LensProfile, ProfileError, preset, preset_registry
from .projection import (
    HORIZONTAL,
    VERTICAL,
    KVector,
    LensDomainError,
    LensParams,
    aov_diagonal,
    aov_horizontal,
    aov_vertical,
)
from .remap import Panorama, render_projection

MAX_RENDER_EDGE = 4096
PANORAMA_SLOTS = 8


class ApiError(Exception):
    def __init__(self, field: str, message: str, status: int = 422):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
        self.status = status


class PanoramaStore:
    """Content-addressed LRU of decoded panoramas; safe for concurrent use."""

    def __init__(self, slots: int = PANORAMA_SLOTS):
        self._slots = slots
        self._lock = threading.Lock()
        self._items: "OrderedDict[str, Panorama]" = OrderedDict()

    def put(self, body: bytes) -> tuple:
        pano = _decode_panorama(body)
        pid = hashlib.sha256(body).hexdigest()[:16]
        with self._lock:
            self._items[pid] = pano
            self._items.move_to_end(pid)
            while len(self._items) > self._slots:
                self._items.popitem(last=False)
        return pid, pano

    def get(self, pid: str) -> Panorama:
        with self._lock:
            if pid not in self._items:
                raise ApiError("panorama_id", f"unknown panorama {pid!r}", status=404)
            self._items.move_to_end(pid)
            return self._items[pid]


def _decode_panorama(body: bytes) -> Panorama:
    if not body:
        raise ApiError("panorama", "empty request body")
    if body[:2] in (b"PF", b"Pf"):
        try:
            arr = parse_pfm(body, name="panorama").astype(np.float64)
        except ValueError as exc:
            raise ApiError("panorama", str(exc)) from None
        return Panorama(arr)
    try:
        with Image.open(io.BytesIO(body)) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except Exception:
        raise ApiError("panorama", "body is not a decodable PNG/JPEG/PFM image") from None
    return Panorama(arr)


class RenderRequest(BaseModel):
    panorama_id: str
    profile: Union[str, dict]
    width: int = Field(ge=1, le=MAX_RENDER_EDGE)
    height: int = Field(ge=1, le=MAX_RENDER_EDGE)


def _resolve_profile(spec: Union[str, dict]) -> LensProfile:
    try:
        if isinstance(spec, str):
            return preset(spec)
        return LensProfile.from_dict(spec)
    except ProfileError as exc:
        raise ApiError(exc.field, exc.message) from None


def _parse_axis(axis: str) -> str:
    table = {"h": HORIZONTAL, "v": VERTICAL, HORIZONTAL: HORIZONTAL, VERTICAL: VERTICAL}
    if axis not in table:
        raise ApiError("axis", f"axis must be h or v, got {axis!r}")
    return table[axis]


def _static_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


def create_app(static_dir=None) -> FastAPI:
    app = FastAPI(title="pantomorph preview service")
    store = PanoramaStore()

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"field": exc.field, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        loc = errors[0].get("loc", ()) if errors else ()
        field_name = str(loc[-1]) if loc else "request"
        message = errors[0].get("msg", "invalid request") if errors else "invalid request"
        return JSONResponse(status_code=422, content={"field": field_name, "message": message})

    @app.get("/api/presets")
    def api_presets():
        return [p.to_dict() for p in preset_registry()]

    @app.post("/api/panorama")
    async def api_panorama(request: Request):
        body = await request.body()
        pid, pano = store.put(body)
        return {"id": pid, "width": pano.width, "height": pano.height}

    @app.post("/api/render")
    def api_render(req: RenderRequest):
        pano = store.get(req.panorama_id)
        prof = _resolve_profile(req.profile)
        try:
            img = render_projection(
                pano, prof.lens, req.width, req.height,
                distortion=prof.distortion, chromatic=prof.chromatic,
                vignette=prof.vignette,
            )
        except (LensDomainError, ValueError) as exc:
            raise ApiError("profile", str(exc)) from None
        buf = io.BytesIO()
        Image.fromarray(to_uint8(img)).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/api/aov")
    def api_aov(k: str, focal: float, axis: str = "h", aspect: float = 16.0 / 9.0):
        ref = _parse_axis(axis)
        try:
            kvec = KVector.parse(k)
        except ValueError as exc:
            raise ApiError("k", str(exc)) from None
        if not (focal > 0.0 and math.isfinite(focal)):
            raise ApiError("focal", f"focal must be finite and > 0, got {focal!r}")
        if not (aspect > 0.0 and math.isfinite(aspect)):
            raise ApiError("aspect", f"aspect must be finite and > 0, got {aspect!r}")
        lens = LensParams(kvec, 1.0 / focal, ref)
        try:
            return {
                "omega_h": math.degrees(aov_horizontal(lens, aspect)),
                "omega_v": math.degrees(aov_vertical(lens, aspect)),
                "omega_d": math.degrees(aov_diagonal(lens, aspect)),
            }
        except LensDomainError as exc:
            raise ApiError("focal", str(exc)) from None

    static = Path(static_dir) if static_dir is not None else _static_dir()
    if static.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static, html=True), name="frontend")
    else:
        @app.get("/")
        def index():
            return {"service": "pantomorph", "endpoints": [
                "/api/presets", "/api/panorama", "/api/render", "/api/aov"]}

    return app
