"""Array kernels with twin implementations: compiled (numba) and plain numpy.

Every hot operation exists twice with the same per-element expression
structure, once as an ``@njit`` kernel parallelized over rows and once
vectorized in numpy.  ``BACKENDS`` maps backend name to the operation
table; both entries are importable for benchmarking even when the
compiled path is not the active one.

Backend selection:
* numba missing at import time -> numpy only.
* environment variable ``PANTOMORPH_DISABLE_NUMBA`` set to anything but
  ``"0"`` -> numpy, checked per call so tests can flip it.
* otherwise -> numba.

The compiled kernels avoid fastmath so both paths agree to ~1e-12; the
purely arithmetic ones (distortion, bilinear gather, dispersion) agree
bit for bit.

Masking convention: invalid elements are NaN (float arrays) or False
(the ``valid`` plane); samplers turn non-finite coordinates into zero
output rather than raising.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - mirror environments without numba
    HAS_NUMBA = False

_ENV_FLAG = "PANTOMORPH_DISABLE_NUMBA"


def numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "0") not in ("", "0")


def active_backend() -> str:
    """Backend used when callers do not pin one explicitly."""
    if HAS_NUMBA and not numba_disabled():
        return "numba"
    return "numpy"


def resolve_backend(backend=None) -> str:
    if backend is None:
        return active_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choices: {sorted(BACKENDS)}")
    return backend


# ---------------------------------------------------------------------------
# numpy path


def _theta_np(r, f_inv, k):
    x = r * f_inv
    if k > 0.0:
        return np.arctan(x * k) / k
    if k == 0.0:
        return x + 0.0
    a = x * k
    return np.where(a < -1.0, np.nan, np.arcsin(np.maximum(a, -1.0)) / k)


def _axis_vignette_np(theta, k):
    m = abs(k)
    if m < 0.5:
        m = 0.5
    return np.abs(np.cos(m * theta)) ** ((k + 3.0) / 2.0)


def _rays_np(vx, vy, kx, ky, kz, has_kz, f_inv):
    with np.errstate(invalid="ignore"):
        r2 = vx * vx + vy * vy
        r = np.sqrt(r2)
        on_axis = r2 == 0.0
        safe_r2 = np.where(on_axis, 1.0, r2)
        safe_r = np.where(on_axis, 1.0, r)
        wx = np.where(on_axis, 1.0, vx * vx / safe_r2)
        wy = np.where(on_axis, 0.0, vy * vy / safe_r2)
        tx = _theta_np(r, f_inv, kx)
        if has_kz:
            ty = np.where(vy < 0.0, _theta_np(r, f_inv, kz), _theta_np(r, f_inv, ky))
        else:
            ty = _theta_np(r, f_inv, ky)
        tp = np.where(wx > 0.0, wx * tx, 0.0) + np.where(wy > 0.0, wy * ty, 0.0)
        valid = ~np.isnan(tp) & (tp <= math.pi)
        s = np.sin(tp)
        gx = np.where(valid, s * (vx / safe_r), np.nan)
        gy = np.where(valid, s * (vy / safe_r), np.nan)
        gz = np.where(valid, np.cos(tp), np.nan)
    return gx, gy, gz, valid


def _vignette_np(vx, vy, kx, ky, kz, has_kz, f_inv):
    with np.errstate(invalid="ignore"):
        r2 = vx * vx + vy * vy
        r = np.sqrt(r2)
        on_axis = r2 == 0.0
        safe_r2 = np.where(on_axis, 1.0, r2)
        wx = np.where(on_axis, 1.0, vx * vx / safe_r2)
        wy = np.where(on_axis, 0.0, vy * vy / safe_r2)
        tx = _theta_np(r, f_inv, kx)
        lx = _axis_vignette_np(tx, kx)
        if has_kz:
            ty_top = _theta_np(r, f_inv, ky)
            ty_bot = _theta_np(r, f_inv, kz)
            ty = np.where(vy < 0.0, ty_bot, ty_top)
            ly = np.where(vy < 0.0, _axis_vignette_np(ty_bot, kz), _axis_vignette_np(ty_top, ky))
        else:
            ty = _theta_np(r, f_inv, ky)
            ly = _axis_vignette_np(ty, ky)
        tp = np.where(wx > 0.0, wx * tx, 0.0) + np.where(wy > 0.0, wy * ty, 0.0)
        acc = np.where(wx > 0.0, wx * lx, 0.0) + np.where(wy > 0.0, wy * ly, 0.0)
        out = np.where(np.isnan(tp) | (tp > math.pi), 0.0, acc)
    return out


def _radial_poly_np(r2, coeffs):
    acc = np.zeros_like(r2)
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = r2 * (coeffs[i] + acc)
    return acc


def _distort_np(vx, vy, cx, cy, px, py, qx, qy, rad_x, rad_y):
    fx = vx - cx
    fy = vy - cy
    r2 = fx * fx + fy * fy
    on_axis = r2 == 0.0
    safe_r2 = np.where(on_axis, 1.0, r2)
    phix = np.where(on_axis, 1.0, fx * fx / safe_r2)
    phiy = np.where(on_axis, 0.0, fy * fy / safe_r2)
    d = 1.0 + (phix * _radial_poly_np(r2, rad_x) + phiy * _radial_poly_np(r2, rad_y))
    fp = fx * px + fy * py
    ox = fx / d + fx * fp + r2 * qx + cx
    oy = fy / d + fy * fp + r2 * qy + cy
    return ox, oy


def _equirect_np(gx, gy, gz, valid, pano):
    ph, pw, _ = pano.shape
    with np.errstate(invalid="ignore"):
        lon = np.arctan2(np.where(valid, gx, 0.0), np.where(valid, gz, 1.0))
        lat = np.arcsin(np.clip(np.where(valid, gy, 0.0), -1.0, 1.0))
        x = (0.5 + lon / math.tau) * pw - 0.5
        y = (0.5 - lat / math.pi) * ph - 0.5
    x0f = np.floor(x)
    y0f = np.floor(y)
    bx = x - x0f
    by = y - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)
    x0w = np.mod(x0, pw)
    x1w = np.mod(x0 + 1, pw)
    y0c = np.clip(y0, 0, ph - 1)
    y1c = np.clip(y0 + 1, 0, ph - 1)
    w00 = (1.0 - bx) * (1.0 - by)
    w10 = bx * (1.0 - by)
    w01 = (1.0 - bx) * by
    w11 = bx * by
    out = (
        pano[y0c, x0w] * w00[..., None]
        + pano[y0c, x1w] * w10[..., None]
        + pano[y1c, x0w] * w01[..., None]
        + pano[y1c, x1w] * w11[..., None]
    )
    return out * valid[..., None]


def _gather_np(img, x, y):
    ih, iw, _ = img.shape
    finite = np.isfinite(x) & np.isfinite(y)
    xs = np.where(finite, x, 0.0)
    ys = np.where(finite, y, 0.0)
    x0f = np.floor(xs)
    y0f = np.floor(ys)
    bx = xs - x0f
    by = ys - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)
    x0c = np.clip(x0, 0, iw - 1)
    x1c = np.clip(x0 + 1, 0, iw - 1)
    y0c = np.clip(y0, 0, ih - 1)
    y1c = np.clip(y0 + 1, 0, ih - 1)
    w00 = (1.0 - bx) * (1.0 - by)
    w10 = bx * (1.0 - by)
    w01 = (1.0 - bx) * by
    w11 = bx * by
    out = (
        img[y0c, x0c] * w00[..., None]
        + img[y0c, x1c] * w10[..., None]
        + img[y1c, x0c] * w01[..., None]
        + img[y1c, x1c] * w11[..., None]
    )
    return out * finite[..., None]


def _disperse_np(img, base_x, base_y, spread_x, spread_y, ts, weights):
    ih, iw, nc = img.shape
    col = np.arange(iw, dtype=np.float64)[None, :]
    row = np.arange(ih, dtype=np.float64)[:, None]
    out = np.zeros_like(img)
    for i in range(ts.shape[0]):
        t = ts[i]
        x = col + base_x + (t - 0.5) * spread_x
        y = row + base_y + (t - 0.5) * spread_y
        out += _gather_np(img, x, y) * weights[i]
    return out


BACKENDS = {
    "numpy": {
        "rays": _rays_np,
        "vignette": _vignette_np,
        "distort": _distort_np,
        "equirect": _equirect_np,
        "gather": _gather_np,
        "disperse": _disperse_np,
    }
}


# ---------------------------------------------------------------------------
# numba path

if HAS_NUMBA:

    @njit(cache=True)
    def _theta_nb(r, f_inv, k):
        x = r * f_inv
        if k > 0.0:
            return math.atan(x * k) / k
        if k == 0.0:
            return x + 0.0
        a = x * k
        if a < -1.0:
            return np.nan
        return math.asin(a) / k

    @njit(cache=True)
    def _axis_vignette_nb(theta, k):
        m = abs(k)
        if m < 0.5:
            m = 0.5
        return abs(math.cos(m * theta)) ** ((k + 3.0) / 2.0)

    @njit(cache=True, parallel=True)
    def _rays_nb(vx, vy, kx, ky, kz, has_kz, f_inv):
        nh, nw = vx.shape
        gx = np.empty((nh, nw))
        gy = np.empty((nh, nw))
        gz = np.empty((nh, nw))
        valid = np.empty((nh, nw), dtype=np.bool_)
        for j in prange(nh):
            for i in range(nw):
                x = vx[j, i]
                y = vy[j, i]
                r2 = x * x + y * y
                r = math.sqrt(r2)
                if r2 == 0.0:
                    safe_r = 1.0
                    wx = 1.0
                    wy = 0.0
                else:
                    safe_r = r
                    wx = x * x / r2
                    wy = y * y / r2
                tp = 0.0
                ok = True
                if wx > 0.0:
                    t = _theta_nb(r, f_inv, kx)
                    if math.isnan(t):
                        ok = False
                    else:
                        tp = tp + wx * t
                if ok and wy > 0.0:
                    if has_kz and y < 0.0:
                        t = _theta_nb(r, f_inv, kz)
                    else:
                        t = _theta_nb(r, f_inv, ky)
                    if math.isnan(t):
                        ok = False
                    else:
                        tp = tp + wy * t
                if ok and tp <= math.pi:
                    s = math.sin(tp)
                    gx[j, i] = s * (x / safe_r)
                    gy[j, i] = s * (y / safe_r)
                    gz[j, i] = math.cos(tp)
                    valid[j, i] = True
                else:
                    gx[j, i] = np.nan
                    gy[j, i] = np.nan
                    gz[j, i] = np.nan
                    valid[j, i] = False
        return gx, gy, gz, valid

    @njit(cache=True, parallel=True)
    def _vignette_nb(vx, vy, kx, ky, kz, has_kz, f_inv):
        nh, nw = vx.shape
        out = np.empty((nh, nw))
        for j in prange(nh):
            for i in range(nw):
                x = vx[j, i]
                y = vy[j, i]
                r2 = x * x + y * y
                r = math.sqrt(r2)
                if r2 == 0.0:
                    wx = 1.0
                    wy = 0.0
                else:
                    wx = x * x / r2
                    wy = y * y / r2
                tp = 0.0
                acc = 0.0
                ok = True
                if wx > 0.0:
                    t = _theta_nb(r, f_inv, kx)
                    if math.isnan(t):
                        ok = False
                    else:
                        tp = tp + wx * t
                        acc = acc + wx * _axis_vignette_nb(t, kx)
                if ok and wy > 0.0:
                    if has_kz and y < 0.0:
                        keff = kz
                    else:
                        keff = ky
                    t = _theta_nb(r, f_inv, keff)
                    if math.isnan(t):
                        ok = False
                    else:
                        tp = tp + wy * t
                        acc = acc + wy * _axis_vignette_nb(t, keff)
                if ok and tp <= math.pi:
                    out[j, i] = acc
                else:
                    out[j, i] = 0.0
        return out

    @njit(cache=True)
    def _radial_poly_nb(r2, coeffs):
        acc = 0.0
        for i in range(coeffs.shape[0] - 1, -1, -1):
            acc = r2 * (coeffs[i] + acc)
        return acc

    @njit(cache=True, parallel=True)
    def _distort_nb(vx, vy, cx, cy, px, py, qx, qy, rad_x, rad_y):
        nh, nw = vx.shape
        ox = np.empty((nh, nw))
        oy = np.empty((nh, nw))
        for j in prange(nh):
            for i in range(nw):
                fx = vx[j, i] - cx
                fy = vy[j, i] - cy
                r2 = fx * fx + fy * fy
                if r2 == 0.0:
                    phix = 1.0
                    phiy = 0.0
                else:
                    phix = fx * fx / r2
                    phiy = fy * fy / r2
                d = 1.0 + (phix * _radial_poly_nb(r2, rad_x) + phiy * _radial_poly_nb(r2, rad_y))
                fp = fx * px + fy * py
                ox[j, i] = fx / d + fx * fp + r2 * qx + cx
                oy[j, i] = fy / d + fy * fp + r2 * qy + cy
        return ox, oy

    @njit(cache=True, parallel=True)
    def _equirect_nb(gx, gy, gz, valid, pano):
        ph, pw, nc = pano.shape
        nh, nw = gx.shape
        out = np.zeros((nh, nw, nc))
        for j in prange(nh):
            for i in range(nw):
                if not valid[j, i]:
                    continue
                g1 = gy[j, i]
                if g1 > 1.0:
                    g1 = 1.0
                elif g1 < -1.0:
                    g1 = -1.0
                lon = math.atan2(gx[j, i], gz[j, i])
                lat = math.asin(g1)
                x = (0.5 + lon / math.tau) * pw - 0.5
                y = (0.5 - lat / math.pi) * ph - 0.5
                x0f = math.floor(x)
                y0f = math.floor(y)
                bx = x - x0f
                by = y - y0f
                x0 = int(x0f)
                y0 = int(y0f)
                x0w = x0 % pw
                x1w = (x0 + 1) % pw
                y0c = min(max(y0, 0), ph - 1)
                y1c = min(max(y0 + 1, 0), ph - 1)
                w00 = (1.0 - bx) * (1.0 - by)
                w10 = bx * (1.0 - by)
                w01 = (1.0 - bx) * by
                w11 = bx * by
                for c in range(nc):
                    out[j, i, c] = (
                        pano[y0c, x0w, c] * w00
                        + pano[y0c, x1w, c] * w10
                        + pano[y1c, x0w, c] * w01
                        + pano[y1c, x1w, c] * w11
                    )
        return out

    @njit(cache=True, parallel=True)
    def _gather_nb(img, x, y):
        ih, iw, nc = img.shape
        nh, nw = x.shape
        out = np.zeros((nh, nw, nc))
        for j in prange(nh):
            for i in range(nw):
                xs = x[j, i]
                ys = y[j, i]
                if not (math.isfinite(xs) and math.isfinite(ys)):
                    continue
                x0f = math.floor(xs)
                y0f = math.floor(ys)
                bx = xs - x0f
                by = ys - y0f
                x0 = int(x0f)
                y0 = int(y0f)
                x0c = min(max(x0, 0), iw - 1)
                x1c = min(max(x0 + 1, 0), iw - 1)
                y0c = min(max(y0, 0), ih - 1)
                y1c = min(max(y0 + 1, 0), ih - 1)
                w00 = (1.0 - bx) * (1.0 - by)
                w10 = bx * (1.0 - by)
                w01 = (1.0 - bx) * by
                w11 = bx * by
                for c in range(nc):
                    out[j, i, c] = (
                        img[y0c, x0c, c] * w00
                        + img[y0c, x1c, c] * w10
                        + img[y1c, x0c, c] * w01
                        + img[y1c, x1c, c] * w11
                    )
        return out

    @njit(cache=True, parallel=True)
    def _disperse_nb(img, base_x, base_y, spread_x, spread_y, ts, weights):
        ih, iw, nc = img.shape
        n = ts.shape[0]
        out = np.zeros((ih, iw, nc))
        for j in prange(ih):
            for i in range(iw):
                bxp = base_x[j, i]
                byp = base_y[j, i]
                sxp = spread_x[j, i]
                syp = spread_y[j, i]
                for s in range(n):
                    t = ts[s]
                    xs = i + bxp + (t - 0.5) * sxp
                    ys = j + byp + (t - 0.5) * syp
                    if not (math.isfinite(xs) and math.isfinite(ys)):
                        continue
                    x0f = math.floor(xs)
                    y0f = math.floor(ys)
                    bx = xs - x0f
                    by = ys - y0f
                    x0 = int(x0f)
                    y0 = int(y0f)
                    x0c = min(max(x0, 0), iw - 1)
                    x1c = min(max(x0 + 1, 0), iw - 1)
                    y0c = min(max(y0, 0), ih - 1)
                    y1c = min(max(y0 + 1, 0), ih - 1)
                    w00 = (1.0 - bx) * (1.0 - by)
                    w10 = bx * (1.0 - by)
                    w01 = (1.0 - bx) * by
                    w11 = bx * by
                    for c in range(nc):
                        out[j, i, c] += (
                            img[y0c, x0c, c] * w00
                            + img[y0c, x1c, c] * w10
                            + img[y1c, x0c, c] * w01
                            + img[y1c, x1c, c] * w11
                        ) * weights[s, c]
        return out

    BACKENDS["numba"] = {
        "rays": _rays_nb,
        "vignette": _vignette_nb,
        "distort": _distort_nb,
        "equirect": _equirect_nb,
        "gather": _gather_nb,
        "disperse": _disperse_nb,
    }


# ---------------------------------------------------------------------------
# public wrappers


def _as_grid(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def rays_from_view(vx, vy, lens, backend=None):
    """Primary-ray planes ``(gx, gy, gz, valid)`` for view-coordinate grids."""
    name = resolve_backend(backend)
    k = lens.k
    kz = k.ky if k.kz is None else k.kz
    return BACKENDS[name]["rays"](
        _as_grid(vx), _as_grid(vy), k.kx, k.ky, kz, k.kz is not None, lens.focal_reciprocal
    )


def vignette_grid(vx, vy, lens, backend=None):
    """Vignette mask in [0, 1] for view-coordinate grids; 0 where invalid."""
    name = resolve_backend(backend)
    k = lens.k
    kz = k.ky if k.kz is None else k.kz
    return BACKENDS[name]["vignette"](
        _as_grid(vx), _as_grid(vy), k.kx, k.ky, kz, k.kz is not None, lens.focal_reciprocal
    )


def distort_grid(vx, vy, params, backend=None):
    """Apply lens distortion to view-coordinate grids; returns ``(ox, oy)``."""
    name = resolve_backend(backend)
    return BACKENDS[name]["distort"](
        _as_grid(vx),
        _as_grid(vy),
        params.cx,
        params.cy,
        params.px,
        params.py,
        params.qx,
        params.qy,
        np.ascontiguousarray(params.radial_x, dtype=np.float64),
        np.ascontiguousarray(params.radial_y, dtype=np.float64),
    )


def equirect_sample(gx, gy, gz, valid, pano, backend=None):
    """Sample an equirectangular image along ray planes (bilinear, lon wrap)."""
    name = resolve_backend(backend)
    return BACKENDS[name]["equirect"](
        _as_grid(gx),
        _as_grid(gy),
        _as_grid(gz),
        np.ascontiguousarray(valid, dtype=np.bool_),
        np.ascontiguousarray(pano, dtype=np.float64),
    )


def gather_bilinear(img, x, y, backend=None):
    """Bilinear sample of ``img`` at pixel positions; non-finite -> zero."""
    name = resolve_backend(backend)
    return BACKENDS[name]["gather"](
        np.ascontiguousarray(img, dtype=np.float64), _as_grid(x), _as_grid(y)
    )


def disperse(img, base_x, base_y, spread_x, spread_y, ts, weights, backend=None):
    """Weighted sum of shifted bilinear taps.

    Tap ``s`` samples at ``pixel + base + (ts[s] - 1/2) * spread`` and is
    scaled per channel by ``weights[s]``; used for both blur passes of
    the chromatic pipeline.
    """
    name = resolve_backend(backend)
    return BACKENDS[name]["disperse"](
        np.ascontiguousarray(img, dtype=np.float64),
        _as_grid(base_x),
        _as_grid(base_y),
        _as_grid(spread_x),
        _as_grid(spread_y),
        np.ascontiguousarray(ts, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
    )
