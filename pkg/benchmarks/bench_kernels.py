"""Compare the compiled and numpy kernel paths on full-frame workloads.

Runs ray generation, panorama sampling, and the two-pass chromatic blur
at HD resolution on both backends, reporting wall time per call and the
worst element difference between paths.  The first compiled call pays
JIT cost and is excluded by a warmup.

Usage: python3 benchmarks/bench_kernels.py [--size WxH] [--repeats N]
"""

import argparse
import time

import numpy as np

from pantomorph import BACKENDS, HAS_NUMBA, ChromaticParams, KVector, LensParams
from pantomorph.chromatic import spectrum_taps
from pantomorph.kernels import disperse, equirect_sample, rays_from_view
from pantomorph.mapgen import pixel_to_view


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", default="1920x1080")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    w, h = (int(p) for p in args.size.split("x"))

    lens = LensParams(KVector(0.5, -0.5, 0.0), 1.0 / 0.618)
    vx, vy = pixel_to_view(w, h)
    rng = np.random.default_rng(11)
    pano = rng.random((1024, 2048, 3))
    chroma = ChromaticParams(dispersion=0.5, samples=8)
    ts, w1 = spectrum_taps(chroma)
    base = rng.random((h, w)) * 4.0 - 2.0
    spread = rng.random((h, w)) * 2.0 - 1.0
    frame = rng.random((h, w, 3))

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if not HAS_NUMBA:
        print("numba unavailable; timing numpy only")

    results = {}
    for name in backends:
        rays_from_view(vx[:8], vy[:8], lens, backend=name)  # warmup/JIT
        t_rays, rays = timeit(lambda: rays_from_view(vx, vy, lens, backend=name), args.repeats)
        gx, gy, gz, valid = rays
        equirect_sample(gx[:8], gy[:8], gz[:8], valid[:8], pano, backend=name)
        t_eq, img = timeit(
            lambda: equirect_sample(gx, gy, gz, valid, pano, backend=name), args.repeats
        )
        disperse(frame[:8], base[:8], base[:8], spread[:8], spread[:8], ts, w1, backend=name)
        t_disp, blur = timeit(
            lambda: disperse(frame, base, base, spread, spread, ts, w1, backend=name),
            args.repeats,
        )
        results[name] = (t_rays, t_eq, t_disp, rays, img, blur)
        print(f"{name:>6}:  rays {t_rays*1e3:8.2f} ms   "
              f"equirect {t_eq*1e3:8.2f} ms   disperse {t_disp*1e3:8.2f} ms")

    if len(results) == 2:
        a, b = results["numpy"], results["numba"]
        dray = max(np.nanmax(np.abs(x - y)) for x, y in zip(a[3][:3], b[3][:3]))
        dimg = np.abs(a[4] - b[4]).max()
        dblur = np.abs(a[5] - b[5]).max()
        print(f"max |numpy - numba|:  rays {dray:.3e}   equirect {dimg:.3e}   "
              f"disperse {dblur:.3e}")
        for i, op in enumerate(("rays", "equirect", "disperse")):
            print(f"speedup {op}: {a[i] / b[i]:.1f}x")


if __name__ == "__main__":
    main()
