import math

import numpy as np
import pytest

from pantomorph import DistortionParams, KVector, LensParams
from pantomorph import kernels
from pantomorph.mapgen import pixel_to_view

BOTH = sorted(kernels.BACKENDS)
needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba unavailable")


@pytest.fixture(scope="module")
def grids():
    vx, vy = pixel_to_view(96, 54)
    return vx, vy


@pytest.fixture(scope="module")
def lens():
    return LensParams(KVector(0.5, -0.5, 0.0), 1.0 / 0.618)


class TestBackendSelection:
    def test_both_paths_registered(self):
        assert "numpy" in kernels.BACKENDS
        if kernels.HAS_NUMBA:
            assert "numba" in kernels.BACKENDS
            assert set(kernels.BACKENDS["numba"]) == set(kernels.BACKENDS["numpy"])

    def test_env_flag_switches_active_path(self, monkeypatch):
        monkeypatch.setenv("PANTOMORPH_DISABLE_NUMBA", "1")
        assert kernels.active_backend() == "numpy"
        monkeypatch.setenv("PANTOMORPH_DISABLE_NUMBA", "0")
        assert kernels.active_backend() == ("numba" if kernels.HAS_NUMBA else "numpy")
        monkeypatch.delenv("PANTOMORPH_DISABLE_NUMBA")
        assert kernels.active_backend() == ("numba" if kernels.HAS_NUMBA else "numpy")

    def test_unknown_backend_rejected(self, grids, lens):
        with pytest.raises(ValueError, match="backend"):
            kernels.rays_from_view(*grids, lens, backend="cuda")


class TestRays:
    @pytest.mark.parametrize("backend", BOTH)
    def test_matches_scalar_reference(self, backend, grids, lens):
        from pantomorph import primary_ray

        vx, vy = grids
        gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend=backend)
        for j, i in ((0, 0), (27, 48), (53, 95), (13, 70), (40, 3)):
            ray = primary_ray(vx[j, i], vy[j, i], lens)
            assert valid[j, i] == ray.valid
            if ray.valid:
                assert gx[j, i] == pytest.approx(ray.gx, abs=1e-12)
                assert gy[j, i] == pytest.approx(ray.gy, abs=1e-12)
                assert gz[j, i] == pytest.approx(ray.gz, abs=1e-12)

    @needs_numba
    def test_cross_backend_agreement(self, grids, lens):
        vx, vy = grids
        a = kernels.rays_from_view(vx, vy, lens, backend="numpy")
        b = kernels.rays_from_view(vx, vy, lens, backend="numba")
        assert np.array_equal(a[3], b[3])
        for x, y in zip(a[:3], b[:3]):
            assert np.nanmax(np.abs(x - y)) < 1e-12

    @pytest.mark.parametrize("backend", BOTH)
    def test_determinism(self, backend, grids, lens):
        vx, vy = grids
        a = kernels.rays_from_view(vx, vy, lens, backend=backend)
        b = kernels.rays_from_view(vx, vy, lens, backend=backend)
        for x, y in zip(a, b):
            assert np.array_equal(x, y, equal_nan=True)

    @pytest.mark.parametrize("backend", BOTH)
    def test_invalid_pixels_are_nan(self, backend):
        lens = LensParams(KVector(-1.0, -1.0), 1.5)  # field ends at r=2/3
        vx, vy = pixel_to_view(33, 33)
        gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend=backend)
        assert valid[16, 16]
        assert not valid[0, 0]
        assert np.isnan(gx[~valid]).all()
        assert np.isfinite(gx[valid]).all()

    @pytest.mark.parametrize("backend", BOTH)
    def test_center_pixel_exact(self, backend, lens):
        vx, vy = pixel_to_view(33, 33)
        gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend=backend)
        assert (gx[16, 16], gy[16, 16], gz[16, 16]) == (0.0, 0.0, 1.0)

    @pytest.mark.parametrize("backend", BOTH)
    def test_asymmetry_splits_at_horizon(self, backend):
        lens = LensParams(KVector(0.0, 0.75, -0.5), 1.0 / 0.82)
        vx, vy = pixel_to_view(32, 33)  # odd height -> exact center row
        gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend=backend)
        assert not np.allclose(gy[10, :], -gy[22, :], atol=1e-9)


class TestVignetteGrid:
    @pytest.mark.parametrize("backend", BOTH)
    def test_matches_scalar(self, backend, grids, lens):
        from pantomorph import vignette

        vx, vy = grids
        lam = kernels.vignette_grid(vx, vy, lens, backend=backend)
        for j, i in ((0, 0), (27, 48), (53, 95), (8, 60)):
            assert lam[j, i] == pytest.approx(vignette(vx[j, i], vy[j, i], lens), abs=1e-12)

    @needs_numba
    def test_cross_backend(self, grids, lens):
        vx, vy = grids
        a = kernels.vignette_grid(vx, vy, lens, backend="numpy")
        b = kernels.vignette_grid(vx, vy, lens, backend="numba")
        assert np.abs(a - b).max() < 1e-12

    @pytest.mark.parametrize("backend", BOTH)
    def test_invalid_is_zero(self, backend):
        lens = LensParams(KVector(-1.0, -1.0), 1.5)
        vx, vy = pixel_to_view(33, 33)
        lam = kernels.vignette_grid(vx, vy, lens, backend=backend)
        assert lam[0, 0] == 0.0
        assert 0.0 <= lam.min() and lam.max() <= 1.0


class TestDistortGrid:
    @pytest.mark.parametrize("backend", BOTH)
    def test_zero_coefficients_bit_exact(self, backend, grids):
        vx, vy = grids
        ox, oy = kernels.distort_grid(vx, vy, DistortionParams(), backend=backend)
        assert np.array_equal(ox, vx)
        assert np.array_equal(oy, vy)

    @needs_numba
    def test_cross_backend_bit_exact(self, grids):
        vx, vy = grids
        params = DistortionParams(c=(0.02, -0.01), p=(0.05, 0.01), q=(0.004, -0.002),
                                  radial_x=(-0.25, 0.05), radial_y=(0.04,))
        a = kernels.distort_grid(vx, vy, params, backend="numpy")
        b = kernels.distort_grid(vx, vy, params, backend="numba")
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])


@pytest.fixture(scope="module")
def pano():
    h, w = 64, 128
    lon = (np.arange(w) + 0.5) / w * math.tau - math.pi
    lat = math.pi / 2 - (np.arange(h) + 0.5) / h * math.pi
    img = np.zeros((h, w, 3))
    img[..., 0] = 0.5 + 0.5 * np.sin(lon)[None, :]
    img[..., 1] = 0.5 + 0.5 * np.sin(lat)[:, None]
    img[..., 2] = 0.25
    return img


class TestEquirect:
    @pytest.mark.parametrize("backend", BOTH)
    def test_cardinal_directions(self, backend, pano):
        def sample(g):
            gx, gy, gz = (np.array([[v]]) for v in g)
            t = np.array([[True]])
            return kernels.equirect_sample(gx, gy, gz, t, pano, backend=backend)[0, 0]

        fwd = sample((0.0, 0.0, 1.0))  # lon 0 -> sin=0 -> R=0.5
        assert fwd[0] == pytest.approx(0.5, abs=0.02)
        right = sample((1.0, 0.0, 0.0))  # lon pi/2 -> R max
        assert right[0] == pytest.approx(1.0, abs=0.02)
        left = sample((-1.0, 0.0, 0.0))
        assert left[0] == pytest.approx(0.0, abs=0.02)
        up = sample((0.0, 1.0, 0.0))  # top row, G max
        assert up[1] == pytest.approx(1.0, abs=0.05)

    @pytest.mark.parametrize("backend", BOTH)
    def test_longitude_wraps(self, backend, pano):
        eps = 1e-6
        gx = np.array([[math.sin(math.pi - eps), math.sin(-math.pi + eps)]])
        gz = np.array([[math.cos(math.pi - eps), math.cos(-math.pi + eps)]])
        gy = np.zeros((1, 2))
        t = np.ones((1, 2), dtype=bool)
        out = kernels.equirect_sample(gx, gy, gz, t, pano, backend=backend)
        assert np.abs(out[0, 0] - out[0, 1]).max() < 1e-4

    @pytest.mark.parametrize("backend", BOTH)
    def test_invalid_rays_black(self, backend, pano):
        gx = np.array([[np.nan, 0.0]])
        gy = np.array([[np.nan, 0.0]])
        gz = np.array([[np.nan, 1.0]])
        valid = np.array([[False, True]])
        out = kernels.equirect_sample(gx, gy, gz, valid, pano, backend=backend)
        assert np.all(out[0, 0] == 0.0)
        assert out[0, 1].max() > 0.0

    @needs_numba
    def test_cross_backend(self, pano, grids, lens):
        vx, vy = grids
        gx, gy, gz, valid = kernels.rays_from_view(vx, vy, lens, backend="numpy")
        a = kernels.equirect_sample(gx, gy, gz, valid, pano, backend="numpy")
        b = kernels.equirect_sample(gx, gy, gz, valid, pano, backend="numba")
        assert np.abs(a - b).max() < 1e-12


class TestGatherAndDisperse:
    @pytest.mark.parametrize("backend", BOTH)
    def test_gather_at_exact_centers_is_identity(self, backend, rng):
        img = rng.random((20, 30, 3))
        x = np.tile(np.arange(30, dtype=np.float64), (20, 1))
        y = np.tile(np.arange(20, dtype=np.float64)[:, None], (1, 30))
        out = kernels.gather_bilinear(img, x, y, backend=backend)
        assert np.array_equal(out, img)

    @pytest.mark.parametrize("backend", BOTH)
    def test_gather_interpolates_midpoints(self, backend):
        img = np.zeros((2, 2, 1))
        img[0, 0, 0] = 1.0
        out = kernels.gather_bilinear(img, np.array([[0.5]]), np.array([[0.5]]),
                                      backend=backend)
        assert out[0, 0, 0] == pytest.approx(0.25)

    @pytest.mark.parametrize("backend", BOTH)
    def test_gather_nan_coordinates_zero(self, backend, rng):
        img = rng.random((8, 8, 3)) + 0.5
        out = kernels.gather_bilinear(img, np.array([[np.nan]]), np.array([[1.0]]),
                                      backend=backend)
        assert np.all(out == 0.0)

    @pytest.mark.parametrize("backend", BOTH)
    def test_gather_clamps_at_borders(self, backend, rng):
        img = rng.random((8, 8, 3))
        out = kernels.gather_bilinear(img, np.array([[-5.0]]), np.array([[3.0]]),
                                      backend=backend)
        assert np.allclose(out[0, 0], img[3, 0])

    @needs_numba
    def test_disperse_cross_backend_bit_exact(self, rng):
        img = rng.random((24, 32, 3))
        base = rng.random((24, 32)) * 3 - 1.5
        spread = rng.random((24, 32)) * 2 - 1
        ts = np.arange(6) / 6.0
        weights = rng.random((6, 3)) / 3.0
        a = kernels.disperse(img, base, base, spread, spread, ts, weights, backend="numpy")
        b = kernels.disperse(img, base, base, spread, spread, ts, weights, backend="numba")
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("backend", BOTH)
    def test_disperse_zero_offsets_weight_sum(self, backend, rng):
        # taps collapse onto the pixel itself; output is weight-sum times input
        img = rng.random((10, 12, 3))
        zero = np.zeros((10, 12))
        ts = np.arange(4) / 4.0
        weights = np.full((4, 3), 0.25)
        out = kernels.disperse(img, zero, zero, zero, zero, ts, weights, backend=backend)
        assert np.allclose(out, img, atol=1e-15)
