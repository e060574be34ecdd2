"""Command-line behavior: outputs, exit codes, flag validation."""

import numpy as np
import pytest

from pantomorph import preset
from pantomorph.cli import main
from pantomorph.imgio import read_image, read_pfm, write_png
from pantomorph.mapgen import apply_stmap, read_raymap, read_stmap


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


@pytest.fixture()
def pano_png(tmp_path):
    rng = np.random.default_rng(11)
    path = tmp_path / "pano.png"
    write_png(path, rng.random((32, 64, 3)))
    return path


class TestAov:
    def test_flying_horizontal(self, capsys):
        rc, out, _ = run(capsys, "aov", "--k", "-0.5,0", "--focal", "1", "--ref-axis", "h")
        assert rc == 0
        assert "omega_h = 120.0000 deg" in out
        assert len(out.strip().splitlines()) == 3

    def test_profile_focal_override(self, capsys, tmp_path):
        path = tmp_path / "racing.json"
        preset("racing").save(path)
        rc, stock, _ = run(capsys, "aov", "--profile", str(path))
        assert rc == 0
        assert "omega_h = 155.9" in stock
        rc, overridden, _ = run(capsys, "aov", "--profile", str(path), "--focal", "1.0")
        assert rc == 0
        rc, direct, _ = run(capsys, "aov", "--k", "0.5,-0.5,0", "--focal", "1.0")
        assert rc == 0
        assert overridden == direct != stock

    def test_fov_beyond_projection_limit(self, capsys):
        rc, _, err = run(capsys, "aov", "--k", "1,0", "--fov", "200")
        assert rc == 1
        assert "180" in err


class TestFlagValidation:
    def test_fov_and_focal_conflict(self, capsys):
        rc, _, err = run(capsys, "aov", "--k", "0,0", "--fov", "90", "--focal", "1")
        assert rc == 1
        assert "mutually exclusive" in err

    def test_k_required_without_profile(self, capsys):
        rc, _, err = run(capsys, "aov", "--focal", "1")
        assert rc == 1
        assert "--k" in err

    def test_fov_or_focal_required(self, capsys):
        rc, _, err = run(capsys, "aov", "--k", "0,0")
        assert rc == 1
        assert "--fov" in err or "--focal" in err

    def test_malformed_size(self, capsys):
        rc, _, err = run(capsys, "aov", "--k", "0,0", "--focal", "1", "--size", "640")
        assert rc == 1
        assert "--size" in err

    def test_zero_size(self, capsys):
        rc, _, err = run(capsys, "aov", "--k", "0,0", "--focal", "1", "--size", "0x5")
        assert rc == 1

    def test_unknown_flag(self, capsys):
        rc, _, err = run(capsys, "aov", "--k", "0,0", "--focal", "1", "--zoom", "2")
        assert rc == 1

    def test_exr_output_refused(self, capsys, tmp_path):
        rc, _, err = run(capsys, "raymap", "--k", "0,0", "--fov", "170",
                         "--out", str(tmp_path / "rays.exr"))
        assert rc == 1
        assert ".pfm" in err


class TestRaymap:
    def test_writes_map_and_sidecar(self, capsys, tmp_path):
        out = tmp_path / "rays.pfm"
        rc, msg, _ = run(capsys, "raymap", "--k", "0.5,-0.5,0", "--focal", "0.618",
                         "--size", "32x18", "--out", str(out))
        assert rc == 0
        assert "32x18" in msg
        rm = read_raymap(out)
        assert rm.gx.shape == (18, 32)
        sidecar = out.with_suffix(".lens.json")
        assert sidecar.exists()
        assert '"kx": 0.5' in sidecar.read_text()

    def test_repeat_runs_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.pfm", tmp_path / "b.pfm"
        for out in (a, b):
            rc, _, _ = run(capsys, "raymap", "--k", "0,0.75,-0.5", "--fov", "140",
                           "--size", "16x16", "--out", str(out))
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.with_suffix(".lens.json").read_text() == b.with_suffix(".lens.json").read_text()


class TestStmap:
    def test_rectilinear_identity(self, capsys, tmp_path):
        out = tmp_path / "st.pfm"
        rc, _, _ = run(capsys, "stmap", "--k", "1,1", "--fov", "90",
                       "--size", "64x64", "--out", str(out))
        assert rc == 0
        st = read_stmap(out)
        px = (np.arange(64) + 0.5) / 64.0
        np.testing.assert_allclose(st.s, np.tile(px, (64, 1)), atol=1e-6)
        np.testing.assert_allclose(st.t, np.tile(px[::-1, None], (1, 64)), atol=1e-6)
        rng = np.random.default_rng(3)
        image = rng.random((64, 64, 3))
        np.testing.assert_allclose(apply_stmap(image, st), image, atol=1e-6)

    def test_wide_source_frame_refused(self, capsys, tmp_path):
        rc, _, err = run(capsys, "stmap", "--k", "0,0", "--fov", "200",
                         "--size", "16x16", "--out", str(tmp_path / "st.pfm"))
        assert rc == 1
        assert "180" in err


class TestRemap:
    def test_png_render(self, capsys, tmp_path, pano_png):
        out = tmp_path / "frame.png"
        rc, msg, _ = run(capsys, "remap", str(pano_png), "--k", "0.5,-0.5", "--fov", "150",
                         "--size", "64x36", "--out", str(out))
        assert rc == 0
        img = read_image(out)
        assert img.shape == (36, 64, 4)

    def test_pfm_render_drops_alpha(self, capsys, tmp_path, pano_png):
        out = tmp_path / "frame.pfm"
        rc, _, _ = run(capsys, "remap", str(pano_png), "--k", "0,0", "--fov", "170",
                       "--size", "32x32", "--out", str(out))
        assert rc == 0
        assert read_pfm(out).shape == (32, 32, 3)

    def test_render_flags(self, capsys, tmp_path, pano_png):
        out = tmp_path / "frame.png"
        rc, _, _ = run(capsys, "remap", str(pano_png), "--k", "0.5,-0.5",
                       "--fov", "150", "--size", "32x18", "--out", str(out),
                       "--vignette", "--dispersion", "0.4", "--samples", "8")
        assert rc == 0

    def test_odd_samples_rejected(self, capsys, tmp_path, pano_png):
        rc, _, err = run(capsys, "remap", str(pano_png), "--k", "0,0", "--fov", "90",
                         "--size", "16x16", "--out", str(tmp_path / "x.png"),
                         "--dispersion", "0.4", "--samples", "3")
        assert rc == 1
        assert "even" in err

    def test_missing_panorama_is_io_error(self, capsys, tmp_path):
        rc, _, err = run(capsys, "remap", str(tmp_path / "nope.png"), "--k", "0,0",
                         "--fov", "90", "--size", "16x16", "--out", str(tmp_path / "x.png"))
        assert rc == 2
        assert "i/o error" in err


class TestPreset:
    def test_list(self, capsys):
        rc, out, _ = run(capsys, "preset", "list")
        assert rc == 0
        assert out.splitlines() == ["racing", "flying", "stereopsis", "first-person"]

    def test_show_matches_library_json(self, capsys):
        rc, out, _ = run(capsys, "preset", "show", "racing")
        assert rc == 0
        assert out == preset("racing").to_json()

    def test_show_unknown(self, capsys):
        rc, _, err = run(capsys, "preset", "show", "warp")
        assert rc == 1
        assert "racing" in err
