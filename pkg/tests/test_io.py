"""URFD round trips, PGM/CSV emitters, config parsing and validation."""

import math
import struct

import numpy as np
import pytest

from conftest import make_acq
from echoform import FormatError, RfDataset, read_rf, write_pgm, write_rf
from echoform.analysis import Contour, ContourSet
from echoform.config import ConfigError, load_run_config
from echoform.fileio import write_beamsum_csv, write_contour_csv, write_dv_csv


@pytest.fixture
def small_rf():
    acq = make_acq(num_elements=4, scheme="pw", angles=np.deg2rad([-3.0, 0.0, 3.0]))
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(3, 4, 50)).astype(np.float32).astype(np.float64)
    return RfDataset(samples=samples, acquisition=acq, t0=1.25e-5)


class TestUrfd:
    def test_round_trip_identical(self, tmp_path, small_rf):
        path = tmp_path / "a.urfd"
        write_rf(path, small_rf)
        back = read_rf(path)
        assert np.array_equal(back.samples, small_rf.samples)
        assert back.t0 == small_rf.t0
        assert back.acquisition.geometry.num_elements == 4
        assert back.acquisition.geometry.pitch == 0.3e-3
        assert back.acquisition.pulse.sampling_frequency == 31.25e6
        assert back.acquisition.scheme is None

    def test_truncated_payload(self, tmp_path, small_rf):
        path = tmp_path / "a.urfd"
        write_rf(path, small_rf)
        data = path.read_bytes()
        path.write_bytes(data[:-10])
        with pytest.raises(FormatError, match="expected"):
            read_rf(path)

    def test_bad_magic(self, tmp_path, small_rf):
        path = tmp_path / "a.urfd"
        write_rf(path, small_rf)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="magic"):
            read_rf(path)

    def test_unsupported_version(self, tmp_path, small_rf):
        path = tmp_path / "a.urfd"
        write_rf(path, small_rf)
        data = bytearray(path.read_bytes())
        data[4:8] = struct.pack("<I", 99)
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="version"):
            read_rf(path)

    def test_header_truncated(self, tmp_path):
        path = tmp_path / "a.urfd"
        path.write_bytes(b"URF")
        with pytest.raises(FormatError, match="header"):
            read_rf(path)


class TestPgm:
    def test_layout_and_mapping(self, tmp_path):
        db = np.asarray([[0.0, -35.0], [-70.0, -70.0], [-10.0, -20.0]])  # (n_x=3, n_z=2)
        path = tmp_path / "img.pgm"
        write_pgm(path, db, 70.0)
        raw = path.read_bytes()
        header, pixels = raw.split(b"255\n", 1)
        assert header == b"P5\n3 2\n"
        img = np.frombuffer(pixels, dtype=np.uint8).reshape(2, 3)
        assert img[0, 0] == 255  # 0 dB
        assert img[1, 0] == 128  # -35 dB
        assert img[0, 1] == 0    # -70 dB

    def test_deterministic(self, tmp_path):
        rng = np.random.default_rng(1)
        db = -70.0 * rng.uniform(size=(16, 8))
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        write_pgm(a, db, 70.0)
        write_pgm(b, db, 70.0)
        assert a.read_bytes() == b.read_bytes()


class TestCsv:
    def test_beamsum_header_and_rows(self, tmp_path):
        path = tmp_path / "b.csv"
        write_beamsum_csv(path, [dict(pixel=(1e-3, 2e-2), beamformer="das",
                                      labels=[-18.0, 0.0], values=[0.5, 1.5])])
        lines = path.read_text().splitlines()
        assert lines[0] == ("pixel_x_m,pixel_z_m,beamformer,transmission_index,"
                            "angle_deg_or_element,value")
        assert len(lines) == 3
        assert lines[1].startswith("0.001,0.02,das,0,-18,")

    def test_contour_csv(self, tmp_path):
        path = tmp_path / "c.csv"
        cs = ContourSet(contours=(
            Contour(level=0.5, polylines=(np.asarray([[0.0, 1.0], [1.0, 1.5]]),)),))
        write_contour_csv(path, cs)
        lines = path.read_text().splitlines()
        assert lines[0] == "level,polyline,vertex_channel,vertex_tx"
        assert lines[1] == "0.5,0,0,1"
        assert lines[2] == "0.5,0,1,1.5"

    def test_dv_csv(self, tmp_path, point_sta_rf):
        from echoform import dv_analyze

        rep = dv_analyze(point_sta_rf, 0.0, 20e-3)
        path = tmp_path / "d.csv"
        write_dv_csv(path, [rep])
        lines = path.read_text().splitlines()
        assert lines[0] == "x_m,z_m,phi_v,phi_m,eta_rad,vx,vz"
        assert len(lines) == 2


class TestRunConfig:
    def test_defaults(self):
        cfg = load_run_config(text="")
        assert cfg.acquisition.geometry.num_elements == 128
        assert cfg.acquisition.geometry.pitch == pytest.approx(0.3e-3)
        assert cfg.acquisition.pulse.center_frequency == 7.6e6
        assert cfg.acquisition.pulse.sampling_frequency == 31.25e6
        assert cfg.acquisition.medium.speed_of_sound == 1540.0
        assert cfg.acquisition.num_transmissions() == 73
        assert cfg.f_number == 1.5
        assert cfg.dynamic_range == 70.0
        assert cfg.beamformer == "das"
        assert cfg.mvdr.resolve(128) == (32, pytest.approx(1 / 3200))

    def test_sb_default_dynamic_range(self):
        cfg = load_run_config(text="beamformer: {kind: sb}")
        assert cfg.dynamic_range == 40.0

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            load_run_config(text="grid: {nx: 8, bogus: 1}")
        with pytest.raises(ConfigError, match="unknown key"):
            load_run_config(text="nonsense: {}")
        with pytest.raises(ConfigError, match="unknown key"):
            load_run_config(text="beamformer: {mvdr: {subarrays: 4}}")

    def test_invalid_yaml_is_config_error(self):
        with pytest.raises(ConfigError, match="YAML"):
            load_run_config(text="grid: [unclosed")

    def test_degree_mm_boundary(self):
        cfg = load_run_config(text="""
acquisition:
  scheme: pw
  pw_angles_deg: [-6.0, 0.0, 6.0]
grid:
  x_mm: [-5.0, 5.0]
  z_mm: [10.0, 20.0]
  nx: 16
  nz: 16
""")
        angles = cfg.acquisition.scheme.angle_array()
        np.testing.assert_allclose(angles, np.deg2rad([-6.0, 0.0, 6.0]))
        assert cfg.grid.x_min == pytest.approx(-5e-3)
        assert cfg.grid.z_max == pytest.approx(20e-3)

    def test_eq2_preset(self):
        cfg = load_run_config(text="acquisition: {pw_angles_deg: eq2}")
        assert cfg.acquisition.num_transmissions() == 128

    def test_sta_scheme(self):
        cfg = load_run_config(text="acquisition: {scheme: sta}")
        assert cfg.acquisition.num_transmissions() == 128

    def test_overrides(self):
        cfg = load_run_config(text="", overrides={"beamformer": "sb",
                                                  "scheme": "sta"})
        assert cfg.beamformer == "sb"
        assert cfg.dynamic_range == 40.0
        assert cfg.acquisition.scheme.kind == "sta"

    def test_scene_presets_and_inline(self):
        cfg = load_run_config(text="scene: bop")
        assert len(cfg.scene.reflectors) == 2
        cfg = load_run_config(text="""
scene:
  fov_mm: [-8, 8, 10, 30]
  plates:
    - {x_mm: 0, z_mm: 20, half_length_mm: 3, tilt_deg: 10}
""")
        assert len(cfg.scene.reflectors) == 1
        assert cfg.scene.reflectors[0].tilt == pytest.approx(math.radians(10))

    def test_unknown_scene_preset(self):
        with pytest.raises(ConfigError, match="preset"):
            load_run_config(text="scene: nosuch")

    def test_scene_file(self, tmp_path):
        scene_yaml = tmp_path / "s.yaml"
        scene_yaml.write_text(
            "fov_mm: [-8, 8, 10, 30]\n"
            "diffuse:\n  - {x_mm: 0, z_mm: 20}\n")
        cfg = load_run_config(text=f"scene: {{file: {scene_yaml}}}")
        assert len(cfg.scene.diffuse_points) == 1

    def test_fdmas_grid_refinement(self):
        base = load_run_config(text="grid: {z_mm: [10.0, 30.0], nz: 64}")
        fine = load_run_config(text="grid: {z_mm: [10.0, 30.0], nz: 64}",
                               overrides={"beamformer": "fdmas"})
        assert base.grid.n_z == 64
        dz = (fine.grid.z_max - fine.grid.z_min) / (fine.grid.n_z - 1)
        f_hi = 2.5 * fine.acquisition.pulse.center_frequency
        assert 1540.0 / (2 * dz) > 2 * f_hi

    def test_out_of_fov_scene_is_config_error(self):
        with pytest.raises(ConfigError, match="fov"):
            load_run_config(text="""
scene:
  fov_mm: [-8, 8, 10, 30]
  diffuse:
    - {x_mm: 0, z_mm: 50}
""")
