"""End-to-end CLI flows: simulate, beamform, beamsum, contour, dv, pipeline."""

import numpy as np
import pytest

from echoform.cli import cli_main

SMALL_ACQ = """
acquisition:
  num_elements: 32
  scheme: pw
  pw_angles_deg: {start: -12.0, stop: 12.0, step: 1.5}
grid:
  x_mm: [-4.0, 4.0]
  z_mm: [16.0, 24.0]
  nx: 48
  nz: 48
"""

PLATE_SCENE = """
scene:
  fov_mm: [-8.0, 8.0, 15.0, 25.0]
  plates:
    - {x_mm: 0.0, z_mm: 20.0, half_length_mm: 3.0, tilt_deg: 10.0}
"""


@pytest.fixture
def plate_config(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(SMALL_ACQ + PLATE_SCENE)
    return cfg


def _read_pgm(path):
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n")
    dims, pixels = raw[3:].split(b"\n255\n", 1)
    w, h = (int(v) for v in dims.split())
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w)


class TestSimulateBeamform:
    def test_flow_peak_on_plate(self, tmp_path, plate_config):
        rf_path = tmp_path / "a.urfd"
        img_path = tmp_path / "a.pgm"
        raw_path = tmp_path / "a.npy"
        assert cli_main(["simulate", "--config", str(plate_config),
                         "--out", str(rf_path)]) == 0
        assert cli_main(["beamform", "--in", str(rf_path), "--config",
                         str(plate_config), "--bf", "das", "--out", str(img_path),
                         "--raw", str(raw_path)]) == 0
        img = _read_pgm(img_path)  # rows = depth over [16, 24] mm
        iz, ix = np.unravel_index(np.argmax(img), img.shape)
        x = -4e-3 + ix * 8e-3 / 47
        z = 16e-3 + iz * 8e-3 / 47
        # brightest pixel on the tilted plate: |z - (20mm - x tan(10 deg))| small
        import math
        assert abs(z - (20e-3 - x * math.tan(math.radians(10.0)))) < 0.8e-3
        assert abs(x) < 3.2e-3
        raw = np.load(raw_path)
        assert raw.shape == (48, 48)

    def test_wip_preset_flow(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(SMALL_ACQ + "scene: wip\n")
        rf_path = tmp_path / "wip.urfd"
        img_path = tmp_path / "wip.pgm"
        assert cli_main(["simulate", "--config", str(cfg), "--scene", "wip",
                         "--scheme", "pw", "--out", str(rf_path)]) == 0
        assert cli_main(["beamform", "--in", str(rf_path), "--config", str(cfg),
                         "--bf", "das", "--out", str(img_path)]) == 0
        img = _read_pgm(img_path)
        iz, ix = np.unravel_index(np.argmax(img), img.shape)
        x = -4e-3 + ix * 8e-3 / 47
        z = 16e-3 + iz * 8e-3 / 47
        # wire plates sit between 13-17 mm depth around |x| <= 3.6 mm
        assert 13e-3 < z < 17.5e-3 and abs(x) < 3.8e-3

    def test_scheme_inference_without_config(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("acquisition: {num_elements: 24, scheme: sta}\n"
                       + PLATE_SCENE)
        rf_path = tmp_path / "sta.urfd"
        assert cli_main(["simulate", "--config", str(cfg), "--out",
                         str(rf_path)]) == 0
        # beamform without --config: T == n_ch implies STA
        out = tmp_path / "sta.pgm"
        assert cli_main(["beamform", "--in", str(rf_path), "--out", str(out)]) == 0
        assert out.exists()


class TestErrors:
    def test_bad_magic_exits_2_no_outputs(self, tmp_path):
        bad = tmp_path / "bad.urfd"
        bad.write_bytes(b"JUNKJUNKJUNKJUNK" + b"\x00" * 64)
        out = tmp_path / "x.pgm"
        assert cli_main(["beamform", "--in", str(bad), "--out", str(out)]) == 2
        assert not out.exists()

    def test_bad_config_exits_1(self, tmp_path):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("acquisition: {bogus_key: 3}\n")
        assert cli_main(["simulate", "--config", str(cfg),
                         "--out", str(tmp_path / "x.urfd")]) == 1

    def test_simulate_without_scene_exits_1(self, tmp_path):
        assert cli_main(["simulate", "--out", str(tmp_path / "x.urfd")]) == 1

    def test_truncated_rf_exits_2(self, tmp_path, plate_config):
        rf_path = tmp_path / "t.urfd"
        assert cli_main(["simulate", "--config", str(plate_config),
                         "--out", str(rf_path)]) == 0
        rf_path.write_bytes(rf_path.read_bytes()[:-33])
        assert cli_main(["beamform", "--in", str(rf_path), "--config",
                         str(plate_config)]) == 2


class TestAnalysisCommands:
    @pytest.fixture
    def dataset(self, tmp_path, plate_config):
        rf_path = tmp_path / "a.urfd"
        assert cli_main(["simulate", "--config", str(plate_config),
                         "--out", str(rf_path)]) == 0
        return rf_path

    def test_beamsum_csv(self, tmp_path, plate_config, dataset):
        out = tmp_path / "bs.csv"
        code = cli_main(["beamsum", "--in", str(dataset), "--config",
                         str(plate_config), "--bf", "das",
                         "--pixel", "0.0", "20.0", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("pixel_x_m,")
        assert len(lines) == 1 + 17  # 17 plane-wave angles

    def test_contour_csv(self, tmp_path, plate_config, dataset):
        out = tmp_path / "ct.csv"
        assert cli_main(["contour", "--in", str(dataset), "--config",
                         str(plate_config), "--pixel", "0.0", "20.0",
                         "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "level,polyline,vertex_channel,vertex_tx"
        assert len(lines) > 10

    def test_dv_csv(self, tmp_path, plate_config, dataset):
        out = tmp_path / "dv.csv"
        assert cli_main(["dv", "--in", str(dataset), "--config",
                         str(plate_config), "--roi", "-1.0", "1.0", "19.0", "21.0",
                         "--percentile", "80", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x_m,z_m,phi_v,phi_m,eta_rad,vx,vz"
        assert len(lines) >= 2

    def test_pixel_parse_error(self, tmp_path, dataset):
        with pytest.raises(SystemExit):
            cli_main(["contour", "--in", str(dataset), "--pixel", "zap", "20.0",
                      "--out", str(tmp_path / "x.csv")])


class TestPipeline:
    def test_all_outputs(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(SMALL_ACQ + PLATE_SCENE + f"""
outputs:
  rf: {tmp_path}/p.urfd
  image: {tmp_path}/p.pgm
  raw: {tmp_path}/p.npy
  beamsum: {tmp_path}/p_beamsum.csv
  beamsum_pixels_mm: [[0.0, 20.0]]
  contour: {tmp_path}/p_contour.csv
  contour_pixel_mm: [0.0, 20.0]
  dv: {tmp_path}/p_dv.csv
  dv_roi_mm: [-1.0, 1.0, 19.0, 21.0]
  dv_percentile: 80
""")
        assert cli_main(["pipeline", "--config", str(cfg)]) == 0
        for name in ("p.urfd", "p.pgm", "p.npy", "p_beamsum.csv",
                     "p_contour.csv", "p_dv.csv"):
            assert (tmp_path / name).exists(), name

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(SMALL_ACQ + PLATE_SCENE + f"""
simulate: {{noise_rms: 0.01, seed: 42}}
outputs:
  rf: {tmp_path}/q.urfd
  image: {tmp_path}/q.pgm
  beamsum: {tmp_path}/q_beamsum.csv
  beamsum_pixels_mm: [[0.0, 20.0]]
""")
        assert cli_main(["pipeline", "--config", str(cfg)]) == 0
        first = {n: (tmp_path / n).read_bytes()
                 for n in ("q.urfd", "q.pgm", "q_beamsum.csv")}
        assert cli_main(["pipeline", "--config", str(cfg)]) == 0
        for name, blob in first.items():
            assert (tmp_path / name).read_bytes() == blob, name
