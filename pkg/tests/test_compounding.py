"""Compounding, envelope detection, log compression, beamsum profiles."""

import numpy as np
import pytest
from scipy.signal.windows import tukey

from conftest import make_acq
from echoform import (
    AllZeroImageError,
    BeamformedImage,
    LengthMismatchError,
    PixelGrid,
    RfDataset,
    beamsum_profile,
    compound,
    envelope,
    log_compress,
)


class TestCompound:
    def test_trivia(self):
        assert compound(np.zeros(5)) == 0.0
        assert compound(np.asarray([1.0, 2.0, 3.0])) == 6.0

    def test_linearity(self):
        a = np.asarray([1.0, 2.0, 4.0])
        b = np.asarray([8.0, 16.0, 32.0])
        assert compound(a) + compound(b) == compound(a + b)

    def test_length_check(self):
        with pytest.raises(LengthMismatchError):
            compound(np.zeros(5), expected_length=7)

    def test_duplicated_transmissions_scale(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=16)
        doubled = np.concatenate([y, y])
        assert compound(doubled) == pytest.approx(2 * compound(y), rel=1e-14)

    def test_image_stack(self):
        stack = np.ones((4, 3, 2))
        np.testing.assert_array_equal(compound(stack), 4 * np.ones((3, 2)))


class TestEnvelope:
    def test_windowed_tone_amplitude(self):
        fs = 31.25e6
        t = np.arange(400) / fs
        sig = 3.0 * np.cos(2 * np.pi * 7.6e6 * t) * tukey(400, 0.2)
        env = envelope(sig)
        interior = env[80:320]
        assert np.max(np.abs(interior - 3.0)) / 3.0 < 0.02

    def test_zero_line(self):
        assert np.all(envelope(np.zeros(64)) == 0.0)

    def test_homogeneous(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=128)
        np.testing.assert_allclose(envelope(5.0 * x), 5.0 * envelope(x), rtol=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        assert np.all(envelope(rng.normal(size=100)) >= 0.0)

    def test_too_short(self):
        with pytest.raises(ValueError):
            envelope(np.ones(4))


class TestLogCompress:
    def test_peak_is_zero_db(self):
        env = np.asarray([[0.1, 1.0], [0.5, 0.01]])
        db = log_compress(env, 70.0)
        assert db.max() == 0.0

    def test_decade_is_minus_twenty(self):
        db = log_compress(np.asarray([1.0, 0.1]), 70.0)
        assert db[1] == pytest.approx(-20.0, abs=1e-12)

    def test_clipping(self):
        db = log_compress(np.asarray([1.0, 1e-9]), 70.0)
        assert db[1] == -70.0

    def test_zero_env_clips_to_floor(self):
        db = log_compress(np.asarray([1.0, 0.0]), 70.0)
        assert db[1] == -70.0

    def test_all_zero_raises(self):
        with pytest.raises(AllZeroImageError):
            log_compress(np.zeros((4, 4)), 70.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        env = rng.uniform(0.01, 1.0, size=(8, 8))
        np.testing.assert_allclose(log_compress(env, 60.0),
                                   log_compress(123.0 * env, 60.0), atol=1e-12)

    def test_fixed_reference_mode(self):
        env = np.asarray([2.0, 0.2])
        db = log_compress(env, 70.0, reference=1.0)
        assert db[0] == pytest.approx(20 * np.log10(2.0))
        assert db[1] == pytest.approx(-20 * np.log10(5.0))


class TestBeamformedImage:
    def test_views_consistent(self):
        rng = np.random.default_rng(4)
        raw = rng.normal(size=(16, 64))
        grid = PixelGrid(x_min=-1e-3, x_max=1e-3, z_min=1e-3, z_max=5e-3,
                         n_x=16, n_z=64)
        img = BeamformedImage(raw=raw, grid=grid, beamformer="das", scheme="pw",
                              dynamic_range=70.0)
        assert img.envelope.shape == raw.shape
        assert np.all(img.envelope >= 0.0)
        assert img.db.max() == 0.0
        assert img.db.min() >= -70.0


class TestBeamsumProfile:
    def test_lengths_match_scheme(self, point_sta_rf, point_pw_rf):
        p_sta = beamsum_profile(point_sta_rf, 0.0, 20e-3, "das")
        p_pw = beamsum_profile(point_pw_rf, 0.0, 20e-3, "das")
        assert p_sta.shape == (64,)
        assert p_pw.shape == (73,)

    def test_zero_dataset_zero_profile(self):
        acq = make_acq(num_elements=8, scheme="sta")
        rf = RfDataset(samples=np.zeros((8, 8, 128)), acquisition=acq, t0=1e-5)
        for bf in ("das", "fdmas", "mvdr"):
            prof = beamsum_profile(rf, 0.0, 20e-3, bf)
            assert np.all(prof == 0.0)
