"""Delay compensation, apodization and DAS."""

import math

import numpy as np
import pytest

from conftest import FOV, make_acq
from echoform import (
    ArrayGeometry,
    DegenerateApertureError,
    DiffusePoint,
    RfDataset,
    Scene,
    apodization_weights,
    das,
    delay_compensate,
    synth_rf,
)
from echoform.beamform import interp_channels, nearest_element_weights


class TestInterpolation:
    def test_integer_index_bit_exact(self):
        rng = np.random.default_rng(0)
        traces = rng.normal(size=(3, 32))
        idx = np.asarray([[4.0, 17.0, 31.0]])
        got = interp_channels(traces, idx)
        assert got[0, 0] == traces[0, 4]
        assert got[0, 1] == traces[1, 17]
        assert got[0, 2] == traces[2, 31]

    def test_midpoint(self):
        traces = np.asarray([[1.0, 3.0, -2.0, 5.0]])
        got = interp_channels(traces, np.asarray([1.5]))
        assert got[0] == (3.0 + -2.0) / 2

    def test_out_of_window_zero(self):
        traces = np.ones((2, 10))
        got = interp_channels(traces, np.asarray([-0.01, 9.01]))
        assert got[0] == 0.0
        assert got[1] == 0.0

    def test_ends_inclusive(self):
        traces = np.asarray([[7.0, 1.0], [2.0, 9.0]])
        got = interp_channels(traces, np.asarray([0.0, 1.0]))
        assert got[0] == 7.0
        assert got[1] == 9.0


class TestDelayCompensate:
    def test_point_snapshot_aligned(self):
        # high sampling rate so the interpolated peak is sharp
        acq = make_acq(num_elements=16, scheme="sta", fs=125e6)
        scene = Scene(fov=FOV, diffuse_points=(DiffusePoint(0.0, 20e-3),))
        rf = synth_rf(scene, acq, spreading=False)
        snap = delay_compensate(rf, 0.0, 20e-3, 8)
        assert np.all(snap > 0.95)
        # zero-lag alignment: cross-correlate raw traces pairwise
        a = rf.samples[8, 0]
        b = rf.samples[8, 15]
        lag = np.argmax(np.correlate(a, b, mode="full")) - (a.size - 1)
        shift = (rf.acquisition.geometry.element_x[0] ** 2
                 - rf.acquisition.geometry.element_x[15] ** 2)
        assert abs(lag) <= round(abs(shift) * rf.fs) + 1

    def test_translation_consistency(self, point_sta_rf):
        rf = point_sta_rf
        k = 7
        shifted = RfDataset(
            samples=np.concatenate(
                [np.zeros(rf.samples.shape[:2] + (k,)), rf.samples], axis=2),
            acquisition=rf.acquisition,
            t0=rf.t0 - k / rf.fs,
        )
        a = delay_compensate(rf, 1e-3, 19e-3, 3)
        b = delay_compensate(shifted, 1e-3, 19e-3, 3)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_table_and_direct_paths_agree(self, point_pw_rf):
        from echoform import build_delay_table, PixelGrid

        rf = point_pw_rf
        grid = PixelGrid(x_min=-1e-3, x_max=1e-3, z_min=19e-3, z_max=21e-3,
                         n_x=3, n_z=3)
        table = build_delay_table(grid, rf.acquisition.scheme,
                                  rf.acquisition.geometry, rf.acquisition.medium)
        xs, zs = grid.pixel_positions()
        p = 4
        a = delay_compensate(rf, xs[p], zs[p], 10)
        b = delay_compensate(rf, xs[p], zs[p], 10, delays=table, pixel_index=p)
        np.testing.assert_array_equal(a, b)


class TestApodization:
    def test_rect_deep_pixel_all_active(self):
        g = ArrayGeometry(num_elements=128, pitch=0.3e-3)
        w = apodization_weights(0.0, 200e-3, g, f_number=1.5, window="rect")
        assert np.all(w == 1.0)

    def test_fnumber_aperture_count(self):
        # F# 1.5 at 9 mm depth: half-aperture 3 mm = 10 elements per side
        g = ArrayGeometry(num_elements=128, pitch=0.3e-3)
        x_p = g.element_x[64]
        w = apodization_weights(x_p, 9e-3, g, f_number=1.5, window="rect")
        assert np.count_nonzero(w) == 21

    def test_symmetric_about_element(self):
        g = ArrayGeometry(num_elements=64, pitch=0.3e-3)
        x_p = g.element_x[32]
        w = apodization_weights(x_p, 12e-3, g, f_number=1.5)
        nz = np.flatnonzero(w)
        for k in range(1, 5):
            assert w[32 + k] == pytest.approx(w[32 - k], abs=0)
        assert w.max() == 1.0
        assert nz.size >= 3

    def test_support_shrinks_with_fnumber(self):
        g = ArrayGeometry(num_elements=128, pitch=0.3e-3)
        sizes = [np.count_nonzero(apodization_weights(0.0, 15e-3, g, f, "rect"))
                 for f in (0.8, 1.5, 3.0, 6.0)]
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))
        assert sizes[0] > sizes[-1]

    def test_degenerate_aperture(self):
        g = ArrayGeometry(num_elements=16, pitch=0.3e-3)
        with pytest.raises(DegenerateApertureError):
            apodization_weights(50e-3, 1e-3, g, f_number=1.5)
        fallback = nearest_element_weights(50e-3, g)
        assert fallback[15] == 1.0 and fallback.sum() == 1.0

    def test_max_weight_is_one(self):
        g = ArrayGeometry(num_elements=64, pitch=0.3e-3)
        for z in (5e-3, 9e-3, 30e-3):
            w = apodization_weights(1e-3, z, g, f_number=1.5)
            assert w.max() == 1.0


class TestDas:
    def test_deterministic_sums(self):
        assert das(np.ones(8), np.ones(8)) == 8.0
        assert das(np.ones(8), np.zeros(8)) == 0.0

    def test_linearity_exact_on_integers(self):
        rng = np.random.default_rng(2)
        s1 = rng.integers(-8, 8, 16).astype(float)
        s2 = rng.integers(-8, 8, 16).astype(float)
        w = rng.integers(0, 2, 16).astype(float)
        assert das(3 * s1 + 2 * s2, w) == 3 * das(s1, w) + 2 * das(s2, w)

    def test_linearity_float(self):
        rng = np.random.default_rng(3)
        s1, s2, w = rng.normal(size=(3, 32))
        got = das(1.7 * s1 - 0.4 * s2, w)
        assert got == pytest.approx(1.7 * das(s1, w) - 0.4 * das(s2, w), rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            das(np.ones(4), np.ones(5))

    def test_point_pipeline_peak(self, point_sta_rf):
        from echoform import PixelGrid, beamform_image

        grid = PixelGrid(x_min=-2e-3, x_max=2e-3, z_min=18e-3, z_max=22e-3,
                         n_x=48, n_z=48)
        image = beamform_image(point_sta_rf, grid, "das")
        ix, iz = np.unravel_index(np.argmax(image.envelope), image.envelope.shape)
        lam = point_sta_rf.acquisition.wavelength
        err = math.hypot(grid.xs[ix], grid.zs[iz] - 20e-3)
        assert err <= lam / 2
