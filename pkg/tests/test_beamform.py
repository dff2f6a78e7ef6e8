"""Baseband conversion and delay-and-sum beamforming."""

import numpy as np
import pytest

from rcaghost.beamform import (
    ComplexVolume,
    FrameSet,
    VolumeGrid,
    beamform_frames,
    das_beamform,
    hann_rx_apodization,
    to_baseband,
)
from rcaghost.forward import ChannelData, make_pulse
from rcaghost.geometry import ALL_PATHS, Medium, RcaArray, tof

MM = 1e-3
F0 = 5e6
FS = 120e6


class TestVolumeGrid:
    def setup_method(self):
        self.grid = VolumeGrid(
            start=(-1 * MM, -2 * MM, 3 * MM),
            step=(0.1 * MM, 0.2 * MM, 0.3 * MM),
            shape=(4, 5, 6),
        )

    def test_axis_positions(self):
        np.testing.assert_allclose(self.grid.xs, -1 * MM + np.arange(4) * 0.1 * MM)
        np.testing.assert_allclose(self.grid.ys, -2 * MM + np.arange(5) * 0.2 * MM)
        np.testing.assert_allclose(self.grid.zs, 3 * MM + np.arange(6) * 0.3 * MM)
        np.testing.assert_array_equal(self.grid.axis_positions(2), self.grid.zs)

    def test_n_voxels(self):
        assert self.grid.n_voxels == 4 * 5 * 6

    def test_voxel_center_roundtrip(self):
        idx = (1, 2, 3)
        center = self.grid.voxel_center(idx)
        np.testing.assert_allclose(center, [-0.9 * MM, -1.6 * MM, 3.9 * MM])
        assert self.grid.nearest_index(center) == idx

    def test_nearest_index_rounds(self):
        p = self.grid.voxel_center((2, 1, 4)) + np.array([0.04, -0.09, 0.1]) * MM
        assert self.grid.nearest_index(p) == (2, 1, 4)

    def test_nearest_index_clamps(self):
        assert self.grid.nearest_index([-10 * MM, 10 * MM, 0.0]) == (0, 4, 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            VolumeGrid(start=(0, 0), step=(1, 1, 1), shape=(2, 2, 2))
        with pytest.raises(ValueError):
            VolumeGrid(start=(0, 0, 0), step=(1, 0, 1), shape=(2, 2, 2))
        with pytest.raises(ValueError):
            VolumeGrid(start=(0, 0, 0), step=(1, 1, 1), shape=(2, 0, 2))


class TestToBaseband:
    def _rf(self, samples, t0=3.7e-7):
        return ChannelData(samples=samples.astype(np.float32), fs=FS, t0=t0)

    def test_pure_carrier_becomes_dc(self):
        t0 = 5.3e-7
        t = t0 + np.arange(400) / FS
        rf = self._rf(np.cos(2 * np.pi * F0 * t)[None, None, :], t0=t0)
        bb = to_baseband(rf, F0)
        assert bb.is_baseband and bb.carrier_f0 == F0
        assert bb.samples.dtype == np.complex64
        interior = bb.samples[0, 0, 50:-50]
        np.testing.assert_allclose(np.abs(interior), 0.5, atol=1e-2)
        # the demodulator references absolute time, so the phase is flat
        np.testing.assert_allclose(interior.real, 0.5, atol=1e-2)

    def test_zero_in_zero_out(self):
        bb = to_baseband(self._rf(np.zeros((2, 2, 100))), F0)
        assert np.all(bb.samples == 0)

    def test_envelope_peak_at_pulse_center(self):
        pulse = make_pulse(f0=F0, cycles=2, fs=FS)
        trace = np.zeros((1, 1, 400))
        trace[0, 0, 100 : 100 + len(pulse.samples)] = pulse.samples
        bb = to_baseband(self._rf(trace), F0)
        peak = int(np.argmax(np.abs(bb.samples[0, 0])))
        center = 100 + (len(pulse.samples) - 1) / 2
        assert abs(peak - center) <= 2

    def test_rejects_double_conversion(self):
        bb = to_baseband(self._rf(np.zeros((1, 1, 50))), F0)
        with pytest.raises(ValueError):
            to_baseband(bb, F0)

    def test_rejects_undersampled_carrier(self):
        rf = ChannelData(samples=np.zeros((1, 1, 50), np.float32), fs=9e6, t0=0.0)
        with pytest.raises(ValueError):
            to_baseband(rf, F0)

    def test_preserves_time_axis(self):
        rf = self._rf(np.zeros((1, 1, 50)), t0=1.2e-6)
        bb = to_baseband(rf, F0)
        assert bb.t0 == rf.t0 and bb.fs == rf.fs


class TestHannRxApodization:
    def test_three_element_values(self):
        np.testing.assert_allclose(hann_rx_apodization(3), [0.5, 1.0, 0.5])

    def test_symmetric_and_positive_at_edges(self):
        w = hann_rx_apodization(16)
        np.testing.assert_allclose(w, w[::-1])
        assert w[0] > 0 and w[-1] > 0
        assert np.max(w) <= 1.0


def _synthetic_baseband(array, point, path, medium, fs=FS, f0=F0, sigma=3.0, delta=0.0):
    """Channel data holding one Gaussian arrival per pair for a single path.

    The envelope is centred at tof + delta and the carrier phase matches
    what the demodulator would have left behind, so delay-and-sum with
    lag=delta must refocus at ``point``.
    """
    point = np.asarray(point)
    tx_els, rx_els = array.tx_rx_elements()
    taus = np.array(
        [[tof(point, tx, rx, path, medium) for rx in rx_els] for tx in tx_els]
    )
    t0 = taus.min() - 20 / fs
    n_t = int(np.ceil((taus.max() + delta - t0) * fs)) + 40
    m = np.arange(n_t)
    env = np.exp(-0.5 * ((m[None, None, :] - (taus[:, :, None] + delta - t0) * fs) / sigma) ** 2)
    data = env * np.exp(-2j * np.pi * f0 * taus[:, :, None])
    return ChannelData(
        samples=data.astype(np.complex64), fs=fs, t0=t0, carrier_f0=f0
    )


def _focus_grid(point):
    return VolumeGrid(
        start=np.asarray(point) - [0.4 * MM, 0.4 * MM, 0.15 * MM],
        step=(0.2 * MM, 0.2 * MM, 0.05 * MM),
        shape=(5, 5, 7),
    )


class TestDasBeamform:
    def setup_method(self):
        self.array = RcaArray(n_rows=8, n_cols=8, pitch_x=148e-6, pitch_y=148e-6)
        self.medium = Medium(c=1480.0)
        self.point = np.array([0.05 * MM, -0.07 * MM, 2.5 * MM])
        self.grid = _focus_grid(self.point)

    @pytest.mark.parametrize("path", [(1, 1), (2, 3), (3, 2)])
    def test_focus_lands_on_the_scatterer(self, path):
        channels = _synthetic_baseband(self.array, self.point, path, self.medium)
        vol = das_beamform(channels, self.array, self.grid, path, self.medium,
                           rx_apodization="uniform")
        assert vol.path == path
        peak = np.unravel_index(np.argmax(np.abs(vol.data)), vol.data.shape)
        assert peak == self.grid.nearest_index(self.point)

    def test_lag_compensates_late_envelopes(self):
        # envelopes centred half a pulse after the time of flight, as they
        # are when the injected pulse starts (not peaks) at the arrival
        path = (1, 1)
        delta = 2e-7
        channels = _synthetic_baseband(
            self.array, self.point, path, self.medium, delta=delta
        )
        focus = self.grid.nearest_index(self.point)
        with_lag = das_beamform(channels, self.array, self.grid, path, self.medium,
                                lag=delta)
        without = das_beamform(channels, self.array, self.grid, path, self.medium)
        assert np.abs(with_lag.data[focus]) > np.abs(without.data[focus])

    def test_linear_in_channel_amplitude(self):
        path = (1, 1)
        channels = _synthetic_baseband(self.array, self.point, path, self.medium)
        doubled = ChannelData(
            samples=2.0 * channels.samples,
            fs=channels.fs,
            t0=channels.t0,
            carrier_f0=channels.carrier_f0,
        )
        a = das_beamform(channels, self.array, self.grid, path, self.medium)
        b = das_beamform(doubled, self.array, self.grid, path, self.medium)
        np.testing.assert_allclose(b.data, 2.0 * a.data, rtol=1e-5)

    def test_zero_in_zero_out(self):
        channels = _synthetic_baseband(self.array, self.point, (1, 1), self.medium)
        silent = ChannelData(
            samples=np.zeros_like(channels.samples),
            fs=channels.fs,
            t0=channels.t0,
            carrier_f0=channels.carrier_f0,
        )
        vol = das_beamform(silent, self.array, self.grid, (1, 1), self.medium)
        assert np.all(vol.data == 0)

    def test_apodization_scales_linearly(self):
        path = (1, 1)
        channels = _synthetic_baseband(self.array, self.point, path, self.medium)
        uniform = das_beamform(channels, self.array, self.grid, path, self.medium,
                               rx_apodization="uniform")
        doubled = das_beamform(channels, self.array, self.grid, path, self.medium,
                               rx_apodization=2.0 * np.ones(8))
        np.testing.assert_allclose(doubled.data, 2.0 * uniform.data, rtol=1e-5)

    def test_rejects_rf_input(self):
        rf = ChannelData(samples=np.zeros((8, 8, 100), np.float32), fs=FS, t0=0.0)
        with pytest.raises(ValueError, match="baseband"):
            das_beamform(rf, self.array, self.grid, (1, 1), self.medium)

    def test_rejects_unknown_path(self):
        channels = _synthetic_baseband(self.array, self.point, (1, 1), self.medium)
        with pytest.raises(ValueError):
            das_beamform(channels, self.array, self.grid, (0, 1), self.medium)

    def test_rejects_grid_behind_aperture(self):
        channels = _synthetic_baseband(self.array, self.point, (1, 1), self.medium)
        bad = VolumeGrid(start=(0, 0, -1 * MM), step=(1e-4, 1e-4, 1e-4), shape=(2, 2, 2))
        with pytest.raises(ValueError, match="z > 0"):
            das_beamform(channels, self.array, bad, (1, 1), self.medium)

    def test_rejects_channel_count_mismatch(self):
        channels = _synthetic_baseband(self.array, self.point, (1, 1), self.medium)
        small = RcaArray(n_rows=4, n_cols=4, pitch_x=148e-6, pitch_y=148e-6)
        with pytest.raises(ValueError, match="aperture"):
            das_beamform(channels, small, self.grid, (1, 1), self.medium)

    def test_bad_apodization_rejected(self):
        channels = _synthetic_baseband(self.array, self.point, (1, 1), self.medium)
        with pytest.raises(ValueError):
            das_beamform(channels, self.array, self.grid, (1, 1), self.medium,
                         rx_apodization="boxcar")
        with pytest.raises(ValueError):
            das_beamform(channels, self.array, self.grid, (1, 1), self.medium,
                         rx_apodization=np.ones(5))


class TestBeamformFrames:
    def test_nine_frames_with_main_first_class(self):
        array = RcaArray(n_rows=4, n_cols=4, pitch_x=148e-6, pitch_y=148e-6)
        medium = Medium(c=1480.0)
        point = np.array([0.0, 0.0, 2.5 * MM])
        channels = _synthetic_baseband(array, point, (1, 1), medium)
        grid = VolumeGrid(start=point - [0.2e-3, 0.2e-3, 0.1e-3],
                          step=(0.2e-3, 0.2e-3, 0.1e-3), shape=(3, 3, 3))
        frames = beamform_frames(channels, array, grid, medium)
        assert set(frames.frames) == set(ALL_PATHS)
        assert frames.main.path == (1, 1)
        assert len(frames.ghosts()) == 8
        assert frames.grid is grid
        reference = das_beamform(channels, array, grid, (1, 1), medium)
        np.testing.assert_array_equal(frames.main.data, reference.data)

    def test_frameset_requires_all_nine(self):
        grid = VolumeGrid(start=(0, 0, 1e-3), step=(1e-4,) * 3, shape=(2, 2, 2))
        one = ComplexVolume(
            data=np.zeros((2, 2, 2), np.complex64), grid=grid, path=(1, 1), f0=F0
        )
        with pytest.raises(ValueError, match="nine"):
            FrameSet(frames={(1, 1): one})


class TestComplexVolume:
    def test_rejects_shape_mismatch(self):
        grid = VolumeGrid(start=(0, 0, 1e-3), step=(1e-4,) * 3, shape=(2, 2, 2))
        with pytest.raises(ValueError):
            ComplexVolume(data=np.zeros((2, 2, 3), np.complex64), grid=grid,
                          path=(1, 1), f0=F0)

    def test_rejects_real_data(self):
        grid = VolumeGrid(start=(0, 0, 1e-3), step=(1e-4,) * 3, shape=(2, 2, 2))
        with pytest.raises(ValueError):
            ComplexVolume(data=np.zeros((2, 2, 2)), grid=grid, path=(1, 1), f0=F0)
